import json
import random
from fractions import Fraction

import numpy as np
import pytest

from contextalg.context_algebra import ContextFunction, CoefficientSpace
from contextalg.entailment import Distribution, degree_exact, degree_mc, load_distribution, phi
from contextalg.errors import EstimationError, InputError, NoLogicalContentError
from contextalg.logic import close_universe, parse_formula
from contextalg.projections import DiagOperator, projection_of
from contextalg.semantics import (
    GammaSpec,
    Interpretation,
    Lexicon,
    NegativeWeightWarning,
    build_aspect_language,
    build_gamma_language,
)

from oracles import brute_down_set, brute_entails


def at_empty(universe, op):
    return ContextFunction.from_values(CoefficientSpace(universe), {("", ""): op})


class TestPhi:
    def test_conjunction(self, toy_universe):
        P = Distribution.uniform(toy_universe)
        f = at_empty(toy_universe, projection_of("p & q", toy_universe))
        down = brute_down_set(parse_formula("p & q"), toy_universe.formulas, toy_universe.atoms)
        assert Fraction(len(down), 5) == Fraction(2, 5)
        assert phi(f, P) == pytest.approx(0.4, abs=1e-15)

    def test_empty(self, toy_universe):
        P = Distribution.uniform(toy_universe)
        assert phi(ContextFunction(CoefficientSpace(toy_universe), {}), P) == 0.0

    def test_identity(self, toy_universe):
        P = Distribution(toy_universe, [0.1, 0.2, 0.3, 0.15, 0.25])
        f = at_empty(toy_universe, DiagOperator.identity(toy_universe))
        assert phi(f, P) == pytest.approx(1.0)

    def test_ignores_other_contexts(self, toy_universe):
        P = Distribution.uniform(toy_universe)
        space = CoefficientSpace(toy_universe)
        f = ContextFunction.from_values(space, {("a", ""): DiagOperator.identity(toy_universe)})
        assert phi(f, P) == 0.0

    def test_linear_on_nonnegative(self, toy_universe):
        rng = np.random.default_rng(0)
        P = Distribution.uniform(toy_universe)
        for _ in range(20):
            f = at_empty(toy_universe, DiagOperator(toy_universe, rng.uniform(0, 1, 5)))
            g = at_empty(toy_universe, DiagOperator(toy_universe, rng.uniform(0, 1, 5)))
            a, b = rng.uniform(0, 3, 2)
            assert phi(a * f + b * g, P) == pytest.approx(a * phi(f, P) + b * phi(g, P), abs=1e-12)

    def test_scalar_rejected(self, toy_universe):
        from contextalg.context_algebra import SCALAR
        with pytest.raises(InputError):
            phi(ContextFunction.from_values(SCALAR, {("", ""): 1.0}), Distribution.uniform(toy_universe))


class TestDistribution:
    def test_simplex(self, toy_universe):
        with pytest.raises(InputError):
            Distribution(toy_universe, [0.5, 0.5, 0.5, 0, 0])
        with pytest.raises(InputError):
            Distribution(toy_universe, [-0.5, 0.5, 0.5, 0.5, 0])

    def test_residual_mass(self, toy_universe, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"probs": {"p & q": 0.4, "true": 0.3}}))
        D = load_distribution(path, toy_universe)
        assert D.probs.tolist() == pytest.approx([0.3, 0.1, 0.1, 0.1, 0.4])

    def test_unknown_member(self, toy_universe):
        with pytest.raises(InputError):
            Distribution.from_mapping(toy_universe, {"p | q": 0.5})


class TestDegreeExact:
    def test_toy_values(self, toy_language, toy_lexicon):
        # by hand: phi(w1 w2) = |down(p & q)|/5 = 2/5, phi(w1) = |down(p)|/5 = 3/5
        r = degree_exact("w1 w2", "w1", toy_lexicon, toy_language)
        assert r.degree == 1.0
        assert r.numerator == pytest.approx(0.4) and r.denominator == pytest.approx(0.4)
        r = degree_exact("w1", "w1 w2", toy_lexicon, toy_language)
        assert r.degree == pytest.approx(2 / 3, abs=1e-12)
        assert r.mode == "exact"

    def test_self(self, toy_language, toy_lexicon):
        for x in ("w1", "w2", "w1 w2"):
            assert degree_exact(x, x, toy_lexicon, toy_language).degree == 1.0

    def test_no_content(self, toy_language, toy_lexicon):
        with pytest.raises(NoLogicalContentError):
            degree_exact("w2 w1", "w1", toy_lexicon, toy_language)

    def test_scale_invariant(self, toy_universe):
        # scaling every weight by c scales both sentences by c**n when |x| == |y|
        rng = random.Random(21)
        I = Interpretation(("a", "b", "c"), {"a b": "p", "a c": "q", "b": "p & q", "a": "true", "c b": "false"}, toy_universe)
        L = build_aspect_language(I)
        for _ in range(20):
            words = {w: {s: rng.uniform(0.1, 1) for s in "abc"} for w in ("x", "y")}
            c = rng.uniform(0.1, 10)
            scaled = {w: {s: c * v for s, v in row.items()} for w, row in words.items()}
            d1 = degree_exact("x y", "y x", Lexicon(words), L).degree
            d2 = degree_exact("x y", "y x", Lexicon(scaled), L).degree
            assert d1 == pytest.approx(d2, rel=1e-12)

    def test_one_sided_scaling_changes_degree(self, toy_language):
        # the meet is not homogeneous in one argument: min(c*a, b) != c*min(a, b)
        base = Lexicon({"w1": {"s1": 1.0}, "w2": {"s2": 1.0}})
        louder = Lexicon({"w1": {"s1": 1.0}, "w2": {"s2": 1.0}, "v": {"s1": 3.0}})
        d1 = degree_exact("w1", "w1 w2", base, toy_language).degree
        d2 = degree_exact("v", "w1 w2", louder, toy_language).degree
        assert d1 == pytest.approx(2 / 3)
        assert d2 == pytest.approx(2 / 9)

    def test_bounds(self, toy_universe):
        rng = random.Random(22)
        I = Interpretation(("a", "b", "c"), {"a b": "p", "a c": "q", "b": "p & q", "a": "true", "c b": "false"}, toy_universe)
        L = build_aspect_language(I)
        for _ in range(50):
            words = {w: {s: rng.uniform(0, 1) for s in rng.sample("abc", 2)} for w in ("x", "y", "z")}
            lex = Lexicon(words)
            x = [rng.choice("xyz") for _ in range(rng.randint(1, 3))]
            y = [rng.choice("xyz") for _ in range(rng.randint(1, 3))]
            try:
                d = degree_exact(x, y, lex, L).degree
            except NoLogicalContentError:
                continue
            assert -1e-12 <= d <= 1 + 1e-12

    def test_gamma_entailment_gives_one(self):
        U = close_universe(["p", "q"], 1, 20)
        spec = GammaSpec({"a": "p & q", "b": "p", "c": "p | q", "d": "~p"}, boundary=("<s>", "</s>"))
        L = build_gamma_language(spec, U)
        lex = Lexicon({"[": {"<s>": 1}, "]": {"</s>": 1}, "A": {"a": 1}, "B": {"b": 1}, "C": {"c": 1}, "D": {"d": 1}})
        words = {"a": "A", "b": "B", "c": "C", "d": "D"}
        for x, fx in spec.sentences.items():
            for y, fy in spec.sentences.items():
                if brute_entails(fx, fy, U.atoms):
                    d = degree_exact(["[", words[x[1]], "]"], ["[", words[y[1]], "]"], lex, L)
                    assert d.degree == 1.0

    def test_negative_weights_warn(self, toy_language):
        lex = Lexicon({"w1": {"s1": 2.0, "s2": -1.0}, "w2": {"s2": 1.0}})
        with pytest.warns(NegativeWeightWarning):
            degree_exact("w1", "w1", lex, toy_language)


class TestDegreeMC:
    def test_converges_on_toy(self, toy_language, toy_lexicon):
        r = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=50_000, seed=42)
        assert abs(r.degree - 2 / 3) <= 0.02
        assert r.stderr is not None and 0 < r.stderr < 0.02
        assert r.mode == "mc" and r.samples == 50_000 and r.seed == 42

    def test_deterministic(self, toy_language, toy_lexicon):
        a = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=20_000, seed=7)
        b = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=20_000, seed=7)
        assert a == b

    def test_threads_do_not_change_result(self, toy_language, toy_lexicon):
        a = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=30_000, seed=3, threads=1)
        b = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=30_000, seed=3, threads=4)
        assert a == b

    def test_seeds_differ(self, toy_language, toy_lexicon):
        a = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=5_000, seed=1)
        b = degree_mc("w1", "w1 w2", toy_lexicon, toy_language, samples=5_000, seed=2)
        assert a.degree != b.degree

    def test_single_dimension_is_exact(self, toy_universe):
        I = Interpretation(("s", "t"), {"s": "false", "t": "p"}, toy_universe)
        L = build_aspect_language(I)
        lex = Lexicon({"x": {"s": 1.0}, "y": {"t": 1.0}})
        P = Distribution(toy_universe, [0, 1, 0, 0, 0])
        exact = degree_exact("x", "y", lex, L, P).degree
        for seed in range(5):
            assert degree_mc("x", "y", lex, L, P, samples=100, seed=seed).degree == exact

    def test_all_zero_samples(self, toy_language, toy_lexicon, toy_universe):
        P = Distribution(toy_universe, [1, 0, 0, 0, 0])
        with pytest.raises(EstimationError):
            degree_mc("w1", "w1 w2", toy_lexicon, toy_language, P, samples=50, seed=0)

    def test_rejects_negative_weights(self, toy_language):
        lex = Lexicon({"w1": {"s1": -1.0}})
        with pytest.raises(InputError):
            degree_mc("w1", "w1", lex, toy_language, samples=10)

    def test_rejects_bad_samples(self, toy_language, toy_lexicon):
        with pytest.raises(InputError):
            degree_mc("w1", "w1", toy_lexicon, toy_language, samples=0)
