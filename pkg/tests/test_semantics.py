import json
import random

import numpy as np
import pytest

from contextalg.context_algebra import EMPTY_CONTEXT, AlgebraElement, cf_leq, context_vector
from contextalg.errors import ForeignSymbolError, InputError, NamespaceError
from contextalg.logic import Universe, close_universe, parse_formula
from contextalg.projections import DiagOperator, projection_of
from contextalg.semantics import (
    GammaSpec,
    Interpretation,
    Lexicon,
    SubstringWarning,
    build_aspect_language,
    build_gamma_language,
    load_gamma,
    load_interpretation,
    load_lexicon,
    sentence_operator,
    sentence_vector,
    word_vector,
)

from oracles import brute_entails, brute_sentence_function


class TestAspectLanguage:
    def test_entries(self, toy_language, toy_universe):
        assert toy_language("s1 s2").diag.tolist() == [0, 1, 0, 0, 1]
        assert toy_language("s1 s2") == projection_of("p & q", toy_universe)

    def test_outside_delta_is_zero(self, toy_language, toy_universe):
        assert toy_language("s2 s1") == DiagOperator.zero(toy_universe)

    def test_bottom(self, toy_universe):
        I = Interpretation(("s",), {"s": "false"}, toy_universe)
        assert build_aspect_language(I)("s").diag.tolist() == [0, 1, 0, 0, 0]

    def test_zero_projection_omitted(self):
        U = Universe(tuple(parse_formula(t) for t in ("p", "q")), ("p", "q"), require_constants=False)
        L = build_aspect_language(Interpretation(("s",), {"s": "false"}, U))
        assert L.support == ()

    def test_validation(self, toy_universe):
        with pytest.raises(ForeignSymbolError):
            Interpretation(("s1",), {"s1 s9": "p"}, toy_universe)
        with pytest.raises(InputError):
            Interpretation(("s1",), {"s1": "r"}, toy_universe)
        with pytest.raises(NamespaceError):
            Interpretation(("p",), {"p": "p"}, toy_universe)


class TestGamma:
    def spec(self):
        return GammaSpec({"the cat sleeps": "p & q", "a cat sleeps": "p", "nobody sleeps": "false"},
                         boundary=("<s>", "</s>"))

    def test_boundaries_make_single_context(self, toy_universe):
        spec = self.spec()
        L = build_gamma_language(spec, toy_universe)
        for s, f in spec.sentences.items():
            cv = context_vector(L, s)
            assert cv.support == {EMPTY_CONTEXT}
            assert cv[((), ())] == projection_of(f, toy_universe)

    def test_order_matches_entailment(self, toy_universe):
        spec = self.spec()
        L = build_gamma_language(spec, toy_universe)
        for x, fx in spec.sentences.items():
            for y, fy in spec.sentences.items():
                got = cf_leq(context_vector(L, x), context_vector(L, y))
                assert got == brute_entails(fx, fy, toy_universe.atoms)

    def test_substring_warning(self, toy_universe):
        spec = GammaSpec({"cat sleeps": "p", "the cat sleeps": "p & q"})
        assert spec.substring_violations() == [(("cat", "sleeps"), ("the", "cat", "sleeps"))]
        with pytest.warns(SubstringWarning):
            build_gamma_language(spec, toy_universe)

    def test_already_wrapped(self):
        spec = GammaSpec({"<s> hi </s>": "p"}, boundary=("<s>", "</s>"))
        assert list(spec.sentences) == [("<s>", "hi", "</s>")]


class TestWords:
    def test_word_vector(self, toy_universe):
        I = Interpretation(("s_fin", "s_riv"), {"s_fin": "p", "s_riv": "q"}, toy_universe)
        L = build_aspect_language(I)
        lex = Lexicon({"bank": {"s_fin": 0.6, "s_riv": 0.4}, "w": {"s_fin": 1}})
        assert word_vector("bank", lex, L).coeffs == {("s_fin",): 0.6, ("s_riv",): 0.4}
        assert word_vector("w", lex, L).coeffs == AlgebraElement.hat(L, "s_fin").coeffs
        with pytest.raises(InputError):
            word_vector("river", lex, L)

    def test_unknown_aspect(self, toy_language):
        with pytest.raises(ForeignSymbolError):
            word_vector("w", Lexicon({"w": {"s7": 1.0}}), toy_language)

    def test_ambiguous_word_operator(self, toy_universe):
        I = Interpretation(("s_fin", "s_riv"), {"s_fin": "p", "s_riv": "q"}, toy_universe)
        L = build_aspect_language(I)
        lex = Lexicon({"bank": {"s_fin": 0.6, "s_riv": 0.4}})
        got = sentence_operator(sentence_vector(["bank"], lex, L))
        want = 0.6 * projection_of("p", toy_universe) + 0.4 * projection_of("q", toy_universe)
        assert got.allclose(want)

    def test_two_word_sentence(self, toy_language, toy_lexicon, toy_universe):
        x = sentence_vector("w1 w2", toy_lexicon, toy_language)
        assert x.coeffs == {("s1", "s2"): 1.0}
        assert x.function.support == {EMPTY_CONTEXT}
        assert sentence_operator(x) == projection_of("p & q", toy_universe)

    def test_single_word_is_word_vector(self, toy_language, toy_lexicon):
        assert sentence_vector(["w1"], toy_lexicon, toy_language).coeffs == \
            word_vector("w1", toy_lexicon, toy_language).coeffs

    def test_no_empty_context(self, toy_language, toy_lexicon, toy_universe):
        x = sentence_vector("w2 w1", toy_lexicon, toy_language)
        assert sentence_operator(x) == DiagOperator.zero(toy_universe)

    def test_scalar_language_rejected(self):
        from contextalg.context_algebra import GeneralLanguage
        L = GeneralLanguage(["s"], {"s": 1.0})
        with pytest.raises(InputError):
            sentence_operator(AlgebraElement.hat(L, "s"))

    def test_empty_sentence(self, toy_language, toy_lexicon):
        with pytest.raises(InputError):
            sentence_vector([], toy_lexicon, toy_language)

    def test_namespaces(self, toy_interp):
        with pytest.raises(NamespaceError):
            Lexicon({"s1": {"s1": 1.0}}).check_namespaces(toy_interp)
        with pytest.raises(NamespaceError):
            Lexicon({"p": {"s1": 1.0}}).check_namespaces(toy_interp)

    def test_nonnegative_flag(self):
        assert Lexicon({"w": {"s": 1.0}}).nonnegative
        assert not Lexicon({"w": {"s": -1.0}}).nonnegative


def _random_setup(rng, n_aspects=4, max_len=4):
    U = close_universe(["p", "q"], 1, 20)
    aspects = [f"s{i}" for i in range(n_aspects)]
    delta = {}
    for _ in range(rng.randint(2, 10)):
        key = tuple(rng.choice(aspects) for _ in range(rng.randint(1, max_len)))
        delta[key] = rng.choice(U.formulas)
    L = build_aspect_language(Interpretation(tuple(aspects), delta, U))
    words = {f"w{i}": {a: rng.uniform(0, 1) for a in rng.sample(aspects, rng.randint(1, n_aspects))} for i in range(4)}
    return L, Lexicon(words)


class TestComposition:
    def test_matches_enumeration(self):
        rng = random.Random(12)
        for _ in range(30):
            L, lex = _random_setup(rng)
            words = [rng.choice(list(lex.words)) for _ in range(rng.randint(1, 4))]
            got = sentence_vector(words, lex, L).function
            assert got.allclose(brute_sentence_function(words, lex, L), 1e-10)

    def test_fold_associative(self):
        rng = random.Random(13)
        for _ in range(20):
            L, lex = _random_setup(rng)
            words = [rng.choice(list(lex.words)) for _ in range(3)]
            a, b, c = (word_vector(w, lex, L) for w in words)
            left = (a * b) * c
            right = a * (b * c)
            assert left.function.allclose(right.function, 1e-12)
            assert left.coeffs.keys() == right.coeffs.keys()

    def test_linear_in_one_word(self):
        rng = random.Random(14)
        for _ in range(20):
            L, lex = _random_setup(rng)
            psi1 = lex.words["w0"]
            psi2 = lex.words["w1"]
            alpha, beta = 2.0, 0.5
            mixed = {a: alpha * psi1.get(a, 0) + beta * psi2.get(a, 0) for a in set(psi1) | set(psi2)}
            lex_mix = Lexicon({**lex.words, "m": mixed, "m1": psi1, "m2": psi2})
            sentence = ["w2", "m", "w3"]
            got = sentence_vector(sentence, lex_mix, L)
            s1 = sentence_vector(["w2", "m1", "w3"], lex_mix, L)
            s2 = sentence_vector(["w2", "m2", "w3"], lex_mix, L)
            want = alpha * s1 + beta * s2
            assert got.coeffs.keys() == want.coeffs.keys()
            for k in got.coeffs:
                assert got.coeffs[k] == pytest.approx(want.coeffs[k], abs=1e-12)


def test_loaders(tmp_path, toy_universe):
    (tmp_path / "lex.json").write_text(json.dumps({"words": {"bank": {"s_fin": 0.6, "s_riv": 0.4}}}))
    (tmp_path / "interp.json").write_text(json.dumps({"aspects": ["s_fin", "s_riv"], "delta": {"s_fin s_riv": "p & q"}}))
    (tmp_path / "gamma.json").write_text(json.dumps({"sentences": {"<bos> the cat sleeps <eos>": "p"}}))
    lex = load_lexicon(tmp_path / "lex.json")
    assert lex.weights("bank") == {"s_fin": 0.6, "s_riv": 0.4}
    interp = load_interpretation(tmp_path / "interp.json", toy_universe)
    assert interp.rho("s_fin s_riv") == parse_formula("p & q")
    gamma = load_gamma(tmp_path / "gamma.json")
    assert ("<bos>", "the", "cat", "sleeps", "<eos>") in gamma.sentences
    (tmp_path / "bad.json").write_text(json.dumps({"words": ["x"]}))
    with pytest.raises(InputError):
        load_lexicon(tmp_path / "bad.json")
