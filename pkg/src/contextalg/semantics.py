"""From logical forms and word vectors to elements of a context algebra.

Two constructions produce operator-valued languages:

* :func:`build_gamma_language` maps interpreted sentences straight to the
  projection of their logical form.
* :func:`build_aspect_language` does the same for strings of *aspects*.
  Words are then weighted sums of aspect context vectors and sentences are
  products of word vectors.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .context_algebra import (
    EMPTY_CONTEXT,
    AlgebraElement,
    CoefficientSpace,
    GeneralLanguage,
    Str,
    StrLike,
    multiply,
    show_str,
    to_str,
)
from .errors import ForeignSymbolError, InputError, NamespaceError
from .logic import Formula, Universe, as_formula, parse_formula, read_json
from .projections import DiagOperator, projection_of

log = logging.getLogger(__name__)


class SubstringWarning(UserWarning):
    """Some interpreted sentence occurs inside another one."""


class NegativeWeightWarning(UserWarning):
    """A lexicon weight is negative, so degrees may leave [0, 1]."""


def _check_formulas(table: Mapping[Str, Formula], universe: Universe) -> None:
    known = set(universe.atoms)
    for key, f in table.items():
        missing = f.atoms() - known
        if missing:
            raise InputError(f"interpretation of {show_str(key)!r} uses unknown atoms {sorted(missing)}")


@dataclass(frozen=True)
class Interpretation:
    """The map ``rho`` from meaningful aspect strings to formulas."""

    aspects: tuple[str, ...]
    delta: Mapping[Str, Formula]
    universe: Universe = field(repr=False)

    def __post_init__(self):
        aspects = tuple(self.aspects)
        if len(set(aspects)) != len(aspects):
            raise InputError("repeated aspect symbol")
        object.__setattr__(self, "aspects", aspects)
        allowed = set(aspects)
        delta: dict[Str, Formula] = {}
        for key, f in self.delta.items():
            s = to_str(key)
            bad = [a for a in s if a not in allowed]
            if bad:
                raise ForeignSymbolError(f"aspect string {show_str(s)!r} uses undeclared aspects {bad}")
            if s in delta:
                raise InputError(f"aspect string {show_str(s)!r} interpreted twice")
            delta[s] = as_formula(f)
        _check_formulas(delta, self.universe)
        clash = allowed & set(self.universe.atoms)
        if clash:
            raise NamespaceError(f"names used both as aspects and atoms: {sorted(clash)}")
        object.__setattr__(self, "delta", delta)

    def rho(self, x: StrLike) -> Formula | None:
        return self.delta.get(to_str(x))


@dataclass(frozen=True)
class Lexicon:
    """Word vectors ``psi(word)`` as sparse weight maps over aspects."""

    words: Mapping[str, Mapping[str, float]]

    def __post_init__(self):
        clean: dict[str, dict[str, float]] = {}
        for word, weights in self.words.items():
            row = {}
            for aspect, w in weights.items():
                w = float(w)
                if w != w or w in (float("inf"), float("-inf")):
                    raise InputError(f"weight of {word!r} on {aspect!r} is not finite")
                if w != 0.0:
                    row[aspect] = w
            clean[word] = row
        object.__setattr__(self, "words", clean)

    @property
    def nonnegative(self) -> bool:
        return all(w >= 0 for row in self.words.values() for w in row.values())

    def weights(self, word: str) -> dict[str, float]:
        try:
            return self.words[word]
        except KeyError:
            raise InputError(f"unknown word {word!r}") from None

    def aspects(self) -> set[str]:
        return {a for row in self.words.values() for a in row}

    def check_namespaces(self, interp: Interpretation) -> None:
        words = set(self.words)
        for other, label in ((set(interp.aspects), "aspects"), (set(interp.universe.atoms), "atoms")):
            clash = words & other
            if clash:
                raise NamespaceError(f"names used both as words and {label}: {sorted(clash)}")


@dataclass(frozen=True)
class GammaSpec:
    """Sentences with a logical interpretation, optionally wrapped in boundary symbols."""

    sentences: Mapping[Str, Formula]
    boundary: tuple[str, str] | None = None

    def __post_init__(self):
        table: dict[Str, Formula] = {}
        for key, f in self.sentences.items():
            s = to_str(key)
            if self.boundary is not None:
                left, right = self.boundary
                if not (len(s) >= 2 and s[0] == left and s[-1] == right):
                    s = (left,) + s + (right,)
            if s in table:
                raise InputError(f"sentence {show_str(s)!r} interpreted twice")
            table[s] = as_formula(f)
        object.__setattr__(self, "sentences", table)

    @property
    def alphabet(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for s in self.sentences:
            for a in s:
                seen.setdefault(a)
        return tuple(seen)

    def substring_violations(self) -> list[tuple[Str, Str]]:
        """Pairs ``(x, y)`` where ``x`` is a contiguous substring of a different ``y``."""
        out = []
        keys = list(self.sentences)
        for x in keys:
            for y in keys:
                if x != y and len(x) <= len(y) and any(y[i:i + len(x)] == x for i in range(len(y) - len(x) + 1)):
                    out.append((x, y))
        return out


def build_aspect_language(interp: Interpretation) -> GeneralLanguage:
    space = CoefficientSpace(interp.universe)
    # zero projections are pruned by GeneralLanguage
    entries = {s: projection_of(f, interp.universe) for s, f in interp.delta.items()}
    return GeneralLanguage(interp.aspects, entries, space)


def build_gamma_language(spec: GammaSpec, universe: Universe, alphabet: Sequence[str] | None = None) -> GeneralLanguage:
    """Operator-valued language sending each interpreted sentence to its projection.

    Only substring-free sentence sets make the context order match entailment;
    a :class:`SubstringWarning` is issued otherwise.
    """
    _check_formulas(spec.sentences, universe)
    violations = spec.substring_violations()
    if violations:
        x, y = violations[0]
        msg = (f"{len(violations)} sentence pair(s) overlap, e.g. {show_str(x)!r} inside {show_str(y)!r}; "
               "the order embedding is not guaranteed")
        log.warning(msg)
        warnings.warn(msg, SubstringWarning, stacklevel=2)
    space = CoefficientSpace(universe)
    entries = {s: projection_of(f, universe) for s, f in spec.sentences.items()}
    return GeneralLanguage(alphabet if alphabet is not None else spec.alphabet, entries, space)


def word_vector(word: str, lex: Lexicon, L: GeneralLanguage) -> AlgebraElement:
    """``sum(psi(word)[s] * hat(s))`` over aspects ``s``."""
    weights = lex.weights(word)
    coeffs = {}
    for aspect, w in weights.items():
        coeffs[L.check_str((aspect,))] = w
    return AlgebraElement(L, coeffs)


def sentence_vector(words: Sequence[str] | str, lex: Lexicon, L: GeneralLanguage) -> AlgebraElement:
    """Left-to-right product of the word vectors."""
    words = to_str(words)
    if not words:
        raise InputError("a sentence needs at least one word")
    acc = word_vector(words[0], lex, L)
    for w in words[1:]:
        acc = multiply(acc, word_vector(w, lex, L))
    return acc


def sentence_operator(x: AlgebraElement) -> DiagOperator:
    """The value of ``x`` at the empty context ``(eps, eps)``."""
    space = x.language.space
    if space.is_scalar:
        raise InputError("sentence_operator needs an operator-valued language")
    return space.wrap(x.function.raw(EMPTY_CONTEXT))


# ---------------------------------------------------------------------------
# files


def lexicon_from_json(obj: Mapping) -> Lexicon:
    words = obj.get("words") if isinstance(obj, Mapping) else None
    if not isinstance(words, dict) or not all(isinstance(v, dict) for v in words.values()):
        raise InputError('lexicon JSON needs a "words" object of aspect-weight objects')
    return Lexicon(words)


def interpretation_from_json(obj: Mapping, universe: Universe) -> Interpretation:
    if not isinstance(obj, Mapping) or not isinstance(obj.get("aspects"), list) or not isinstance(obj.get("delta"), dict):
        raise InputError('interpretation JSON needs "aspects" (list) and "delta" (object)')
    delta = {to_str(k): parse_formula(v) for k, v in obj["delta"].items()}
    return Interpretation(tuple(obj["aspects"]), delta, universe)


def gamma_from_json(obj: Mapping) -> GammaSpec:
    if not isinstance(obj, Mapping) or not isinstance(obj.get("sentences"), dict):
        raise InputError('gamma JSON needs a "sentences" object')
    boundary = obj.get("boundary")
    if boundary is not None:
        if not (isinstance(boundary, list) and len(boundary) == 2):
            raise InputError('"boundary" must be a two-element list')
        boundary = tuple(boundary)
    return GammaSpec({to_str(k): parse_formula(v) for k, v in obj["sentences"].items()}, boundary)


def load_lexicon(path: str | Path) -> Lexicon:
    return lexicon_from_json(read_json(path))


def load_interpretation(path: str | Path, universe: Universe) -> Interpretation:
    return interpretation_from_json(read_json(path), universe)


def load_gamma(path: str | Path) -> GammaSpec:
    return gamma_from_json(read_json(path))
