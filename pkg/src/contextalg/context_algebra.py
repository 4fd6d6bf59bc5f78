"""Context vectors and the algebra they generate.

A :class:`GeneralLanguage` assigns a value to finitely many strings over an
alphabet. The values live in a coefficient space that is either the reals or
the diagonal operators over a :class:`~contextalg.logic.Universe`. Internally
every value is a 1-D float array (length 1 for reals), which makes the
lattice operations entry-wise in both cases.

Strings are tuples of symbols; ``()`` is the empty string. Text forms use
space-separated symbols, with ``""`` for the empty string.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from numbers import Real
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

import numpy as np

from .errors import ForeignSymbolError, InputError, NotInSpanError, UniverseMismatchError
from .logic import IDENTIFIER, Universe, read_json
from .projections import DiagOperator

Str = tuple[str, ...]
StrLike = Union[Str, str, Sequence[str]]

ZERO_TOL = 1e-12
PIVOT_TOL = 1e-9
RESIDUAL_TOL = 1e-8


def to_str(x: StrLike) -> Str:
    """Normalize ``"a b"``, ``["a", "b"]`` or ``("a", "b")`` to a symbol tuple."""
    if isinstance(x, str):
        return tuple(x.split())
    return tuple(x)


def show_str(s: Str) -> str:
    return " ".join(s)


class Context(NamedTuple):
    left: Str
    right: Str

    def to_json(self) -> list[str]:
        return [show_str(self.left), show_str(self.right)]


EMPTY_CONTEXT = Context((), ())


@dataclass(frozen=True, eq=False)
class CoefficientSpace:
    """Reals when ``universe`` is None, otherwise diagonal operators over it."""

    universe: Universe | None = None

    @property
    def dim(self) -> int:
        return 1 if self.universe is None else len(self.universe)

    @property
    def is_scalar(self) -> bool:
        return self.universe is None

    def same_as(self, other: CoefficientSpace) -> bool:
        if self.universe is None or other.universe is None:
            return self.universe is None and other.universe is None
        return self.universe.same_as(other.universe)

    def check(self, other: CoefficientSpace) -> None:
        if not self.same_as(other):
            raise UniverseMismatchError("values live in different coefficient spaces")

    def unwrap(self, value) -> np.ndarray:
        if self.universe is None:
            if not isinstance(value, Real):
                raise InputError(f"expected a real value, got {value!r}")
            return np.array([float(value)])
        if not isinstance(value, DiagOperator):
            raise InputError(f"expected a DiagOperator, got {value!r}")
        if not value.universe.same_as(self.universe):
            raise UniverseMismatchError("operator belongs to a different universe")
        return np.array(value.diag, dtype=float)

    def wrap(self, vec: np.ndarray):
        if self.universe is None:
            return float(vec[0])
        return DiagOperator(self.universe, vec)

    def zero(self) -> np.ndarray:
        return np.zeros(self.dim)


SCALAR = CoefficientSpace()


def _is_zero(vec: np.ndarray) -> bool:
    return float(np.max(np.abs(vec), initial=0.0)) <= ZERO_TOL


class GeneralLanguage:
    """A finitely supported map from strings over ``alphabet`` to a coefficient space."""

    def __init__(self, alphabet: Iterable[str], entries: Mapping[StrLike, object], space: CoefficientSpace = SCALAR):
        self.alphabet: tuple[str, ...] = tuple(alphabet)
        if len(set(self.alphabet)) != len(self.alphabet):
            raise InputError("alphabet has repeated symbols")
        for a in self.alphabet:
            if not IDENTIFIER.fullmatch(a) and not (a.startswith("<") and a.endswith(">") and len(a) > 2):
                raise InputError(f"invalid symbol {a!r}")
        self.space = space
        self._rank = {a: i for i, a in enumerate(self.alphabet)}
        stored: dict[Str, np.ndarray] = {}
        for key, value in entries.items():
            s = self.check_str(key)
            vec = value if isinstance(value, np.ndarray) else space.unwrap(value)
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (space.dim,):
                raise InputError(f"value for {show_str(s)!r} has shape {vec.shape}")
            if not _is_zero(vec):
                vec.flags.writeable = False
                stored[s] = vec
        self._entries = stored
        self.max_length = max((len(s) for s in stored), default=0)
        self._cv_cache: dict[Str, ContextFunction] = {}
        self._factors: frozenset[Str] | None = None

    def check_str(self, x: StrLike) -> Str:
        s = to_str(x)
        for a in s:
            if a not in self._rank:
                raise ForeignSymbolError(f"symbol {a!r} is not in the alphabet")
        return s

    def sort_key(self, s: Str) -> tuple:
        return (len(s), tuple(self._rank[a] for a in s))

    @property
    def support(self) -> tuple[Str, ...]:
        return tuple(sorted(self._entries, key=self.sort_key))

    def raw(self, s: Str) -> np.ndarray | None:
        return self._entries.get(s)

    def __call__(self, x: StrLike):
        vec = self._entries.get(self.check_str(x))
        return self.space.wrap(self.space.zero() if vec is None else vec)

    def items(self):
        return self._entries.items()

    @property
    def factors(self) -> frozenset[Str]:
        if self._factors is None:
            out = set()
            for s in self._entries:
                for i in range(len(s) + 1):
                    for j in range(i, len(s) + 1):
                        out.add(s[i:j])
            self._factors = frozenset(out)
        return self._factors

    def __repr__(self):
        kind = "scalar" if self.space.is_scalar else "operator"
        return f"GeneralLanguage({kind}, alphabet={list(self.alphabet)}, support={len(self._entries)})"


class ContextFunction:
    """A finitely supported map from contexts to the coefficient space."""

    __slots__ = ("space", "_values")
    # let numpy scalars defer to __rmul__
    __array_ufunc__ = None

    def __init__(self, space: CoefficientSpace, values: Mapping[Context, np.ndarray] | None = None):
        self.space = space
        self._values: dict[Context, np.ndarray] = {}
        for c, vec in (values or {}).items():
            vec = np.asarray(vec, dtype=float)
            if not _is_zero(vec):
                self._values[Context(*c)] = vec

    @classmethod
    def from_values(cls, space: CoefficientSpace, values: Mapping[tuple, object]) -> ContextFunction:
        """Build from wrapped values (floats or DiagOperators) keyed by ``(left, right)``."""
        return cls(space, {Context(to_str(l), to_str(r)): space.unwrap(v) for (l, r), v in values.items()})

    @property
    def support(self) -> frozenset[Context]:
        return frozenset(self._values)

    def raw(self, c: Context) -> np.ndarray:
        vec = self._values.get(c)
        return self.space.zero() if vec is None else vec

    def __getitem__(self, c: tuple) -> object:
        return self.space.wrap(self.raw(Context(to_str(c[0]), to_str(c[1]))))

    def items(self):
        return self._values.items()

    def __len__(self):
        return len(self._values)

    def _union(self, other: ContextFunction):
        self.space.check(other.space)
        keys = set(self._values) | set(other._values)
        return sorted(keys)

    def __add__(self, other: ContextFunction) -> ContextFunction:
        return ContextFunction(self.space, {c: self.raw(c) + other.raw(c) for c in self._union(other)})

    def __sub__(self, other: ContextFunction) -> ContextFunction:
        return ContextFunction(self.space, {c: self.raw(c) - other.raw(c) for c in self._union(other)})

    def __neg__(self) -> ContextFunction:
        return ContextFunction(self.space, {c: -v for c, v in self._values.items()})

    def __mul__(self, alpha):
        if not isinstance(alpha, Real):
            return NotImplemented
        return ContextFunction(self.space, {c: float(alpha) * v for c, v in self._values.items()})

    __rmul__ = __mul__

    def max_abs_diff(self, other: ContextFunction) -> float:
        return max((float(np.max(np.abs(self.raw(c) - other.raw(c)))) for c in self._union(other)), default=0.0)

    def allclose(self, other: ContextFunction, tol: float = 1e-9) -> bool:
        return self.max_abs_diff(other) <= tol

    def __eq__(self, other):
        if not isinstance(other, ContextFunction):
            return NotImplemented
        return self.space.same_as(other.space) and self.allclose(other, 0.0)

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{c.to_json()}: {self.space.wrap(v)!r}" for c, v in sorted(self._values.items()))
        return f"ContextFunction({{{body}}})"

    def to_json(self) -> list:
        return [
            {"context": c.to_json(), "value": self.space.wrap(v) if self.space.is_scalar else v.tolist()}
            for c, v in sorted(self._values.items())
        ]


def context_vector(L: GeneralLanguage, x: StrLike) -> ContextFunction:
    """The function ``(y, z) -> L(y x z)``.

    Every occurrence of ``x`` in every support string contributes its own
    context, overlapping occurrences included.
    """
    x = L.check_str(x)
    cached = L._cv_cache.get(x)
    if cached is not None:
        return cached
    n = len(x)
    values: dict[Context, np.ndarray] = {}
    for s, vec in L.items():
        for i in range(len(s) - n + 1):
            if s[i:i + n] == x:
                values[Context(s[:i], s[i + n:])] = vec
    cf = ContextFunction(L.space, values)
    L._cv_cache[x] = cf
    return cf


def enumerate_nonzero_strings(L: GeneralLanguage) -> list[Str]:
    """All factors of support strings, shortest first, then by alphabet order."""
    return sorted(L.factors, key=L.sort_key)


# ---------------------------------------------------------------------------
# bases


@dataclass(frozen=True, eq=False)
class Basis:
    """Strings whose context vectors form a basis of the algebra.

    ``index`` lists the flattened coordinates ``(context, component)`` used by
    ``rows`` (the raw context vectors of ``strings``) and ``echelon`` (their
    row-reduced form, with ``pivots`` giving each row's pivot column).
    """

    language: GeneralLanguage
    strings: tuple[Str, ...]
    index: tuple[tuple[Context, int], ...]
    rows: np.ndarray
    echelon: np.ndarray
    pivots: tuple[int, ...]
    column: dict = field(repr=False)

    def __len__(self):
        return len(self.strings)

    def flatten(self, f: ContextFunction) -> tuple[np.ndarray, float]:
        """Coordinates of ``f`` on the index, plus the largest value lying off it."""
        vec = np.zeros(len(self.index))
        outside = 0.0
        for c, v in f.items():
            for k, x in enumerate(v):
                col = self.column.get((c, k))
                if col is None:
                    outside = max(outside, abs(float(x)))
                else:
                    vec[col] = x
        return vec, outside


def _flat_index(L: GeneralLanguage, strings: Iterable[Str]) -> list[tuple[Context, int]]:
    contexts = set()
    for s in strings:
        contexts.update(context_vector(L, s).support)
    return [(c, k) for c in sorted(contexts) for k in range(L.space.dim)]


def string_basis(L: GeneralLanguage, order: Sequence[StrLike] | None = None, pivot_tol: float = PIVOT_TOL) -> Basis:
    """Greedily pick strings, in ``order``, whose context vectors are independent.

    A candidate is kept when, after elimination against the rows kept so far,
    some entry still exceeds ``pivot_tol`` times the candidate's largest entry.
    """
    enumerated = enumerate_nonzero_strings(L)
    if order is None:
        order = enumerated
    else:
        order = [L.check_str(s) for s in order]
        if sorted(order, key=L.sort_key) != enumerated:
            raise InputError("order must be a permutation of the enumerated nonzero strings")
    index = _flat_index(L, order)
    column = {key: i for i, key in enumerate(index)}
    dummy = Basis(L, (), tuple(index), np.zeros((0, len(index))), np.zeros((0, len(index))), (), column)

    chosen: list[Str] = []
    raw_rows: list[np.ndarray] = []
    reduced: list[np.ndarray] = []
    pivots: list[int] = []
    for s in order:
        v, _ = dummy.flatten(context_vector(L, s))
        scale = float(np.max(np.abs(v), initial=0.0))
        if scale == 0.0:
            continue
        r = v.copy()
        for p, row in zip(pivots, reduced):
            if r[p] != 0.0:
                r -= r[p] * row
        p = int(np.argmax(np.abs(r)))
        if abs(r[p]) <= pivot_tol * scale:
            continue
        chosen.append(s)
        raw_rows.append(v)
        reduced.append(r / r[p])
        pivots.append(p)

    shape = (len(chosen), len(index))
    rows = np.array(raw_rows).reshape(shape)
    echelon = np.array(reduced).reshape(shape)
    rows.flags.writeable = False
    echelon.flags.writeable = False
    return Basis(L, tuple(chosen), tuple(index), rows, echelon, tuple(pivots), column)


def expand_in_basis(f: ContextFunction, B: Basis, tol: float = RESIDUAL_TOL) -> np.ndarray:
    """Coefficients ``alpha`` with ``f == sum(alpha[i] * hat(B.strings[i]))``."""
    B.language.space.check(f.space)
    vec, outside = B.flatten(f)
    if len(B) == 0:
        alpha = np.zeros(0)
        residual = max(outside, float(np.max(np.abs(vec), initial=0.0)))
    else:
        alpha, *_ = np.linalg.lstsq(B.rows.T, vec, rcond=None)
        residual = max(outside, float(np.max(np.abs(B.rows.T @ alpha - vec), initial=0.0)))
    if residual > tol:
        raise NotInSpanError(residual)
    return alpha


# ---------------------------------------------------------------------------
# algebra elements


class AlgebraElement:
    """A finite combination ``sum(coeffs[x] * hat(x))`` of context vectors.

    Coefficients on strings whose context vector is zero are dropped, so the
    formal representation only mentions factors of the language's support.
    """

    __array_ufunc__ = None

    def __init__(self, language: GeneralLanguage, coeffs: Mapping[StrLike, float] | None = None):
        self.language = language
        kept: dict[Str, float] = {}
        factors = language.factors
        for key, c in (coeffs or {}).items():
            s = language.check_str(key)
            c = float(c)
            if abs(c) > ZERO_TOL and s in factors:
                kept[s] = kept.get(s, 0.0) + c
        self.coeffs: dict[Str, float] = {s: c for s, c in kept.items() if abs(c) > ZERO_TOL}

    @classmethod
    def hat(cls, language: GeneralLanguage, x: StrLike) -> AlgebraElement:
        return cls(language, {language.check_str(x): 1.0})

    @classmethod
    def unity(cls, language: GeneralLanguage) -> AlgebraElement:
        return cls(language, {(): 1.0})

    @classmethod
    def from_basis(cls, B: Basis, alpha: Sequence[float]) -> AlgebraElement:
        return cls(B.language, dict(zip(B.strings, alpha)))

    @functools.cached_property
    def function(self) -> ContextFunction:
        acc: dict[Context, np.ndarray] = {}
        for s, c in self.coeffs.items():
            for ctx, vec in context_vector(self.language, s).items():
                prev = acc.get(ctx)
                acc[ctx] = c * vec if prev is None else prev + c * vec
        return ContextFunction(self.language.space, acc)

    def _check(self, other: AlgebraElement) -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.language is not self.language:
            raise UniverseMismatchError("elements belong to different languages")

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        self._check(other)
        out = dict(self.coeffs)
        for s, c in other.coeffs.items():
            out[s] = out.get(s, 0.0) + c
        return AlgebraElement(self.language, out)

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(self.language, {s: -c for s, c in self.coeffs.items()})

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Real):
            return AlgebraElement(self.language, {s: float(other) * c for s, c in self.coeffs.items()})
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return self * other
        return NotImplemented

    def __repr__(self):
        terms = ", ".join(f"{show_str(s)!r}: {c:g}" for s, c in sorted(self.coeffs.items(), key=lambda kv: self.language.sort_key(kv[0])))
        return f"AlgebraElement({{{terms}}})"


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """Bilinear extension of ``hat(x) * hat(y) = hat(xy)`` on formal coefficients."""
    a._check(b)
    factors = a.language.factors
    out: dict[Str, float] = {}
    for x, cx in a.coeffs.items():
        for y, cy in b.coeffs.items():
            z = x + y
            if z in factors:
                out[z] = out.get(z, 0.0) + cx * cy
    return AlgebraElement(a.language, out)


# ---------------------------------------------------------------------------
# order and lattice


def cf_leq(a: ContextFunction, b: ContextFunction) -> bool:
    return all(bool(np.all(a.raw(c) <= b.raw(c))) for c in a._union(b))


def cf_meet(a: ContextFunction, b: ContextFunction) -> ContextFunction:
    return ContextFunction(a.space, {c: np.minimum(a.raw(c), b.raw(c)) for c in a._union(b)})


def cf_join(a: ContextFunction, b: ContextFunction) -> ContextFunction:
    return ContextFunction(a.space, {c: np.maximum(a.raw(c), b.raw(c)) for c in a._union(b)})


# ---------------------------------------------------------------------------
# files


def language_from_json(obj: Mapping) -> GeneralLanguage:
    try:
        alphabet = obj["alphabet"]
        entries = obj["entries"]
    except (KeyError, TypeError):
        raise InputError('language JSON needs "alphabet" and "entries"') from None
    if not isinstance(alphabet, list) or not isinstance(entries, dict):
        raise InputError('"alphabet" must be a list and "entries" an object')
    values = {}
    for key, v in entries.items():
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise InputError(f"entry {key!r} must be a number")
        values[key] = float(v)
    return GeneralLanguage(alphabet, values)


def load_language(path: str | Path) -> GeneralLanguage:
    return language_from_json(read_json(path))
