"""Diagonal operators on the span of the universe's basis vectors.

Every projection ``P_u`` keeps exactly the basis vectors of members that
entail ``u``, so all of them are diagonal in that basis and commute. An
operator is therefore stored as its diagonal; products, sums and lattice
operations act entry-wise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real
from typing import Iterable

import numpy as np

from .errors import UniverseMismatchError
from .logic import BOT, TOP, And, Formula, Not, Or, Universe, as_formula

ARITH_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiagOperator:
    universe: Universe
    diag: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        d = np.array(self.diag, dtype=float)
        if d.shape != (len(self.universe),):
            raise ValueError(f"diagonal has shape {d.shape}, universe has {len(self.universe)} members")
        d.flags.writeable = False
        object.__setattr__(self, "diag", d)

    @classmethod
    def identity(cls, universe: Universe) -> DiagOperator:
        return cls(universe, np.ones(len(universe)))

    @classmethod
    def zero(cls, universe: Universe) -> DiagOperator:
        return cls(universe, np.zeros(len(universe)))

    def _check(self, other: DiagOperator) -> None:
        if not isinstance(other, DiagOperator):
            raise TypeError(f"expected DiagOperator, got {type(other).__name__}")
        if not self.universe.same_as(other.universe):
            raise UniverseMismatchError("operators act on different universes")

    def is_projection(self) -> bool:
        return bool(np.all((self.diag == 0) | (self.diag == 1)))

    def support(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.diag))

    def compose(self, other: DiagOperator) -> DiagOperator:
        self._check(other)
        return DiagOperator(self.universe, self.diag * other.diag)

    def meet(self, other: DiagOperator) -> DiagOperator:
        self._check(other)
        return DiagOperator(self.universe, np.minimum(self.diag, other.diag))

    def join(self, other: DiagOperator) -> DiagOperator:
        self._check(other)
        return DiagOperator(self.universe, np.maximum(self.diag, other.diag))

    def leq(self, other: DiagOperator) -> bool:
        self._check(other)
        return bool(np.all(self.diag <= other.diag))

    def allclose(self, other: DiagOperator, tol: float = ARITH_TOL) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.diag - other.diag), initial=0.0) <= tol)

    def differs_at(self, other: DiagOperator, tol: float = ARITH_TOL) -> frozenset[int]:
        self._check(other)
        return frozenset(int(i) for i in np.flatnonzero(np.abs(self.diag - other.diag) > tol))

    def __add__(self, other):
        self._check(other)
        return DiagOperator(self.universe, self.diag + other.diag)

    def __sub__(self, other):
        self._check(other)
        return DiagOperator(self.universe, self.diag - other.diag)

    def __neg__(self):
        return DiagOperator(self.universe, -self.diag)

    def __mul__(self, other):
        if isinstance(other, Real):
            return DiagOperator(self.universe, float(other) * self.diag)
        return self.compose(other)

    def __rmul__(self, other):
        if isinstance(other, Real):
            return DiagOperator(self.universe, float(other) * self.diag)
        return NotImplemented

    __matmul__ = compose
    __and__ = meet
    __or__ = join
    __le__ = leq

    def __ge__(self, other):
        return other.leq(self)

    def __eq__(self, other):
        if not isinstance(other, DiagOperator):
            return NotImplemented
        return self.universe.same_as(other.universe) and bool(np.array_equal(self.diag, other.diag))

    __hash__ = None

    def __repr__(self):
        return f"DiagOperator({self.diag.tolist()})"

    def to_json(self) -> dict:
        return {"universe_hash": self.universe.digest, "diag": self.diag.tolist()}

    @classmethod
    def from_json(cls, obj: dict, universe: Universe) -> DiagOperator:
        if obj.get("universe_hash") != universe.digest:
            raise UniverseMismatchError("operator was serialized against a different universe")
        return cls(universe, obj["diag"])


def projection_of(u: Formula | str, universe: Universe) -> DiagOperator:
    """The projection onto the members of ``universe`` that entail ``u``."""
    return DiagOperator(universe, universe.down_mask(as_formula(u)).astype(float))


def op_compose(a: DiagOperator, b: DiagOperator) -> DiagOperator:
    return a.compose(b)


def op_add(a: DiagOperator, b: DiagOperator) -> DiagOperator:
    return a + b


def op_sub(a: DiagOperator, b: DiagOperator) -> DiagOperator:
    return a - b


def op_scale(alpha: float, a: DiagOperator) -> DiagOperator:
    return alpha * a


def op_meet(a: DiagOperator, b: DiagOperator) -> DiagOperator:
    return a.meet(b)


def op_join(a: DiagOperator, b: DiagOperator) -> DiagOperator:
    return a.join(b)


def op_leq(a: DiagOperator, b: DiagOperator) -> bool:
    return a.leq(b)


@dataclass
class IdentityReport:
    """Where the four propositional operator identities hold on a universe.

    Conjunction and top are exact on any universe. The negation and
    disjunction identities can fail at members that entail the formula
    without entailing either side of it, and those indices are recorded.
    """

    conj_exact: bool
    top_exact: bool
    neg_defects: dict[Formula, frozenset[int]] = field(default_factory=dict)
    disj_defects: dict[tuple[Formula, Formula], frozenset[int]] = field(default_factory=dict)

    @property
    def clean(self) -> bool:
        return (
            self.conj_exact
            and self.top_exact
            and not any(self.neg_defects.values())
            and not any(self.disj_defects.values())
        )

    def to_json(self, universe: Universe | None = None) -> dict:
        def name(i: int):
            return str(universe.formulas[i]) if universe is not None else i

        return {
            "conj_exact": self.conj_exact,
            "top_exact": self.top_exact,
            "neg_defects": [
                {"u": str(u), "defects": sorted(d), "members": [name(i) for i in sorted(d)]}
                for u, d in self.neg_defects.items()
            ],
            "disj_defects": [
                {"u": str(u), "v": str(v), "defects": sorted(d), "members": [name(i) for i in sorted(d)]}
                for (u, v), d in self.disj_defects.items()
            ],
        }


def check_identities(
    universe: Universe,
    pairs: Iterable[tuple[Formula | str, Formula | str]] | None = None,
    tol: float = ARITH_TOL,
) -> IdentityReport:
    """Measure the operator identities for each pair ``(u, v)``.

    With ``pairs`` omitted, every unordered pair of distinct members is used.
    Negation is checked for every formula that appears in some pair.
    """
    if pairs is None:
        fs = universe.formulas
        pairs = [(fs[i], fs[j]) for i in range(len(fs)) for j in range(i + 1, len(fs))]
    pairs = [(as_formula(u), as_formula(v)) for u, v in pairs]

    one = DiagOperator.identity(universe)
    p_bot = projection_of(BOT, universe)
    cache: dict[Formula, DiagOperator] = {}

    def P(f: Formula) -> DiagOperator:
        if f not in cache:
            cache[f] = projection_of(f, universe)
        return cache[f]

    top_exact = P(TOP) == one
    conj_exact = True
    neg_defects: dict[Formula, frozenset[int]] = {}
    disj_defects: dict[tuple[Formula, Formula], frozenset[int]] = {}
    for u, v in pairs:
        pu, pv = P(u), P(v)
        if P(And(u, v)) != pu @ pv:
            conj_exact = False
        disj_defects[(u, v)] = P(Or(u, v)).differs_at(pu + pv - pu @ pv, tol)
        for w in (u, v):
            if w not in neg_defects:
                neg_defects[w] = P(Not(w)).differs_at(one - P(w) + p_bot, tol)
    return IdentityReport(conj_exact, top_exact, neg_defects, disj_defects)

