"""Propositional formulas, a truth-table entailment oracle and finite universes.

Grammar accepted by :func:`parse_formula` (lowest precedence first)::

    disj := conj ('|' conj)*
    conj := unary ('&' unary)*
    unary := '~' unary | atom | 'true' | 'false' | '(' disj ')'

Entailment is decided by enumerating every valuation of the atoms involved,
so it is only usable up to :data:`MAX_ATOMS` atoms.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    AtomLimitError,
    CapExceededError,
    FormulaSyntaxError,
    InputError,
    UniverseError,
    UnknownAtomError,
)

MAX_ATOMS = 20
RESERVED = frozenset({"true", "false"})
IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

# binding strength used by the printer
_PREC_OR, _PREC_AND, _PREC_NOT = 1, 2, 3


class Formula:
    """Base class for formula nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def atoms(self) -> frozenset[str]:
        return frozenset(n.name for n in self.walk() if isinstance(n, Atom))

    def walk(self) -> Iterator[Formula]:
        yield self
        for child in self.children():
            yield from child.walk()

    def children(self) -> tuple[Formula, ...]:
        return ()

    def depth(self) -> int:
        return 1 + max((c.depth() for c in self.children()), default=0)

    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def evaluate(self, valuation: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def truth_table(self, atoms: Sequence[str]) -> np.ndarray:
        """Boolean vector of length 2**len(atoms); row k assigns bit i of k to atoms[i]."""
        columns = _atom_columns(tuple(atoms))
        return self._table(columns, 1 << len(atoms))

    def _table(self, columns: dict[str, np.ndarray], n_rows: int) -> np.ndarray:
        raise NotImplementedError

    def __invert__(self) -> Formula:
        return Not(self)

    def __and__(self, other: Formula) -> Formula:
        return And(self, other)

    def __or__(self, other: Formula) -> Formula:
        return Or(self, other)

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True, eq=True, repr=False)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not IDENTIFIER.fullmatch(self.name) or self.name in RESERVED:
            raise InputError(f"invalid atom name {self.name!r}")

    def evaluate(self, valuation):
        try:
            return bool(valuation[self.name])
        except KeyError:
            raise UnknownAtomError(f"valuation does not cover atom {self.name!r}") from None

    def _table(self, columns, n_rows):
        try:
            return columns[self.name]
        except KeyError:
            raise UnknownAtomError(f"unknown atom {self.name!r}") from None

    def __repr__(self):
        return f"Atom({self.name!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Top(Formula):
    def evaluate(self, valuation):
        return True

    def _table(self, columns, n_rows):
        return np.ones(n_rows, dtype=bool)

    def __repr__(self):
        return "Top()"


@dataclass(frozen=True, eq=True, repr=False)
class Bot(Formula):
    def evaluate(self, valuation):
        return False

    def _table(self, columns, n_rows):
        return np.zeros(n_rows, dtype=bool)

    def __repr__(self):
        return "Bot()"


@dataclass(frozen=True, eq=True, repr=False)
class Not(Formula):
    child: Formula

    def children(self):
        return (self.child,)

    def evaluate(self, valuation):
        return not self.child.evaluate(valuation)

    def _table(self, columns, n_rows):
        return ~self.child._table(columns, n_rows)

    def __repr__(self):
        return f"Not({self.child!r})"


@dataclass(frozen=True, eq=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def evaluate(self, valuation):
        return self.left.evaluate(valuation) and self.right.evaluate(valuation)

    def _table(self, columns, n_rows):
        return self.left._table(columns, n_rows) & self.right._table(columns, n_rows)

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def evaluate(self, valuation):
        return self.left.evaluate(valuation) or self.right.evaluate(valuation)

    def _table(self, columns, n_rows):
        return self.left._table(columns, n_rows) | self.right._table(columns, n_rows)

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


TOP = Top()
BOT = Bot()


def _precedence(f: Formula) -> int:
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    return _PREC_NOT


def _show(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Not):
        inner = _show(f.child)
        return "~" + (inner if _precedence(f.child) == _PREC_NOT else f"({inner})")
    op = " & " if isinstance(f, And) else " | "
    prec = _precedence(f)
    left = _show(f.left)
    right = _show(f.right)
    # left-associative: an equal-precedence right operand keeps its parentheses
    if _precedence(f.left) < prec:
        left = f"({left})"
    if _precedence(f.right) <= prec:
        right = f"({right})"
    return left + op + right


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[~&|()])|(?P<bad>\S))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:  # only trailing whitespace is left
                break
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), self._byte_offset(m.start(kind))))
            pos = m.end()
        self.end_offset = self._byte_offset(len(text))
        self.i = 0

    def _byte_offset(self, char_index: int) -> int:
        return len(self.text[:char_index].encode("utf-8"))

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def fail(self, expected: str):
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError(self.end_offset, expected)
        raise FormulaSyntaxError(tok[2], expected, tok[1])

    def accept(self, value: str) -> bool:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] == value:
            self.i += 1
            return True
        return False

    def parse(self) -> Formula:
        f = self.disj()
        if self.peek() is not None:
            self.fail("'&', '|' or end of input")
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.accept("|"):
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.accept("~"):
            return Not(self.unary())
        if self.accept("("):
            f = self.disj()
            if not self.accept(")"):
                self.fail("')'")
            return f
        tok = self.peek()
        if tok is not None and tok[0] == "ident":
            self.i += 1
            if tok[1] == "true":
                return TOP
            if tok[1] == "false":
                return BOT
            return Atom(tok[1])
        self.fail("atom, 'true', 'false', '~' or '('")


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a formula.

    >>> parse_formula("p & q | r")
    Or(And(Atom('p'), Atom('q')), Atom('r'))
    """
    return _Parser(text).parse()


def as_formula(f: Formula | str) -> Formula:
    return parse_formula(f) if isinstance(f, str) else f


# ---------------------------------------------------------------------------
# truth tables


_column_cache: dict[tuple[str, ...], dict[str, np.ndarray]] = {}


def _atom_columns(atoms: tuple[str, ...]) -> dict[str, np.ndarray]:
    if len(atoms) > MAX_ATOMS:
        raise AtomLimitError(f"{len(atoms)} atoms exceeds the truth-table limit of {MAX_ATOMS}")
    if len(set(atoms)) != len(atoms):
        raise InputError(f"duplicate atoms in {list(atoms)}")
    cols = _column_cache.get(atoms)
    if cols is None:
        rows = np.arange(1 << len(atoms), dtype=np.int64)
        cols = {a: ((rows >> i) & 1).astype(bool) for i, a in enumerate(atoms)}
        for c in cols.values():
            c.flags.writeable = False
        if len(_column_cache) < 64:
            _column_cache[atoms] = cols
    return cols


def valuations(atoms: Sequence[str]) -> Iterator[dict[str, bool]]:
    """Every valuation of ``atoms``, in the same row order as truth tables."""
    for k in range(1 << len(atoms)):
        yield {a: bool((k >> i) & 1) for i, a in enumerate(atoms)}


def _check_atoms(formulas: Iterable[Formula], atoms: Sequence[str]) -> None:
    known = set(atoms)
    for f in formulas:
        missing = f.atoms() - known
        if missing:
            raise UnknownAtomError(f"formula {f} uses undeclared atoms {sorted(missing)}")


def entails(u: Formula, v: Formula, atoms: Sequence[str]) -> bool:
    """True iff every valuation satisfying ``u`` satisfies ``v``."""
    _check_atoms((u, v), atoms)
    tu, tv = u.truth_table(atoms), v.truth_table(atoms)
    return not np.any(tu & ~tv)


def equivalent(u: Formula, v: Formula, atoms: Sequence[str]) -> bool:
    _check_atoms((u, v), atoms)
    return bool(np.array_equal(u.truth_table(atoms), v.truth_table(atoms)))


def satisfiable(u: Formula, atoms: Sequence[str]) -> bool:
    _check_atoms((u,), atoms)
    return bool(np.any(u.truth_table(atoms)))


# ---------------------------------------------------------------------------
# universes


@dataclass(frozen=True, eq=False)
class Universe:
    """A finite ordered set of formulas with its cached entailment matrix.

    ``entail_matrix[i, j]`` is True iff ``formulas[i]`` entails ``formulas[j]``.
    By default the universe must contain a tautology and a contradiction;
    pass ``require_constants=False`` to relax that.
    """

    formulas: tuple[Formula, ...]
    atoms: tuple[str, ...]
    require_constants: bool = True
    tables: np.ndarray = field(init=False, repr=False)
    entail_matrix: np.ndarray = field(init=False, repr=False)
    digest: str = field(init=False, repr=False)

    def __post_init__(self):
        formulas = tuple(as_formula(f) for f in self.formulas)
        atoms = tuple(self.atoms)
        object.__setattr__(self, "formulas", formulas)
        object.__setattr__(self, "atoms", atoms)
        for a in atoms:
            if not IDENTIFIER.fullmatch(a) or a in RESERVED:
                raise InputError(f"invalid atom name {a!r}")
        _check_atoms(formulas, atoms)
        seen: dict[Formula, int] = {}
        for i, f in enumerate(formulas):
            if f in seen:
                raise UniverseError(f"formula {f} appears twice (indices {seen[f]} and {i})")
            seen[f] = i
        object.__setattr__(self, "_index", seen)

        columns = _atom_columns(atoms)
        n_rows = 1 << len(atoms)
        tables = np.array([f._table(columns, n_rows) for f in formulas], dtype=bool)
        tables = tables.reshape(len(formulas), n_rows)
        # i entails j iff no row has i true and j false
        t = tables.astype(np.float32)
        counterexamples = t @ (1.0 - t).T
        entail = counterexamples == 0
        tables.flags.writeable = False
        entail.flags.writeable = False
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "entail_matrix", entail)

        payload = json.dumps({"atoms": list(atoms), "formulas": [str(f) for f in formulas]})
        object.__setattr__(self, "digest", hashlib.sha256(payload.encode()).hexdigest())

        if self.require_constants:
            if not np.any(np.all(tables, axis=1)):
                raise UniverseError("universe has no member equivalent to true")
            if not np.any(~np.any(tables, axis=1)):
                raise UniverseError("universe has no member equivalent to false")

    def __len__(self) -> int:
        return len(self.formulas)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def __contains__(self, f: object) -> bool:
        return f in self._index

    def index(self, f: Formula | str) -> int:
        f = as_formula(f)
        try:
            return self._index[f]
        except KeyError:
            raise UniverseError(f"{f} is not a member of the universe") from None

    def same_as(self, other: Universe) -> bool:
        return self is other or self.digest == other.digest

    def table_of(self, u: Formula) -> np.ndarray:
        _check_atoms((u,), self.atoms)
        return u.truth_table(self.atoms)

    def down_mask(self, u: Formula) -> np.ndarray:
        """Boolean mask over members: True where the member entails ``u``."""
        tu = self.table_of(u)
        return ~np.any(self.tables & ~tu, axis=1)

    def satisfiable_mask(self) -> np.ndarray:
        return np.any(self.tables, axis=1)

    def entails(self, i: int, j: int) -> bool:
        return bool(self.entail_matrix[i, j])

    def to_json(self) -> dict:
        return {"atoms": list(self.atoms), "formulas": [str(f) for f in self.formulas]}


def down_set(u: Formula | str, universe: Universe) -> frozenset[int]:
    """Indices of the members of ``universe`` that entail ``u``."""
    mask = universe.down_mask(as_formula(u))
    return frozenset(int(i) for i in np.flatnonzero(mask))


def close_universe(
    seeds: Sequence[Formula | str],
    depth: int,
    cap: int,
    atoms: Sequence[str] | None = None,
    truncate: bool = False,
) -> Universe:
    """Build a universe from ``seeds`` closed under the connectives up to ``depth``.

    Generation order is ``true``, ``false``, the seeds, then each nesting level
    in turn. Within a level, negations of the previous level come first, then
    ``f & g`` and ``f | g`` for every pair ``f`` before ``g`` in generation
    order where at least one operand is from the previous level. Syntactic
    duplicates are dropped. If more than ``cap`` formulas would result, a
    :class:`CapExceededError` is raised, or the list is cut at ``cap`` when
    ``truncate`` is set.
    """
    if depth < 0:
        raise InputError("depth must be nonnegative")
    seeds = [as_formula(s) for s in seeds]
    if cap < len(seeds) + 2:
        raise InputError(f"cap {cap} is smaller than the seeds plus true and false")
    if atoms is None:
        atoms = sorted(set().union(*(s.atoms() for s in seeds)))

    out: list[Formula] = []
    seen: set[Formula] = set()

    def emit(f: Formula) -> bool:
        if f in seen:
            return False
        seen.add(f)
        out.append(f)
        return True

    emit(TOP)
    emit(BOT)
    pool: list[Formula] = []
    frontier: list[Formula] = []
    for s in seeds:
        if emit(s) and not isinstance(s, (Top, Bot)):
            frontier.append(s)

    for _ in range(depth):
        old = pool
        pool = old + frontier
        fresh: list[Formula] = []
        for f in frontier:
            g = Not(f)
            if emit(g):
                fresh.append(g)
        n_old = len(old)
        for i, j in itertools.combinations(range(len(pool)), 2):
            if j < n_old:
                continue
            for g in (And(pool[i], pool[j]), Or(pool[i], pool[j])):
                if emit(g):
                    fresh.append(g)
        frontier = fresh

    if len(out) > cap:
        if not truncate:
            raise CapExceededError(cap, len(out))
        out = out[:cap]
    return Universe(tuple(out), tuple(atoms))


def universe_from_json(obj: Mapping) -> Universe:
    try:
        atoms = obj["atoms"]
        texts = obj["formulas"]
    except (KeyError, TypeError):
        raise InputError('universe JSON needs "atoms" and "formulas" lists') from None
    if not isinstance(atoms, list) or not isinstance(texts, list):
        raise InputError('"atoms" and "formulas" must be lists')
    return Universe(tuple(parse_formula(t) for t in texts), tuple(atoms))


def load_universe(path: str | Path) -> Universe:
    return universe_from_json(read_json(path))


def read_json(path: str | Path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
