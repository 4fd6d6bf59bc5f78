"""Graded entailment between word sequences.

The functional ``phi`` reads only the empty context: it weights each
universe member ``l`` by ``P(l)`` and by the size of the operator's action on
``e_l``, which for a diagonal operator is ``|diag[l]|``. The degree to which
``x`` entails ``y`` is ``phi(x ^ y) / phi(x)`` with the component-wise meet.

The Monte-Carlo estimator samples members ``l`` from ``P`` and evaluates
both diagonals exactly at the sampled members. Its random stream is
numpy's Philox-4x64 counter-based generator. Samples are drawn in fixed
blocks of :data:`MC_BLOCK`; block ``k`` uses Philox key ``seed + k * 2**64``,
so the result does not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .context_algebra import EMPTY_CONTEXT, ContextFunction, GeneralLanguage, cf_meet, to_str
from .errors import EstimationError, InputError, NoLogicalContentError, UniverseMismatchError
from .logic import Universe, parse_formula, read_json
from .semantics import Lexicon, NegativeWeightWarning, sentence_vector

log = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-9
MC_BLOCK = 8192


@dataclass(frozen=True, eq=False)
class Distribution:
    universe: Universe
    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (len(self.universe),):
            raise InputError(f"distribution has {p.size} entries, universe has {len(self.universe)}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InputError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > SIMPLEX_TOL:
            raise InputError(f"probabilities sum to {p.sum():.12g}, not 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, universe: Universe) -> Distribution:
        n = len(universe)
        return cls(universe, np.full(n, 1.0 / n))

    @classmethod
    def from_mapping(cls, universe: Universe, probs: Mapping[str, float]) -> Distribution:
        """Probabilities keyed by member formula text; the rest share the leftover mass."""
        p = np.full(len(universe), np.nan)
        for text, value in probs.items():
            i = universe.index(parse_formula(text))
            if not np.isnan(p[i]):
                raise InputError(f"member {text!r} listed twice")
            p[i] = float(value)
        unlisted = np.isnan(p)
        listed_mass = float(np.sum(p[~unlisted]))
        if unlisted.any():
            p[unlisted] = (1.0 - listed_mass) / unlisted.sum()
        return cls(universe, p)


@dataclass
class DegreeResult:
    degree: float
    numerator: float
    denominator: float
    mode: str
    samples: int | None = None
    seed: int | None = None
    stderr: float | None = None

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None or k in ("degree", "mode")}


def _empty_context_diag(f: ContextFunction, P: Distribution) -> np.ndarray:
    if f.space.is_scalar:
        raise InputError("phi needs an operator-valued context function")
    if not f.space.universe.same_as(P.universe):
        raise UniverseMismatchError("context function and distribution use different universes")
    return f.raw(EMPTY_CONTEXT)


def phi(f: ContextFunction, P: Distribution) -> float:
    """``sum_l P(l) * |f(eps, eps)[l]|``; other contexts are ignored."""
    return float(np.dot(P.probs, np.abs(_empty_context_diag(f, P))))


def _sentence_functions(x, y, lex: Lexicon, L: GeneralLanguage) -> tuple[ContextFunction, ContextFunction]:
    fx = sentence_vector(x, lex, L).function
    fy = sentence_vector(y, lex, L).function
    return fx, cf_meet(fx, fy)


def _words_used(x, y) -> set[str]:
    return set(to_str(x)) | set(to_str(y))


def _has_negative(lex: Lexicon, words: set[str]) -> bool:
    return any(w < 0 for word in words for w in lex.weights(word).values())


def degree_exact(
    x: Sequence[str] | str,
    y: Sequence[str] | str,
    lex: Lexicon,
    L: GeneralLanguage,
    P: Distribution | None = None,
) -> DegreeResult:
    """Degree to which the word sequence ``x`` entails ``y``."""
    if P is None:
        P = Distribution.uniform(L.space.universe)
    if _has_negative(lex, _words_used(x, y)):
        warnings.warn("negative lexicon weights: the degree may fall outside [0, 1]", NegativeWeightWarning, stacklevel=2)
    fx, fm = _sentence_functions(x, y, lex, L)
    den = phi(fx, P)
    num = phi(fm, P)
    if den <= 0.0:
        raise NoLogicalContentError("x has no logical content under L (phi(x) = 0)")
    return DegreeResult(num / den, num, den, "exact")


def _block_draws(P: Distribution, seed: int, block: int, size: int) -> np.ndarray:
    key = (seed % 2**64) + block * 2**64
    rng = np.random.Generator(np.random.Philox(key=key))
    return rng.choice(len(P.probs), size=size, p=P.probs)


def degree_mc(
    x: Sequence[str] | str,
    y: Sequence[str] | str,
    lex: Lexicon,
    L: GeneralLanguage,
    P: Distribution | None = None,
    samples: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> DegreeResult:
    """Estimate the degree by sampling universe members from ``P``.

    Returns the ratio of summed meet values to summed ``x`` values over the
    sample, with a jackknife standard error.
    """
    if samples < 1:
        raise InputError("samples must be at least 1")
    if seed < 0:
        raise InputError("seed must be nonnegative")
    if P is None:
        P = Distribution.uniform(L.space.universe)
    if _has_negative(lex, _words_used(x, y)):
        raise InputError("Monte-Carlo estimation requires nonnegative lexicon weights")
    fx, fm = _sentence_functions(x, y, lex, L)
    dx_all = np.abs(_empty_context_diag(fx, P))
    dm_all = np.abs(_empty_context_diag(fm, P))

    n_blocks = math.ceil(samples / MC_BLOCK)
    sizes = [min(MC_BLOCK, samples - k * MC_BLOCK) for k in range(n_blocks)]

    def run(k: int) -> np.ndarray:
        return _block_draws(P, seed, k, sizes[k])

    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            draws = list(pool.map(run, range(n_blocks)))
    else:
        draws = [run(k) for k in range(n_blocks)]
    idx = np.concatenate(draws)

    dx = dx_all[idx]
    dm = dm_all[idx]
    sx, sm = float(dx.sum()), float(dm.sum())
    if sx <= 0.0:
        raise EstimationError(f"all {samples} sampled members give phi(x) = 0; cannot estimate")
    return DegreeResult(sm / sx, sm / samples, sx / samples, "mc", samples, seed, _jackknife(dx, dm))


def _jackknife(dx: np.ndarray, dm: np.ndarray) -> float:
    n = dx.size
    if n < 2:
        return float("nan")
    loo_den = dx.sum() - dx
    if np.any(loo_den <= 0):
        return float("nan")
    loo = (dm.sum() - dm) / loo_den
    return float(math.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def distribution_from_json(obj: Mapping, universe: Universe) -> Distribution:
    probs = obj.get("probs") if isinstance(obj, Mapping) else None
    if not isinstance(probs, dict):
        raise InputError('distribution JSON needs a "probs" object')
    return Distribution.from_mapping(universe, probs)


def load_distribution(path: str | Path, universe: Universe) -> Distribution:
    return distribution_from_json(read_json(path), universe)
