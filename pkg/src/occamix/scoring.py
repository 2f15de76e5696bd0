"""
Simplicity x accuracy scores and Bayesian model averaging weights.

Two weightings are computed over the same finite pool:

* the simplicity-weighted score ``simplicity(h) * accuracy(h)``, normalised
  over the pool, where simplicity maps token length linearly onto [floor, 1];
* the BMA posterior under a categorical noise model in which each cell is
  reproduced with probability ``1 - eps`` and otherwise takes one of the
  other ``K - 1`` colours uniformly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dsl import Hypothesis, apply_program, program_length, token_length
from .grid import AccuracyPolicy, Connectivity, Grid, aggregate_accuracy, cell_counts

logger = logging.getLogger(__name__)

DEFAULT_FLOOR = 0.05
DEFAULT_EPSILON = 0.1
DEFAULT_NUM_COLORS = 10


class ScoringError(ValueError):
    pass


class EmptyPool(ScoringError):
    pass


class LengthMismatch(ScoringError):
    pass


class NegativeScore(ScoringError):
    pass


class EmptyData(ScoringError):
    pass


class InvalidPrior(ScoringError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    epsilon: float = DEFAULT_EPSILON
    num_colors: int = DEFAULT_NUM_COLORS

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.num_colors < 2:
            raise ValueError(f"num_colors must be at least 2, got {self.num_colors}")


def simplicity_scores(lengths: Sequence[int], floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Map token lengths onto ``[floor, 1]``, shortest -> 1, longest -> floor.

    ``floor=0`` gives the unclipped linear map. A pool whose lengths are all
    equal gets simplicity 1 everywhere.
    """
    L = np.asarray(lengths, dtype=float)
    if L.size == 0:
        raise EmptyPool("simplicity needs at least one hypothesis")
    if not 0.0 <= floor <= 1.0:
        raise ValueError(f"floor must lie in [0, 1], got {floor}")
    lo, hi = L.min(), L.max()
    if hi == lo:
        return np.ones_like(L)
    s = 1.0 - (L - lo) / (hi - lo)
    return np.clip(s, floor, 1.0)


def solomonoff_scores(simplicities: Sequence[float], accuracies: Sequence[float]) -> np.ndarray:
    s = np.asarray(simplicities, dtype=float)
    a = np.asarray(accuracies, dtype=float)
    if s.shape != a.shape:
        raise LengthMismatch(f"{s.size} simplicities vs {a.size} accuracies")
    if s.size == 0:
        raise EmptyPool("no scores to combine")
    for name, v in (("simplicity", s), ("accuracy", a)):
        if np.any((v < 0) | (v > 1)) or not np.all(np.isfinite(v)):
            raise ValueError(f"{name} values must lie in [0, 1]")
    return s * a


def normalize_weights(raw: Sequence[float]) -> tuple[np.ndarray, bool]:
    """Divide by the total.

    Returns ``(weights, degenerate)``. When every score is zero the result
    is the uniform distribution and ``degenerate`` is True.
    """
    x = np.asarray(raw, dtype=float)
    if x.size == 0:
        raise EmptyPool("cannot normalise an empty pool")
    if not np.all(np.isfinite(x)):
        raise ValueError("scores must be finite")
    if np.any(x < 0):
        raise NegativeScore("scores must be nonnegative")
    total = x.sum()
    if total == 0:
        logger.warning("all scores are zero; falling back to uniform weights")
        return np.full(x.size, 1.0 / x.size), True
    return x / total, False


def bma_log_likelihood(n_correct: int, n_wrong: int, noise: NoiseModel = NoiseModel()) -> float:
    if n_correct < 0 or n_wrong < 0:
        raise ValueError("cell counts must be nonnegative")
    if n_correct == 0 and n_wrong == 0:
        raise EmptyData("no cells to score")
    eps, K = noise.epsilon, noise.num_colors
    return n_correct * math.log1p(-eps) + n_wrong * (math.log(eps) - math.log(K - 1))


def bma_weights(log_likelihoods: Sequence[float], prior: Sequence[float] | None = None) -> np.ndarray:
    """Posterior weights from log-likelihoods, stabilised by max subtraction.

    ``prior`` defaults to uniform.
    """
    ll = np.asarray(log_likelihoods, dtype=float)
    if ll.size == 0:
        raise EmptyPool("no log-likelihoods")
    if prior is None:
        log_prior = np.full(ll.size, -math.log(ll.size))
    else:
        p = np.asarray(prior, dtype=float)
        if p.shape != ll.shape:
            raise LengthMismatch(f"{ll.size} log-likelihoods vs {p.size} prior entries")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise InvalidPrior("prior must be nonnegative and sum to 1")
        with np.errstate(divide="ignore"):
            log_prior = np.log(p)
    z = ll + log_prior
    m = z.max()
    if not np.isfinite(m):
        raise InvalidPrior("prior puts no mass on any hypothesis with finite likelihood")
    e = np.exp(z - m)
    return e / e.sum()


def weight_entropy(weights: Sequence[float]) -> float:
    """Shannon entropy of a weight vector, in nats."""
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(-(w * np.log(w)).sum())


# ---------------------------------------------------------------------------
# pool scoring


@dataclass(frozen=True)
class ScoreBreakdown:
    hypothesis_id: str
    description: str
    length: int
    program_length: int
    simplicity: float
    accuracy: float
    raw_score: float
    solomonoff_weight: float
    n_correct: int
    n_wrong: int
    bma_log_likelihood: float
    bma_weight: float


@dataclass(frozen=True)
class ScoredPool:
    """Ranked breakdowns plus pool-level flags.

    ``breakdowns`` are sorted; ``order`` maps each rank back to the index in
    the input pool.
    """

    breakdowns: tuple[ScoreBreakdown, ...]
    order: tuple[int, ...]
    degenerate_uniform: bool = False
    warnings: tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.breakdowns)

    def __iter__(self):
        return iter(self.breakdowns)

    def __getitem__(self, i):
        return self.breakdowns[i]

    def weights_in_pool_order(self, method: str) -> np.ndarray:
        attr = {"solomonoff": "solomonoff_weight", "bma": "bma_weight"}[method]
        w = np.empty(len(self.breakdowns))
        for rank, idx in enumerate(self.order):
            w[idx] = getattr(self.breakdowns[rank], attr)
        return w


def rank_key(b: ScoreBreakdown):
    return (-b.solomonoff_weight, -b.accuracy, b.length, b.hypothesis_id)


def score_pool(hypotheses: Sequence[Hypothesis],
               train_pairs: Sequence[tuple[Grid, Grid]],
               policy: AccuracyPolicy = AccuracyPolicy.ALL_CELLS,
               noise: NoiseModel = NoiseModel(),
               floor: float = DEFAULT_FLOOR,
               connectivity: Connectivity = Connectivity.FOUR) -> ScoredPool:
    """Score every hypothesis on the training pairs with both methods.

    Accuracy pools matched cells over all training outputs, and the BMA
    likelihood counts the same cells, so both methods see identical data.
    """
    if len(hypotheses) == 0:
        raise EmptyPool("hypothesis pool is empty")
    if len(train_pairs) == 0:
        raise EmptyData("need at least one training pair")

    lengths, prog_lengths, accs, ncorrect, nwrong = [], [], [], [], []
    for h in hypotheses:
        counts = [cell_counts(apply_program(h.program, x, connectivity), y, policy)
                  for x, y in train_pairs]
        m = sum(c[0] for c in counts)
        t = sum(c[1] for c in counts)
        accs.append(aggregate_accuracy(counts))
        ncorrect.append(m)
        nwrong.append(t - m)
        lengths.append(token_length(h))
        prog_lengths.append(program_length(h.program))

    simp = simplicity_scores(lengths, floor)
    raw = solomonoff_scores(simp, accs)
    sol_w, degenerate = normalize_weights(raw)
    warnings = ["DegenerateUniform"] if degenerate else []

    if all(m + w == 0 for m, w in zip(ncorrect, nwrong)):
        # nothing counted under the policy: likelihood is flat
        warnings.append("EmptyLikelihood")
        ll = [0.0] * len(hypotheses)
    else:
        ll = [bma_log_likelihood(m, w, noise) if m + w else 0.0
              for m, w in zip(ncorrect, nwrong)]
    bma_w = bma_weights(ll)

    rows = [
        ScoreBreakdown(
            hypothesis_id=h.id,
            description=h.description,
            length=lengths[i],
            program_length=prog_lengths[i],
            simplicity=float(simp[i]),
            accuracy=float(accs[i]),
            raw_score=float(raw[i]),
            solomonoff_weight=float(sol_w[i]),
            n_correct=ncorrect[i],
            n_wrong=nwrong[i],
            bma_log_likelihood=float(ll[i]),
            bma_weight=float(bma_w[i]),
        )
        for i, h in enumerate(hypotheses)
    ]
    order = sorted(range(len(rows)), key=lambda i: rank_key(rows[i]))
    return ScoredPool(tuple(rows[i] for i in order), tuple(order), degenerate, tuple(warnings))
