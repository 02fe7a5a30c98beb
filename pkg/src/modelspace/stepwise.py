"""Forward-stepwise prior calculus over inclusion paths.

A size-k prior on models can be represented generatively: starting from the
empty path, either stop (with a length-dependent stopping probability) or add
one more uniformly chosen unused predictor.  The stopping probabilities fully
determine the induced prior on model size, and exchangeability makes every
path of the same length equally likely.

The stopping schedule of a PathHolm or SubsetHolm family has a closed form;
any other exchangeable family enters through inversion of the induced-size
identity  pi(k|p) = prod_{l<k} (1 - Q_l) * Q_k.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .priors import (
    Model,
    PathHolm,
    PriorFamily,
    SubsetHolm,
    log_comb,
    size_log_pmf,
)

__all__ = [
    "Path",
    "StoppingSchedule",
    "ScheduleInversionError",
    "stopping_schedule",
    "induced_size_log_pmf",
    "path_log_prob",
    "model_log_prob_closed",
    "model_log_prob_bruteforce",
    "sample_model",
]

#: largest model size accepted by the permutation-sum oracle (k! paths)
BRUTEFORCE_MAX_SIZE = 9


class ScheduleInversionError(ValueError):
    """A size prior that cannot be written as a stopping schedule."""


@dataclass(frozen=True)
class Path:
    """An ordered, duplicate-free tuple of predictor indices in [1, p]."""

    indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if len(set(idx)) != len(idx):
            raise ValueError(f"repeated indices in path: {idx}")
        if idx and (min(idx) < 1 or max(idx) > self.p):
            raise ValueError(f"path indices {idx} out of range [1, {self.p}]")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class StoppingSchedule:
    """Per-length stopping probabilities for inclusion paths.

    Parameters
    ----------
    q_stop : array of shape (p + 1,)
        Entry k is the probability that a length-k path stops instead of
        adding another predictor.  The final entry must be 1: a full path
        has nothing left to add.
    p : int
        Ambient number of predictors.
    """

    q_stop: np.ndarray
    p: int
    _log_q: np.ndarray = field(init=False, repr=False, compare=False)
    _log_continue: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        q = np.asarray(self.q_stop, dtype=float)
        if q.shape != (self.p + 1,):
            raise ValueError(f"q_stop must have shape ({self.p + 1},), got {q.shape}")
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("stopping probabilities must lie in [0, 1]")
        if abs(q[self.p] - 1.0) > 1e-12:
            raise ValueError(f"q_stop[p] must be 1, got {q[self.p]!r}")
        q = q.copy()
        q[self.p] = 1.0
        q.flags.writeable = False
        with np.errstate(divide="ignore"):
            log_q = np.log(q)
            log_cont = np.log1p(-q)
        object.__setattr__(self, "q_stop", q)
        object.__setattr__(self, "_log_q", log_q)
        object.__setattr__(self, "_log_continue", log_cont)


def stopping_schedule(family: PriorFamily, p: int) -> StoppingSchedule:
    """Stopping schedule whose induced size prior matches the family.

    PathHolm and SubsetHolm use their closed-form stopping probabilities;
    every other family is inverted from its size pmf via
    Q_k = pi(k|p) / (1 - sum_{l<k} pi(l|p)), with the final entry forced
    to 1.

    Raises
    ------
    ScheduleInversionError
        If pi(k|p) = 0 at some k with positive mass above k; such a prior
        has no stopping-schedule representation here.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if isinstance(family, PathHolm):
        q = np.full(p + 1, 1.0 - family.alpha)
        q[p] = 1.0
        return StoppingSchedule(q, p)
    if isinstance(family, SubsetHolm):
        k = np.arange(p + 1, dtype=float)
        q = (k + family.phi) / (k + family.phi + family.theta)
        q[p] = 1.0
        return StoppingSchedule(q, p)

    lp = size_log_pmf(family, p)
    support = lp > -math.inf
    if not support.all():
        dead = np.flatnonzero(~support)
        if np.any(support[dead[0] :]):
            raise ScheduleInversionError(
                f"{family.descriptor}: pi({dead[0]}|{p}) = 0 with positive mass "
                "at larger sizes; no stopping schedule represents this prior"
            )
    # log of the tail mass sum_{l>=k} pi(l|p), accumulated from the top
    log_tail = np.logaddexp.accumulate(lp[::-1])[::-1]
    with np.errstate(invalid="ignore"):
        q = np.exp(lp - log_tail)
    q[log_tail == -math.inf] = 1.0  # unreachable lengths
    np.clip(q, 0.0, 1.0, out=q)
    q[p] = 1.0
    return StoppingSchedule(q, p)


def induced_size_log_pmf(schedule: StoppingSchedule) -> np.ndarray:
    """Size prior induced by a schedule: log[ prod_{l<k}(1-Q_l) * Q_k ]."""
    cum = np.concatenate(([0.0], np.cumsum(schedule._log_continue[:-1])))
    return cum + schedule._log_q


def path_log_prob(schedule: StoppingSchedule, path: Path) -> float:
    """Log probability of an inclusion path, including its stopping step.

    Each continuation multiplies by (1 - Q_l) / (p - l): the path must not
    stop, then picks one of the p - l unused predictors uniformly.
    """
    if path.p != schedule.p:
        raise ValueError(f"path has p={path.p}, schedule has p={schedule.p}")
    k = len(path)
    p = schedule.p
    steps = sum(
        schedule._log_continue[ell] - math.log(p - ell) for ell in range(k)
    )
    return float(steps + schedule._log_q[k])


def model_log_prob_closed(schedule: StoppingSchedule, k: int) -> float:
    """Log prior mass of any single size-k model under the schedule.

    Exchangeability splits the size mass evenly over the C(p, k) models:
    log pi(k|p) - log C(p, k).
    """
    if not 0 <= k <= schedule.p:
        raise ValueError(f"k must satisfy 0 <= k <= p, got k={k}, p={schedule.p}")
    cum = float(np.sum(schedule._log_continue[:k]))
    return cum + float(schedule._log_q[k]) - log_comb(schedule.p, k)


def model_log_prob_bruteforce(schedule: StoppingSchedule, model: Model) -> float:
    """Permutation-sum oracle: log sum of path probabilities over all k!
    orderings of the model.

    Exists to cross-check :func:`model_log_prob_closed`; refuses models larger
    than ``BRUTEFORCE_MAX_SIZE``.
    """
    if model.p != schedule.p:
        raise ValueError(f"model has p={model.p}, schedule has p={schedule.p}")
    k = model.size
    if k > BRUTEFORCE_MAX_SIZE:
        raise ValueError(
            f"brute-force oracle refuses |A| = {k} > {BRUTEFORCE_MAX_SIZE}"
        )
    if k == 0:
        return path_log_prob(schedule, Path((), schedule.p))
    terms = [
        path_log_prob(schedule, Path(perm, schedule.p))
        for perm in itertools.permutations(model.indices)
    ]
    return float(logsumexp(terms))


def sample_model(schedule: StoppingSchedule, rng: np.random.Generator) -> Model:
    """Draw one model generatively from the schedule.

    At length k the path stops with probability Q_k; otherwise one uniformly
    chosen unused predictor joins.  The resulting size follows the induced
    size prior, and given its size the subset is uniform.
    """
    p = schedule.p
    q = schedule.q_stop
    remaining = list(range(1, p + 1))
    chosen = []
    for k in range(p + 1):
        if rng.random() < q[k]:
            break
        pick = int(rng.integers(0, p - k))
        chosen.append(remaining.pop(pick))
    return Model(tuple(chosen), p)
