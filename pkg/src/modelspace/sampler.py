"""Metropolis-Hastings over model space with symmetric proposal kernels.

States are predictor subsets; the stationary law is proportional to
BF(model) * prior(model) with the Zellner-Siow Bayes factor against the null
and any size-based family from :mod:`modelspace.priors` spread exchangeably
over subsets.  Three kernels are mixed per step:

- ``flip``: toggle one predictor chosen uniformly from all p,
- ``swap``: exchange one included predictor for one excluded (identity at
  the empty and full models),
- ``replace_same_size``: redraw a uniform subset of the current size.

All three are symmetric, so the log proposal ratio is identically zero and
acceptance reduces to the posterior log-odds.  The hot loop works on sorted
index tuples and caches fits at two levels: model -> (rank, rounded R^2),
then (rank, rounded R^2) -> log BF.  R^2 is rounded to 14 significant digits
before the Bayes factor is evaluated, so cached and uncached runs of the same
seed produce bit-identical chains.

Saturated fits (R^2 = 1 below the residual dimension) carry a +inf log BF:
moves into them always accept, moves out always reject, and moves between two
saturated models fall back to the prior ratio alone.
"""

from __future__ import annotations

import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .bayes_factor import Dataset, fit_stats, log_bf_zellner_siow
from .priors import Model, PriorFamily, size_log_pmf

__all__ = [
    "ChainConfig",
    "ChainState",
    "FitCache",
    "PosteriorSummary",
    "PosteriorMetrics",
    "KERNELS",
    "propose",
    "make_chain_state",
    "mh_step",
    "run_chain",
    "summarize",
]

KERNELS = ("flip", "swap", "replace_same_size")


@dataclass
class FitCache:
    """Two-level fit memo for one dataset.

    Bayes factors depend on the data alone, not the prior, so a single cache
    can serve every chain run on the same dataset.
    """

    stats_by_model: dict = field(default_factory=dict)
    bf_by_stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ChainConfig:
    """Run-length, kernel mixture, and mode switches for one chain.

    burn_in of None means draws // 10.  prior_only forces every log Bayes
    factor to zero so the chain targets the model prior itself; use_cache
    turns the fit/BF memo off (same chain, recomputed every step).
    """

    draws: int = 1_000_000
    burn_in: Optional[int] = None
    kernel_weights: tuple = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    seed: int = 0
    initial_model: Optional[Model] = None
    prior_only: bool = False
    use_cache: bool = True

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError(f"draws must be >= 1, got {self.draws}")
        w = tuple(float(v) for v in self.kernel_weights)
        if len(w) != len(KERNELS):
            raise ValueError(f"kernel_weights must have {len(KERNELS)} entries, got {len(w)}")
        if min(w) < 0 or sum(w) <= 0:
            raise ValueError(f"kernel_weights must be nonnegative with positive sum, got {w}")
        object.__setattr__(self, "kernel_weights", w)
        burn = self.resolved_burn_in
        if not 0 <= burn < self.draws:
            raise ValueError(f"need draws > burn_in >= 0, got draws={self.draws}, burn_in={burn}")

    @property
    def resolved_burn_in(self) -> int:
        return self.draws // 10 if self.burn_in is None else self.burn_in


class ChainState:
    """Mutable Markov-chain state plus the shared evaluation context."""

    __slots__ = (
        "model",
        "log_bf",
        "log_prior",
        "p",
        "data",
        "lpm",
        "prior_only",
        "use_cache",
        "w0",
        "w01",
        "stats_by_model",
        "bf_by_stats",
        "steps",
        "accepted",
    )

    def current_model(self) -> Model:
        return Model(self.model, self.p)


def _log_model_prior_by_size(prior: PriorFamily, p: int) -> list:
    ks = np.arange(p + 1)
    log_comb = gammaln(p + 1) - gammaln(ks + 1) - gammaln(p - ks + 1)
    return [float(v) for v in size_log_pmf(prior, p) - log_comb]


def make_chain_state(
    config: ChainConfig,
    prior: PriorFamily,
    data: Dataset,
    cache: Optional[FitCache] = None,
) -> ChainState:
    """Build the initial state; the chain starts at the empty model by default.

    Pass a FitCache to share fits between chains on the same dataset (the
    cache carries no prior-dependent state).
    """
    p = data.p
    start = config.initial_model if config.initial_model is not None else Model((), p)
    if start.p != p:
        raise ValueError(f"initial_model has p = {start.p}, dataset has p = {p}")
    lpm = _log_model_prior_by_size(prior, p)
    if lpm[start.size] == -math.inf:
        raise ValueError(f"initial model of size {start.size} has zero prior mass")
    if cache is None:
        cache = FitCache()
    w = config.kernel_weights
    total = w[0] + w[1] + w[2]
    state = ChainState()
    state.p = p
    state.data = data
    state.lpm = lpm
    state.prior_only = config.prior_only
    state.use_cache = config.use_cache
    state.w0 = w[0] / total
    state.w01 = (w[0] + w[1]) / total
    state.stats_by_model = cache.stats_by_model
    state.bf_by_stats = cache.bf_by_stats
    state.steps = 0
    state.accepted = 0
    state.model = start.indices
    state.log_prior = lpm[start.size]
    state.log_bf = _model_log_bf(state, start.indices)
    return state


def _model_log_bf(state: ChainState, indices: tuple) -> float:
    """Log Bayes factor for a model key, through the two-level cache."""
    if state.prior_only:
        return 0.0
    use_cache = state.use_cache
    key = state.stats_by_model.get(indices) if use_cache else None
    if key is None:
        st = fit_stats(state.data, Model(indices, state.p))
        # 14 significant digits; collapses float dust between equivalent fits
        key = (st.effective_rank, float(f"{st.r_squared:.13e}"))
        if use_cache:
            state.stats_by_model[indices] = key
    bf = state.bf_by_stats.get(key) if use_cache else None
    if bf is None:
        if key[0] >= state.data.n - 1:
            # rank n-1 means the centered fit interpolates: saturated
            bf = math.inf
        else:
            bf = log_bf_zellner_siow(state.data.n, key[0], key[1])
        if use_cache:
            state.bf_by_stats[key] = bf
    return bf


def _propose_indices(kernel: int, cur: tuple, p: int, rng: np.random.Generator) -> tuple:
    k = len(cur)
    if kernel == 0:  # flip
        j = int(rng.integers(1, p + 1))
        if j in cur:
            return tuple(x for x in cur if x != j)
        i = bisect_left(cur, j)
        return cur[:i] + (j,) + cur[i:]
    if kernel == 1:  # swap
        if k == 0 or k == p:
            return cur
        drop = cur[int(rng.integers(0, k))]
        if 2 * k <= p:
            while True:
                add = int(rng.integers(1, p + 1))
                if add not in cur:
                    break
        else:
            pool = [x for x in range(1, p + 1) if x not in cur]
            add = pool[int(rng.integers(0, len(pool)))]
        out = [x for x in cur if x != drop]
        insort(out, add)
        return tuple(out)
    # replace_same_size
    if k == 0 or k == p:
        return cur
    sel = rng.choice(p, size=k, replace=False)
    sel.sort()
    return tuple(int(v) + 1 for v in sel)


def propose(kernel: str, current: Model, rng: np.random.Generator):
    """Draw one candidate from a named kernel.

    Returns (candidate, log_q_ratio); the ratio is 0.0 for every kernel here
    since all three are symmetric.
    """
    try:
        kid = KERNELS.index(kernel)
    except ValueError:
        raise ValueError(f"unknown kernel {kernel!r}, expected one of {KERNELS}") from None
    cand = _propose_indices(kid, current.indices, current.p, rng)
    return Model(cand, current.p), 0.0


def mh_step(state: ChainState, rng: np.random.Generator) -> bool:
    """Advance the chain one step in place; returns True on acceptance."""
    state.steps += 1
    cur = state.model
    u = rng.random()
    kernel = 0 if u < state.w0 else (1 if u < state.w01 else 2)
    cand = _propose_indices(kernel, cur, state.p, rng)
    if cand == cur:
        state.accepted += 1
        return True
    bf_c = _model_log_bf(state, cand)
    lp_c = state.lpm[len(cand)]
    bf_cur = state.log_bf
    if bf_c == bf_cur:
        delta = lp_c - state.log_prior
    elif bf_c == math.inf:
        delta = math.inf
    elif bf_cur == math.inf:
        delta = -math.inf
    else:
        delta = (bf_c + lp_c) - (bf_cur + state.log_prior)
    if delta >= 0 or rng.random() < math.exp(delta):
        state.model = cand
        state.log_bf = bf_c
        state.log_prior = lp_c
        state.accepted += 1
        return True
    return False


@dataclass
class PosteriorSummary:
    """Post-burn-in visit counts keyed by sorted index tuple."""

    counts: dict
    total: int
    p: int
    steps: int = 0
    accepted: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.steps if self.steps else math.nan

    def sorted_models(self):
        """(indices, count) pairs, highest count first, ties by size then indices."""
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], len(kv[0]), kv[0]))


@dataclass
class PosteriorMetrics:
    """Headline numbers from one chain against a known true model."""

    true_model_probability: float
    models_for_95: int
    inclusion_probabilities: np.ndarray
    inclusion_recall: float


def run_chain(
    config: ChainConfig,
    prior: PriorFamily,
    data: Dataset,
    cache: Optional[FitCache] = None,
) -> PosteriorSummary:
    """Run one chain and tabulate post-burn-in model visits.

    One Generator seeded from config.seed drives kernel choice, proposals,
    and acceptance, so a config reproduces its chain exactly.  An explicit
    FitCache lets chains with different priors on the same dataset reuse
    each other's fits; results are unchanged either way.
    """
    rng = np.random.default_rng(config.seed)
    state = make_chain_state(config, prior, data, cache)
    burn = config.resolved_burn_in
    counts: dict = {}
    step = mh_step
    for i in range(config.draws):
        step(state, rng)
        if i >= burn:
            m = state.model
            c = counts.get(m)
            counts[m] = 1 if c is None else c + 1
    return PosteriorSummary(
        counts=counts,
        total=config.draws - burn,
        p=state.p,
        steps=state.steps,
        accepted=state.accepted,
    )


def summarize(summary: PosteriorSummary, true_model: Model) -> PosteriorMetrics:
    """Reduce a visit table to the reporting metrics.

    models_for_95 is the size of the smallest head of the count-sorted model
    list holding at least 95% of the mass; the comparison is done in integers
    (20 * cumulative >= 19 * total) to keep it exact.
    """
    if true_model.p != summary.p:
        raise ValueError(f"true_model has p = {true_model.p}, summary has p = {summary.p}")
    total = summary.total
    if total <= 0:
        raise ValueError("summary has no post-burn-in draws")
    prob_true = summary.counts.get(true_model.indices, 0) / total
    cum = 0
    needed = 0
    for _, count in summary.sorted_models():
        cum += count
        needed += 1
        if 20 * cum >= 19 * total:
            break
    incl = np.zeros(summary.p)
    for indices, count in summary.counts.items():
        for j in indices:
            incl[j - 1] += count
    incl /= total
    if true_model.size:
        recall = float(np.mean(incl[[j - 1 for j in true_model.indices]]))
    else:
        recall = 1.0
    return PosteriorMetrics(
        true_model_probability=prob_true,
        models_for_95=needed,
        inclusion_probabilities=incl,
        inclusion_recall=recall,
    )
