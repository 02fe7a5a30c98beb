"""Closed-form model-space priors on subset size and on individual models.

Eight exchangeable prior families are supported.  Each family defines a
probability mass function pi(k | p) on model size k = 0..p; the prior mass
of an individual model of size k is pi(k | p) / C(p, k).

PathHolm(alpha)            pi(k|p) = (1-alpha) alpha^k,  pi(p|p) = alpha^p
SubsetHolm(phi, theta)     pi(k|p) = (k+phi)/(k+phi+theta)
                               * Gamma(phi+theta) theta^k / Gamma(k+phi+theta),
                           pi(p|p) = Gamma(phi+theta) theta^p / Gamma(p+phi+theta)
MatryoshkaDoll(omega)      truncated Poisson(1/omega) on {0..p}
BetaBinomial(a, b)         pi(k|p) = C(p,k) B(a+k, b+p-k) / B(a, b)
ScaledBetaBinomial(a, lam) Beta-Binomial with b = lam * p at evaluation time
PowerSeries(s)             pi(k|p) proportional to (1+k)^(-s); s=1 is the
                           Harmonic prior, s=2 the P-Series prior
CMG(mu, var)               pi(k|p) proportional to E[Y^(2k)] / k!
                           with Y ~ Normal(mu, var)

All mass functions are computed in log space; families without an exact
closed-form normalizer (MatryoshkaDoll, PowerSeries, CMG) are normalized
over {0..p} by log-sum-exp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

__all__ = [
    "Model",
    "PriorFamily",
    "PathHolm",
    "SubsetHolm",
    "MatryoshkaDoll",
    "BetaBinomial",
    "ScaledBetaBinomial",
    "PowerSeries",
    "CMG",
    "from_descriptor",
    "size_log_pmf",
    "log_size_prior",
    "log_model_prior",
    "children_ratio",
    "normal_even_moment",
]


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def _fmt(x: float) -> str:
    """Shortest faithful text form of a parameter value."""
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


@dataclass(frozen=True)
class Model:
    """A model: a duplicate-free sorted subset of predictor indices {1..p}.

    Parameters
    ----------
    indices : iterable of int
        Predictor indices, 1-based.  Sorted on construction.
    p : int
        Ambient number of candidate predictors.
    """

    indices: tuple
    p: int

    def __post_init__(self):
        idx = tuple(sorted(int(j) for j in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError(f"duplicate indices in model: {idx}")
        if self.p < 1:
            raise ValueError(f"ambient dimension p must be >= 1, got {self.p}")
        if idx and (idx[0] < 1 or idx[-1] > self.p):
            raise ValueError(f"indices {idx} out of range [1, {self.p}]")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    def __contains__(self, j: int) -> bool:
        return j in self.indices

    def __repr__(self) -> str:
        return f"Model({{{', '.join(map(str, self.indices))}}}, p={self.p})"


class PriorFamily:
    """Base class for size-prior families.  Subclasses are frozen dataclasses."""

    #: short grammar name used in text descriptors, set by subclasses
    name = ""

    def _log_pmf(self, p: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def descriptor(self) -> str:
        """Canonical text form, e.g. ``"shp:phi=1,theta=1"``."""
        raise NotImplementedError


@dataclass(frozen=True)
class PathHolm(PriorFamily):
    """Geometric-like prior with constant path-stopping probability 1 - alpha."""

    alpha: float
    name = "php"

    def __post_init__(self):
        a = _check_finite("alpha", self.alpha)
        if not 0.0 < a < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {a}")
        object.__setattr__(self, "alpha", a)

    def _log_pmf(self, p: int) -> np.ndarray:
        k = np.arange(p + 1)
        out = math.log1p(-self.alpha) + k * math.log(self.alpha)
        out[p] = p * math.log(self.alpha)  # boundary absorbs the truncation
        return out

    @property
    def descriptor(self) -> str:
        return f"php:alpha={_fmt(self.alpha)}"


@dataclass(frozen=True)
class SubsetHolm(PriorFamily):
    """Poisson-like prior with stopping probability (k+phi)/(k+phi+theta)."""

    phi: float
    theta: float
    name = "shp"

    def __post_init__(self):
        phi = _check_finite("phi", self.phi)
        theta = _check_finite("theta", self.theta)
        if phi <= 0 or theta <= 0:
            raise ValueError(f"phi and theta must be > 0, got ({phi}, {theta})")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "theta", theta)

    def _log_pmf(self, p: int) -> np.ndarray:
        phi, theta = self.phi, self.theta
        k = np.arange(p + 1)
        out = (
            np.log(k + phi)
            - np.log(k + phi + theta)
            + gammaln(phi + theta)
            + k * math.log(theta)
            - gammaln(k + phi + theta)
        )
        out[p] = gammaln(phi + theta) + p * math.log(theta) - gammaln(p + phi + theta)
        return out

    @property
    def descriptor(self) -> str:
        return f"shp:phi={_fmt(self.phi)},theta={_fmt(self.theta)}"


@dataclass(frozen=True)
class MatryoshkaDoll(PriorFamily):
    """Truncated Poisson(1/omega) on model size, renormalized over {0..p}."""

    omega: float
    name = "md"

    def __post_init__(self):
        w = _check_finite("omega", self.omega)
        if w <= 0:
            raise ValueError(f"omega must be > 0, got {w}")
        object.__setattr__(self, "omega", w)

    def _log_pmf(self, p: int) -> np.ndarray:
        k = np.arange(p + 1)
        raw = -k * math.log(self.omega) - gammaln(k + 1)
        return raw - logsumexp(raw)

    @property
    def descriptor(self) -> str:
        return f"md:omega={_fmt(self.omega)}"


@dataclass(frozen=True)
class BetaBinomial(PriorFamily):
    """Beta-Binomial(a, b) marginal distribution on model size."""

    a: float
    b: float
    name = "bb"

    def __post_init__(self):
        a = _check_finite("a", self.a)
        b = _check_finite("b", self.b)
        if a <= 0 or b <= 0:
            raise ValueError(f"a and b must be > 0, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def _log_pmf(self, p: int) -> np.ndarray:
        return _beta_binomial_log_pmf(p, self.a, self.b)

    @property
    def descriptor(self) -> str:
        return f"bb:a={_fmt(self.a)},b={_fmt(self.b)}"


@dataclass(frozen=True)
class ScaledBetaBinomial(PriorFamily):
    """Beta-Binomial(a, lam * p): the second shape parameter scales with p."""

    a: float
    lam: float
    name = "sbb"

    def __post_init__(self):
        a = _check_finite("a", self.a)
        lam = _check_finite("lambda", self.lam)
        if a <= 0 or lam <= 0:
            raise ValueError(f"a and lambda must be > 0, got ({a}, {lam})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "lam", lam)

    def _log_pmf(self, p: int) -> np.ndarray:
        return _beta_binomial_log_pmf(p, self.a, self.lam * p)

    @property
    def descriptor(self) -> str:
        return f"sbb:a={_fmt(self.a)},lambda={_fmt(self.lam)}"


@dataclass(frozen=True)
class PowerSeries(PriorFamily):
    """pi(k|p) proportional to (1+k)^(-s), normalized over {0..p}."""

    s: float
    name = "pow"

    def __post_init__(self):
        s = _check_finite("s", self.s)
        if s < 1:
            raise ValueError(f"s must be >= 1, got {s}")
        object.__setattr__(self, "s", s)

    def _log_pmf(self, p: int) -> np.ndarray:
        raw = -self.s * np.log1p(np.arange(p + 1))
        return raw - logsumexp(raw)

    @property
    def descriptor(self) -> str:
        return f"pow:s={_fmt(self.s)}"


@dataclass(frozen=True)
class CMG(PriorFamily):
    """pi(k|p) proportional to E[Y^(2k)] / k! with Y ~ Normal(mu, var)."""

    mu: float
    var: float
    name = "cmg"

    def __post_init__(self):
        mu = _check_finite("mu", self.mu)
        var = _check_finite("var", self.var)
        if var < 0:
            raise ValueError(f"var must be >= 0, got {var}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "var", var)

    def _log_pmf(self, p: int) -> np.ndarray:
        raw = _log_even_moments(self.mu, self.var, p) - gammaln(np.arange(p + 1) + 1)
        return raw - logsumexp(raw)

    @property
    def descriptor(self) -> str:
        return f"cmg:mu={_fmt(self.mu)},var={_fmt(self.var)}"


def _beta_binomial_log_pmf(p: int, a: float, b: float) -> np.ndarray:
    k = np.arange(p + 1)
    log_comb = gammaln(p + 1) - gammaln(k + 1) - gammaln(p - k + 1)
    return log_comb + betaln(a + k, b + p - k) - betaln(a, b)


def normal_even_moment(mu: float, var: float, k: int) -> float:
    """Raw even moment E[Y^(2k)] of Y ~ Normal(mu, var).

    Uses the raw-moment recurrence m_0 = 1, m_1 = mu,
    m_j = mu * m_{j-1} + (j-1) * var * m_{j-2}.
    """
    mu = _check_finite("mu", mu)
    var = _check_finite("var", var)
    if var < 0:
        raise ValueError(f"var must be >= 0, got {var}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1.0
    m_prev, m_cur = 1.0, mu
    for j in range(2, 2 * k + 1):
        m_prev, m_cur = m_cur, mu * m_cur + (j - 1) * var * m_prev
    return m_cur


def _log_even_moments(mu: float, var: float, kmax: int) -> np.ndarray:
    """log E[Y^(2k)] for k = 0..kmax, computed in log space.

    Even moments depend on mu only through mu^2, so mu is replaced by |mu|,
    making every raw moment in the recurrence nonnegative.
    """
    amu = abs(mu)
    log_mu = math.log(amu) if amu > 0 else -math.inf
    log_var = math.log(var) if var > 0 else -math.inf
    lm = np.empty(2 * kmax + 1)
    lm[0] = 0.0
    if kmax >= 1:
        lm[1] = log_mu
        for j in range(2, 2 * kmax + 1):
            lm[j] = np.logaddexp(
                log_mu + lm[j - 1], log_var + math.log(j - 1) + lm[j - 2]
            )
    return lm[::2].copy()


@lru_cache(maxsize=1024)
def _cached_log_pmf(family: PriorFamily, p: int) -> np.ndarray:
    out = family._log_pmf(p)
    out.flags.writeable = False
    return out


def size_log_pmf(family: PriorFamily, p: int) -> np.ndarray:
    """Full log prior on model size: log pi(k|p) for k = 0..p.

    Parameters
    ----------
    family : PriorFamily
    p : int
        Ambient number of predictors, >= 1.

    Returns
    -------
    ndarray of shape (p + 1,)
        Read-only; cached per (family, p).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return _cached_log_pmf(family, int(p))


def log_size_prior(family: PriorFamily, k: int, p: int) -> float:
    """log pi(k | p) under the given family."""
    if not 0 <= k <= p:
        raise ValueError(f"k must satisfy 0 <= k <= p, got k={k}, p={p}")
    return float(size_log_pmf(family, p)[k])


def log_comb(p: int, k: int) -> float:
    """log C(p, k)."""
    return float(gammaln(p + 1) - gammaln(k + 1) - gammaln(p - k + 1))


def log_model_prior(family: PriorFamily, model: Model) -> float:
    """Log prior mass of an individual model: log pi(|A| | p) - log C(p, |A|).

    Every supported family is exchangeable, so all models of the same size
    share the size mass equally.
    """
    k = model.size
    return log_size_prior(family, k, model.p) - log_comb(model.p, k)


def children_ratio(family: PriorFamily, k: int, p: int) -> float:
    """Prior mass of the children set of a size-k model relative to the model.

    ratio(k|p) = (k+1) * pi(k+1|p) / pi(k|p); the children set of A holds the
    p - |A| models that add exactly one predictor to A.

    Parameters
    ----------
    family : PriorFamily
    k : int
        Current model size, 0 <= k < p.
    p : int
        Ambient number of predictors.
    """
    if not 0 <= k < p:
        raise ValueError(f"k must satisfy 0 <= k < p, got k={k}, p={p}")
    lp = size_log_pmf(family, p)
    if lp[k] == -math.inf:
        raise ValueError(f"children ratio undefined: pi({k}|{p}) = 0")
    return (k + 1) * math.exp(lp[k + 1] - lp[k])


_DESCRIPTOR_SPECS = {
    "php": (PathHolm, ("alpha",)),
    "shp": (SubsetHolm, ("phi", "theta")),
    "md": (MatryoshkaDoll, ("omega",)),
    "bb": (BetaBinomial, ("a", "b")),
    "sbb": (ScaledBetaBinomial, ("a", "lambda")),
    "pow": (PowerSeries, ("s",)),
    "cmg": (CMG, ("mu", "var")),
}

# dataclass field names, where they differ from the descriptor keys
_KEY_TO_FIELD = {"lambda": "lam"}


def from_descriptor(text: str) -> PriorFamily:
    """Build a prior family from a text descriptor.

    Grammar: ``name:key=value,...`` with names php, shp, md, bb, sbb, pow,
    cmg.  Examples: ``"php:alpha=0.5"``, ``"shp:phi=1,theta=1"``,
    ``"sbb:a=1,lambda=1"``, ``"cmg:mu=0.5,var=0.25"``.

    Raises
    ------
    ValueError
        Naming the offending token, if the descriptor does not parse.
    """
    text = text.strip()
    name, sep, rest = text.partition(":")
    name = name.strip().lower()
    if name not in _DESCRIPTOR_SPECS:
        raise ValueError(f"unknown prior family {name!r} in descriptor {text!r}")
    cls, keys = _DESCRIPTOR_SPECS[name]
    if not sep or not rest.strip():
        raise ValueError(
            f"descriptor {text!r} is missing parameters; expected "
            f"{name}:{','.join(k + '=<value>' for k in keys)}"
        )
    kwargs = {}
    for token in rest.split(","):
        key, eq, value = token.partition("=")
        key = key.strip().lower()
        if not eq or key not in keys:
            raise ValueError(f"bad parameter token {token!r} in descriptor {text!r}")
        if _KEY_TO_FIELD.get(key, key) in kwargs:
            raise ValueError(f"repeated parameter {key!r} in descriptor {text!r}")
        try:
            kwargs[_KEY_TO_FIELD.get(key, key)] = float(value)
        except ValueError:
            raise ValueError(
                f"non-numeric value in token {token!r} of descriptor {text!r}"
            ) from None
    missing = [k for k in keys if _KEY_TO_FIELD.get(k, k) not in kwargs]
    if missing:
        raise ValueError(f"descriptor {text!r} is missing {', '.join(missing)}")
    return cls(**kwargs)
