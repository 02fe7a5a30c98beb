"""Synthetic regression problems with a controlled signal-to-noise ratio.

Covariates are iid standard normal, noise has unit variance, and the nonzero
coefficients all share the magnitude sqrt(snr / p_true), which makes the
population R^2 equal to snr / (1 + snr).  Datasets round-trip losslessly
through a CSV file plus a JSON sidecar that carries the generating truth.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .bayes_factor import Dataset
from .priors import Model

__all__ = [
    "snr_to_r2",
    "generate_dataset",
    "save_dataset",
    "load_dataset",
]

_COEF_MODES = ("equal", "random-sign")


def snr_to_r2(snr: float) -> float:
    """Population R^2 implied by a signal-to-noise ratio, snr / (1 + snr)."""
    if not (snr >= 0 and math.isfinite(snr)):
        raise ValueError(f"snr must be finite and >= 0, got {snr}")
    return snr / (1.0 + snr)


def generate_dataset(
    n: int,
    p: int,
    p_true: int,
    snr: float,
    rng: np.random.Generator,
    *,
    coef_mode: str = "equal",
) -> Dataset:
    """Draw a dataset whose true model is a random size-p_true subset.

    The rng is consumed in a fixed order (covariates, subset placement,
    signs when requested, then noise), so a seeded generator reproduces the
    dataset exactly.

    Parameters
    ----------
    n, p : int
        Sample size (>= 3) and number of predictors.
    p_true : int
        Number of active predictors, 0 <= p_true <= p.
    snr : float
        Signal-to-noise ratio; var(X beta) / var(noise) in population.
    coef_mode : {"equal", "random-sign"}, optional
        "equal" gives every active coefficient the value sqrt(snr / p_true);
        "random-sign" flips each sign with probability 1/2.
    """
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if not 0 <= p_true <= p:
        raise ValueError(f"p_true must be in [0, {p}], got {p_true}")
    if not (snr >= 0 and math.isfinite(snr)):
        raise ValueError(f"snr must be finite and >= 0, got {snr}")
    if coef_mode not in _COEF_MODES:
        raise ValueError(f"coef_mode must be one of {_COEF_MODES}, got {coef_mode!r}")
    if p_true == 0 and snr > 0:
        raise ValueError("snr > 0 needs at least one active predictor")

    X = rng.standard_normal((n, p))
    active = np.sort(rng.permutation(p)[:p_true]) + 1
    beta = np.zeros(p)
    if p_true > 0:
        mag = math.sqrt(snr / p_true)
        signs = rng.choice([-1.0, 1.0], size=p_true) if coef_mode == "random-sign" else 1.0
        beta[active - 1] = mag * signs
    y = X @ beta + rng.standard_normal(n)
    return Dataset(
        y=y,
        X=X,
        true_model=Model(tuple(int(j) for j in active), p),
        true_beta=beta,
        noise_var=1.0,
    )


def save_dataset(data: Dataset, csv_path: str | Path) -> Path:
    """Write a dataset as CSV (header y,x1..xp) plus a .json truth sidecar.

    Floats are written with repr precision, so :func:`load_dataset` restores
    the arrays bit for bit.  Returns the sidecar path.
    """
    csv_path = Path(csv_path)
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j}" for j in range(1, data.p + 1)])
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i]))] + [repr(float(v)) for v in data.X[i]])
    sidecar = csv_path.with_suffix(".json")
    meta = {
        "n": data.n,
        "p": data.p,
        "true_model": list(data.true_model.indices),
        "true_beta": [float(v) for v in data.true_beta],
        "noise_var": data.noise_var,
    }
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return sidecar


def load_dataset(csv_path: str | Path) -> Dataset:
    """Read back a dataset written by :func:`save_dataset`."""
    csv_path = Path(csv_path)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "y":
            raise ValueError(f"{csv_path}: expected header starting with 'y'")
        rows = [[float(v) for v in row] for row in reader if row]
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ValueError(f"{csv_path}: ragged or empty data")
    sidecar = csv_path.with_suffix(".json")
    with open(sidecar) as fh:
        meta = json.load(fh)
    p = int(meta["p"])
    if arr.shape[1] != p + 1:
        raise ValueError(
            f"{csv_path}: {arr.shape[1] - 1} predictor columns, sidecar says {p}"
        )
    return Dataset(
        y=arr[:, 0],
        X=arr[:, 1:],
        true_model=Model(tuple(int(j) for j in meta["true_model"]), p),
        true_beta=np.asarray(meta["true_beta"], dtype=float),
        noise_var=float(meta["noise_var"]),
    )
