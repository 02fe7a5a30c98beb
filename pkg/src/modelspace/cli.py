"""Command-line front end: prior tables, data generation, chains, sweeps.

Subcommands
-----------
prior-table   size-prior table (log mass and children ratio) for one or more
              families at a given p
generate      write a synthetic dataset as CSV plus a JSON truth sidecar
run           one chain on one dataset; top-model CSV out, metrics to stderr
replicate     replicated sweep over priors; one CSV row per (replication, prior)
summarize     per-prior quartiles of replicate CSVs, as JSON

Prior descriptors use the grammar ``name:key=value,...`` with names
php, shp, md, bb, sbb, pow, cmg; for example ``shp:phi=1,theta=1`` or
``cmg:mu=0.5,var=0.25``.  Flags for a subcommand can also be supplied through
``--config FILE`` (a flat JSON object keyed by flag name with underscores);
explicit flags win over config values.

Replication r of a sweep derives everything from base_seed + r, so any subset
of replications can be rerun bit-for-bit.  Exit codes: 0 success, 1 runtime
error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .priors import children_ratio, from_descriptor, log_size_prior
from .sampler import ChainConfig, FitCache, run_chain, summarize
from .simulate import generate_dataset, load_dataset, save_dataset

__all__ = ["main"]

REPLICATE_HEADER = [
    "replication",
    "prior",
    "seed",
    "true_model_probability",
    "models_for_95",
    "inclusion_recall",
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modelspace",
        description="Model-space priors, Bayes factors, and posterior sampling "
        "for Gaussian variable selection.",
        epilog="Prior descriptor grammar: name:key=value,... with names "
        "php(alpha), shp(phi,theta), md(omega), bb(a,b), sbb(a,lambda), "
        "pow(s), cmg(mu,var). Example: shp:phi=1,theta=1",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="JSON file of flag defaults (flags override)")

    pt = sub.add_parser("prior-table", help="size-prior table for one or more families")
    pt.add_argument("--priors", nargs="+", help="prior descriptors")
    pt.add_argument("--p", type=int, help="ambient dimension (default 20)")
    pt.add_argument("--out", help="output CSV path (default stdout)")
    add_config(pt)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--n", type=int, help="sample size")
    gen.add_argument("--p", type=int, help="number of predictors")
    gen.add_argument("--p-true", type=int, dest="p_true", help="number of active predictors")
    gen.add_argument("--snr", type=float, help="signal-to-noise ratio")
    gen.add_argument("--seed", type=int, help="generator seed (default 0)")
    gen.add_argument(
        "--coef-mode",
        dest="coef_mode",
        choices=["equal", "random-sign"],
        help="coefficient scheme (default equal)",
    )
    gen.add_argument("--out", help="output CSV path (sidecar replaces .csv with .json)")
    add_config(gen)

    run = sub.add_parser("run", help="one chain on one dataset")
    run.add_argument("--data", help="dataset CSV written by generate")
    run.add_argument("--prior", help="prior descriptor")
    run.add_argument("--draws", type=int, help="MCMC draws (default 1000000)")
    run.add_argument("--burn-in", type=int, dest="burn_in", help="burn-in (default draws/10)")
    run.add_argument("--kernel-weights", dest="kernel_weights", help="w_flip,w_swap,w_replace")
    run.add_argument("--seed", type=int, help="chain seed (default 0)")
    run.add_argument("--prior-only", dest="prior_only", action="store_true", default=None,
                     help="target the model prior (all Bayes factors forced to 1)")
    run.add_argument("--no-cache", dest="no_cache", action="store_true", default=None,
                     help="disable the fit/Bayes-factor cache")
    run.add_argument("--top", type=int, help="models to list, 0 for all (default 20)")
    run.add_argument("--out", help="output CSV path (default stdout)")
    add_config(run)

    rep = sub.add_parser("replicate", help="replicated sweep over priors")
    rep.add_argument("--n", type=int, help="sample size")
    rep.add_argument("--p", type=int, help="number of predictors")
    rep.add_argument("--p-true", type=int, dest="p_true", help="number of active predictors")
    rep.add_argument("--snr", type=float, help="signal-to-noise ratio")
    rep.add_argument(
        "--coef-mode", dest="coef_mode", choices=["equal", "random-sign"],
        help="coefficient scheme (default equal)",
    )
    rep.add_argument("--priors", nargs="+", help="prior descriptors")
    rep.add_argument("--reps", type=int, help="number of replications")
    rep.add_argument("--draws", type=int, help="MCMC draws per chain (default 1000000)")
    rep.add_argument("--burn-in", type=int, dest="burn_in", help="burn-in (default draws/10)")
    rep.add_argument("--kernel-weights", dest="kernel_weights", help="w_flip,w_swap,w_replace")
    rep.add_argument("--seed", type=int, help="base seed; replication r uses seed + r (default 0)")
    rep.add_argument("--prior-only", dest="prior_only", action="store_true", default=None,
                     help="target the model priors themselves")
    rep.add_argument("--jobs", type=int, help="parallel worker processes (default 1)")
    rep.add_argument("--out", help="output CSV path (default stdout)")
    add_config(rep)

    summ = sub.add_parser("summarize", help="per-prior quartiles of replicate CSVs")
    summ.add_argument("inputs", nargs="*", help="replicate CSV files")
    summ.add_argument("--out", help="output JSON path (default stdout)")
    add_config(summ)

    return parser


_DEFAULTS = {
    "p": 20,
    "seed": 0,
    "coef_mode": "equal",
    "draws": 1_000_000,
    "burn_in": None,
    "kernel_weights": "1,1,1",
    "prior_only": False,
    "no_cache": False,
    "top": 20,
    "jobs": 1,
    "reps": 10,
    "out": None,
    "config": None,
}


def _merge_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    """Fill unset flags from --config, then from built-in defaults."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            parser.error(f"--config: {exc}")
        except json.JSONDecodeError as exc:
            parser.error(f"--config {args.config}: invalid JSON ({exc})")
        if not isinstance(cfg, dict):
            parser.error(f"--config {args.config}: expected a JSON object")
        known = set(vars(args))
        for key in cfg:
            if key.replace("-", "_") not in known:
                parser.error(f"--config {args.config}: unknown key {key!r}")
    for key, value in vars(args).items():
        if value is None or value == []:
            if key in cfg:
                setattr(args, key, cfg[key])
            elif key.replace("-", "_") in cfg:
                setattr(args, key, cfg[key.replace("-", "_")])
            elif key in _DEFAULTS:
                setattr(args, key, _DEFAULTS[key])
    return args


def _require(args: argparse.Namespace, parser: argparse.ArgumentParser, names: list) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            parser.error(f"--{name.replace('_', '-')} is required (flag or config)")


def _parse_priors(texts, parser: argparse.ArgumentParser) -> list:
    if isinstance(texts, str):
        texts = [texts]
    families = []
    for text in texts:
        try:
            families.append(from_descriptor(text))
        except ValueError as exc:
            parser.error(str(exc))
    return families


def _parse_weights(text, parser: argparse.ArgumentParser) -> tuple:
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = str(text).split(",")
    try:
        w = tuple(float(v) for v in parts)
    except ValueError:
        parser.error(f"--kernel-weights: expected three numbers, got {text!r}")
    if len(w) != 3:
        parser.error(f"--kernel-weights: expected three numbers, got {text!r}")
    return w


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _fmt(value: float) -> str:
    return repr(float(value))


def _cmd_prior_table(args, parser) -> int:
    _require(args, parser, ["priors"])
    families = _parse_priors(args.priors, parser)
    p = int(args.p)
    if p < 1:
        parser.error(f"--p must be >= 1, got {p}")
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh)
        writer.writerow(["prior", "k", "log_pi", "ratio"])
        for fam in families:
            for k in range(p + 1):
                ratio = _fmt(children_ratio(fam, k, p)) if k < p else ""
                writer.writerow([fam.descriptor, k, _fmt(log_size_prior(fam, k, p)), ratio])
    finally:
        if close:
            fh.close()
    return 0


def _cmd_generate(args, parser) -> int:
    _require(args, parser, ["n", "p", "p_true", "snr", "out"])
    rng = np.random.default_rng(int(args.seed))
    data = generate_dataset(
        int(args.n), int(args.p), int(args.p_true), float(args.snr), rng,
        coef_mode=args.coef_mode,
    )
    sidecar = save_dataset(data, args.out)
    print(f"wrote {args.out} and {sidecar}", file=sys.stderr)
    return 0


def _chain_config(args, parser, seed, use_cache=True) -> ChainConfig:
    return ChainConfig(
        draws=int(args.draws),
        burn_in=None if args.burn_in is None else int(args.burn_in),
        kernel_weights=_parse_weights(args.kernel_weights, parser),
        seed=seed,
        prior_only=bool(args.prior_only),
        use_cache=use_cache,
    )


def _cmd_run(args, parser) -> int:
    _require(args, parser, ["data", "prior"])
    fam = _parse_priors(args.prior, parser)[0]
    data = load_dataset(args.data)
    config = _chain_config(args, parser, int(args.seed), use_cache=not args.no_cache)
    t0 = time.perf_counter()
    summary = run_chain(config, fam, data)
    elapsed = time.perf_counter() - t0
    metrics = summarize(summary, data.true_model)
    top = int(args.top)
    rows = summary.sorted_models()
    if top > 0:
        rows = rows[:top]
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh)
        writer.writerow(["rank", "model", "count", "probability"])
        for rank, (indices, count) in enumerate(rows, start=1):
            writer.writerow(
                [rank, ";".join(str(j) for j in indices), count, _fmt(count / summary.total)]
            )
    finally:
        if close:
            fh.close()
    print(
        json.dumps(
            {
                "prior": fam.descriptor,
                "true_model_probability": metrics.true_model_probability,
                "models_for_95": metrics.models_for_95,
                "inclusion_recall": metrics.inclusion_recall,
                "acceptance_rate": summary.acceptance_rate,
                "distinct_models": len(summary.counts),
                "seconds": round(elapsed, 3),
            }
        ),
        file=sys.stderr,
    )
    return 0


def _replicate_one(task) -> list:
    """Worker for one replication: fresh dataset, one chain per prior."""
    (r, base_seed, n, p, p_true, snr, coef_mode, descriptors, draws, burn_in,
     weights, prior_only) = task
    seed_r = base_seed + r
    data_ss, chain_ss = np.random.SeedSequence(seed_r).spawn(2)
    data = generate_dataset(n, p, p_true, snr, np.random.default_rng(data_ss),
                            coef_mode=coef_mode)
    cache = FitCache()  # fits are prior-independent; share across the sweep
    rows = []
    for text in descriptors:
        fam = from_descriptor(text)
        config = ChainConfig(
            draws=draws, burn_in=burn_in, kernel_weights=weights,
            seed=chain_ss, prior_only=prior_only,
        )
        metrics = summarize(run_chain(config, fam, data, cache), data.true_model)
        rows.append([
            r,
            fam.descriptor,
            seed_r,
            _fmt(metrics.true_model_probability),
            metrics.models_for_95,
            _fmt(metrics.inclusion_recall),
        ])
    return rows


def _cmd_replicate(args, parser) -> int:
    _require(args, parser, ["n", "p", "p_true", "snr", "priors", "reps"])
    families = _parse_priors(args.priors, parser)
    weights = _parse_weights(args.kernel_weights, parser)
    reps = int(args.reps)
    if reps < 1:
        parser.error(f"--reps must be >= 1, got {reps}")
    jobs = max(int(args.jobs), 1)
    burn_in = None if args.burn_in is None else int(args.burn_in)
    descriptors = [fam.descriptor for fam in families]
    tasks = [
        (r, int(args.seed), int(args.n), int(args.p), int(args.p_true),
         float(args.snr), args.coef_mode, descriptors, int(args.draws),
         burn_in, weights, bool(args.prior_only))
        for r in range(reps)
    ]
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh)
        writer.writerow(REPLICATE_HEADER)
        t0 = time.perf_counter()
        if jobs == 1:
            batches = map(_replicate_one, tasks)
        else:
            pool = ProcessPoolExecutor(max_workers=jobs)
            batches = pool.map(_replicate_one, tasks)
        for r, batch in enumerate(batches):
            for row in batch:
                writer.writerow(row)
            if close:
                fh.flush()
            print(
                f"replication {r} done ({time.perf_counter() - t0:.1f}s elapsed)",
                file=sys.stderr,
            )
        if jobs > 1:
            pool.shutdown()
    finally:
        if close:
            fh.close()
    return 0


def _cmd_summarize(args, parser) -> int:
    if not args.inputs:
        parser.error("summarize needs at least one replicate CSV")
    per_prior: dict = {}
    for path in args.inputs:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != REPLICATE_HEADER:
                raise ValueError(f"{path}:1: expected header {','.join(REPLICATE_HEADER)}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(REPLICATE_HEADER):
                    raise ValueError(f"{path}:{lineno}: expected {len(REPLICATE_HEADER)} fields")
                try:
                    prior = row[1]
                    vals = (float(row[3]), int(row[4]), float(row[5]))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed numeric fields") from None
                per_prior.setdefault(prior, []).append(vals)
    names = ["true_model_probability", "models_for_95", "inclusion_recall"]
    out = {}
    for prior, rows in per_prior.items():
        arr = np.asarray(rows, dtype=float)
        stats = {}
        for i, name in enumerate(names):
            q1, med, q3 = np.percentile(arr[:, i], [25.0, 50.0, 75.0])
            stats[name] = {"q1": q1, "median": med, "q3": q3}
        stats["replications"] = arr.shape[0]
        out[prior] = stats
    fh, close = _open_out(args.out)
    try:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


_COMMANDS = {
    "prior-table": _cmd_prior_table,
    "generate": _cmd_generate,
    "run": _cmd_run,
    "replicate": _cmd_replicate,
    "summarize": _cmd_summarize,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    args = _merge_config(args, parser)
    try:
        return _COMMANDS[args.command](args, parser)
    except BrokenPipeError:
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
