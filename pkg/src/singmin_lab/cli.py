"""Command line runner: ``singmin-lab <config> [--workers W] [--seed S] [--out PREFIX]``.

A config is a flat list of ``key=value`` lines; ``#`` starts a comment.
Every run writes ``<prefix>.csv`` and ``<prefix>.meta``, plus
``<prefix>.svg`` for experiments that produce a curve. Exit status is 0 on
success, 2 when a counterexample or acceptance check fails, 1 on error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, acceptance
from .ensembles import EnsembleSpec, Kind
from .moulds import EnsembleRows, UniformBox, membership_verdict, mould_ratio_sequence
from .report import csv_text, svg_plot
from .tails import default_hill_k, hill_estimator
from .theorems import (
    _collect,
    alpha_moment_sweep,
    counterexample_suite,
    default_eps_grid,
    estimate_sigma_min_cdf,
    kappa_divergence_diagnostic,
    power_identity_check,
    ratio_lower_bound_probe,
    sandwich_check,
)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "run_experiment", "main"]

EXPERIMENTS = ("cdf", "ratio", "sandwich", "power", "kappa", "alpha-sweep", "mould", "tail", "counterexamples", "verify")

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    ensemble: EnsembleSpec
    N: int = 100_000
    seed: int = 42
    workers: int = 1
    out: str = ""
    ci_level: float = 0.95
    eps_grid: tuple[float, ...] = ()
    k_list: tuple[int, ...] | None = None
    alpha_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.7, 0.9, 1.0, 1.2)
    N_schedule: tuple[int, ...] = ()
    norm: str = "inf"
    eps: float = 0.05
    y: tuple[float, ...] = ()
    x: tuple[float, ...] = ()
    order: int | None = None
    threshold: float = 0.1
    tail_k: int | None = None
    law: str = "ensemble"
    dim: int = 1
    bandwidth: float = 2.5
    extra: dict = field(default_factory=dict)

    def echo(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            if f.name == "extra":
                continue
            v = getattr(self, f.name)
            if f.name == "ensemble":
                v = v.describe()
            lines.append(f"{f.name}={v}")
        return "\n".join(lines)


_KEYS = {
    "experiment", "ensemble", "n", "m", "shift", "N", "seed", "workers", "out", "ci_level",
    "eps_grid", "k_list", "alpha_grid", "N_schedule", "norm", "eps", "y", "x", "order",
    "threshold", "tail_k", "law", "dim", "bandwidth",
}  # fmt: skip


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text):
    out = []
    for v in text.split(","):
        v = v.strip()
        if v:
            f = float(v)
            if f != int(f):
                raise ValueError(f"{v} is not an integer")
            out.append(int(f))
    return tuple(out)


def _int(text):
    values = _ints(text)
    if len(values) != 1:
        raise ValueError("expected a single integer")
    return values[0]


def _ascending(values, positive=True):
    return bool(values) and all(b > a for a, b in zip(values, values[1:])) and (not positive or values[0] > 0)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a ``key=value`` experiment description."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        raw[key] = value

    def get(key, conv, default=None):
        if key not in raw:
            return default
        try:
            return conv(raw[key])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"key {key!r}: cannot parse {raw[key]!r} ({exc})") from None

    experiment = get("experiment", str)
    if experiment is None:
        raise ConfigError("key 'experiment': missing")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"key 'experiment': must be one of {', '.join(EXPERIMENTS)}")

    kind = get("ensemble", str, "gaussian")
    try:
        kind = Kind(kind)
    except ValueError:
        raise ConfigError(f"key 'ensemble': unknown ensemble {kind!r}; choose from {', '.join(k.value for k in Kind)}") from None
    n = get("n", _int, 3)
    if n < 2:
        raise ConfigError("key 'n': matrix dimension must be >= 2")
    m = get("m", _int)
    if m is not None and kind is Kind.LOWDIM and not 1 <= m < n:
        raise ConfigError(f"key 'm': lowdim rows need 1 <= m < n (m={m}, n={n})")
    try:
        spec = EnsembleSpec(kind, n, m=m, shift=get("shift", float, 3.0))
    except ValueError as exc:
        raise ConfigError(f"key 'ensemble': {exc}") from None

    cfg = ExperimentConfig(experiment, spec)
    cfg.N = get("N", _int, cfg.N)
    if cfg.N < 1:
        raise ConfigError("key 'N': must be >= 1")
    cfg.seed = get("seed", _int, cfg.seed)
    if not 0 <= cfg.seed < 2**64:
        raise ConfigError("key 'seed': must be a 64-bit unsigned integer")
    cfg.workers = get("workers", _int, 1)
    if cfg.workers < 1:
        raise ConfigError("key 'workers': must be >= 1")
    cfg.out = get("out", str, f"singmin-{experiment}")
    cfg.ci_level = get("ci_level", float, 0.95)
    if not 0 < cfg.ci_level < 1:
        raise ConfigError("key 'ci_level': must lie in (0, 1)")
    cfg.eps_grid = get("eps_grid", _floats, tuple(default_eps_grid().tolist()))
    if not _ascending(cfg.eps_grid):
        raise ConfigError("key 'eps_grid': must be ascending and positive")
    cfg.k_list = get("k_list", _ints)
    if cfg.k_list is not None and not _ascending(cfg.k_list):
        raise ConfigError("key 'k_list': must be strictly increasing positive integers")
    cfg.alpha_grid = get("alpha_grid", _floats, cfg.alpha_grid)
    if not cfg.alpha_grid or min(cfg.alpha_grid) < 0:
        raise ConfigError("key 'alpha_grid': alphas must be >= 0")
    default_sched = tuple(sorted({max(cfg.N // 100, 2), max(cfg.N // 10, 3), cfg.N}))
    cfg.N_schedule = get("N_schedule", _ints, default_sched)
    if not _ascending(cfg.N_schedule) or cfg.N_schedule[0] < 2:
        raise ConfigError("key 'N_schedule': must be strictly increasing and start at >= 2")
    cfg.norm = get("norm", str, "inf" if experiment == "kappa" else "2")
    if cfg.norm not in ("1", "2", "inf"):
        raise ConfigError("key 'norm': must be 1, 2 or inf")
    cfg.eps = get("eps", float, cfg.eps)
    if not cfg.eps > 0:
        raise ConfigError("key 'eps': must be positive")
    cfg.law = get("law", str, "ensemble")
    if cfg.law not in ("ensemble", "unit-box"):
        raise ConfigError("key 'law': must be 'ensemble' or 'unit-box'")
    cfg.dim = get("dim", _int, 1)
    if cfg.dim < 1:
        raise ConfigError("key 'dim': must be >= 1")
    law_dim = n if cfg.law == "ensemble" else cfg.dim
    cfg.y = get("y", _floats, tuple(float(i == 0) for i in range(n)))
    if len(cfg.y) != n:
        raise ConfigError(f"key 'y': need {n} components")
    cfg.x = get("x", _floats, tuple(0.0 for _ in range(law_dim)) if cfg.law == "ensemble" else tuple(0.5 for _ in range(law_dim)))
    if len(cfg.x) != law_dim:
        raise ConfigError(f"key 'x': need {law_dim} components")
    cfg.order = get("order", _int, law_dim)
    if cfg.order < 0:
        raise ConfigError("key 'order': must be >= 0")
    cfg.threshold = get("threshold", float, cfg.threshold)
    cfg.tail_k = get("tail_k", _int)
    cfg.bandwidth = get("bandwidth", float, cfg.bandwidth)
    return cfg


# --- running -----------------------------------------------------------------


@dataclass
class RunResult:
    status: int
    csv: str
    svg: str | None = None
    summary: list[str] = field(default_factory=list)


def _run_cdf(cfg, with_probe):
    cdf = estimate_sigma_min_cdf(cfg.ensemble, cfg.eps_grid, cfg.N, cfg.seed, cfg.ci_level, cfg.workers)
    if not with_probe:
        svg = svg_plot({"P(sigma_min < eps)": (cdf.eps_grid, cdf.p_hat), "eps": (cdf.eps_grid, cdf.eps_grid)}, f"CDF of sigma_min, {cfg.ensemble.describe()}", "eps", "probability")
        return RunResult(EXIT_OK, csv_text(cdf.csv_header, cdf.csv_rows()), svg)
    curve = ratio_lower_bound_probe(cdf, bandwidth=cfg.bandwidth)
    rows = [(*r, ratio, lo, hi) for r, ratio, lo, hi in zip(cdf.csv_rows(), curve.ratio, curve.ratio_lo, curve.ratio_hi)]
    svg = svg_plot({"ratio": (curve.eps_grid, curve.ratio), "lower": (curve.eps_grid, curve.ratio_lo), "upper": (curve.eps_grid, curve.ratio_hi)}, f"P(sigma_min < eps)/eps, {cfg.ensemble.describe()}", "eps", "ratio")
    return RunResult(EXIT_OK, csv_text(cdf.csv_header + ("ratio", "ratio_lo", "ratio_hi"), rows), svg, [f"verdict={curve.verdict.value}", f"band={curve.band!r}"])


def _run_sandwich(cfg):
    rep = sandwich_check(cfg.ensemble, cfg.eps_grid, cfg.N, cfg.seed, cfg.ci_level, cfg.workers)
    svg = svg_plot({"sigma_min < eps": (rep.eps_grid, rep.count_sigma), "|X_n.Y| < eps": (rep.eps_grid, rep.count_xy)}, f"event counts, {cfg.ensemble.describe()}", "eps", "count")
    return RunResult(EXIT_OK, csv_text(rep.csv_header, rep.csv_rows()), svg, [f"violations={rep.violations}", f"degenerate={rep.degenerate}", f"passed={rep.passed}"])


def _run_power(cfg):
    rep = power_identity_check(cfg.ensemble, np.array(cfg.y), cfg.eps, cfg.N, cfg.seed, cfg.ci_level, cfg.workers)
    return RunResult(EXIT_OK, csv_text(rep.csv_header, rep.csv_rows()), None, [f"agrees={rep.agrees}", f"analytic_in_ci={rep.analytic_in_ci}"])


def _norm_arg(norm):
    return "inf" if norm == "inf" else int(norm)


def _run_kappa(cfg):
    rep = kappa_divergence_diagnostic(cfg.ensemble, _norm_arg(cfg.norm), cfg.N_schedule, cfg.seed, cfg.workers)
    svg = svg_plot({f"kappa_{rep.norm}": (rep.schedule, rep.kappa.means), "1/sigma_min": (rep.schedule, rep.inv_sigma.means)}, f"running means, {cfg.ensemble.describe()}", "N", "mean", logy=False)
    summary = [f"kappa_growth={rep.kappa.growth()!r}", f"inv_sigma_growth={rep.inv_sigma.growth()!r}", f"infinite_fraction={rep.infinite_fraction!r}"]
    if rep.lemma is not None:
        summary.append(f"lemma_divergence_flag={rep.lemma.divergence_flagged}")
    if rep.hill is not None:
        summary.append(f"hill_alpha={rep.hill.alpha_hat!r}")
    return RunResult(EXIT_OK, csv_text(rep.csv_header, rep.csv_rows()), svg, summary)


def _run_alpha(cfg):
    rep = alpha_moment_sweep(cfg.ensemble, cfg.alpha_grid, cfg.N_schedule, cfg.seed, _norm_arg(cfg.norm), cfg.workers)
    series = {f"alpha={a:g}": (rep.schedule, ms) for a, ms in zip(rep.alphas, rep.means)}
    svg = svg_plot(series, f"running means of kappa^alpha, {cfg.ensemble.describe()}", "N", "mean")
    return RunResult(EXIT_OK, csv_text(rep.csv_header, rep.csv_rows()), svg, [f"drift[{a:g}]={d!r}" for a, d in zip(rep.alphas, rep.drift)])


def _run_mould(cfg):
    law = EnsembleRows(cfg.ensemble) if cfg.law == "ensemble" else UniformBox((0.0,) * cfg.dim, (1.0,) * cfg.dim)
    seq = mould_ratio_sequence(law, cfg.x, cfg.order, cfg.k_list, cfg.N, cfg.seed, cfg.ci_level, cfg.workers)
    svg = svg_plot({"ratio": (seq.ks, seq.ratio), "lower": (seq.ks, seq.ci_lo), "upper": (seq.ks, seq.ci_hi)}, f"order-{seq.order} mould ratios", "k", "k^m P(|X-x| < 1/k)")
    verdict = membership_verdict(seq, cfg.threshold).value if len(seq.ks) >= 3 else "n/a"
    return RunResult(EXIT_OK, csv_text(seq.csv_header, seq.csv_rows()), svg, [f"verdict={verdict}"])


def _run_tail(cfg):
    inv = _collect(cfg.ensemble, cfg.seed, cfg.N, ("inv_sigma_min",), cfg.workers)["inv_sigma_min"]
    finite = inv[np.isfinite(inv)]
    k_max = finite.size // 2
    ks = [cfg.tail_k] if cfg.tail_k else sorted({k for k in np.geomspace(10, max(k_max, 10), 12).astype(int) if 10 <= k <= k_max} | {default_hill_k(finite.size)})
    rows, pts = [], []
    for k in ks:
        est = hill_estimator(finite, k)
        rows.append((k, est.alpha_hat, *est.ci, est.threshold))
        pts.append((k, est.alpha_hat))
    svg = svg_plot({"Hill estimate": tuple(zip(*pts))}, f"Hill plot of 1/sigma_min, {cfg.ensemble.describe()}", "k", "tail index", logy=False)
    return RunResult(EXIT_OK, csv_text(("k", "alpha_hat", "ci_lo", "ci_hi", "threshold"), rows), svg, [f"singular_samples={inv.size - finite.size}"])


def _run_counterexamples(cfg):
    rep = counterexample_suite(cfg.seed, cfg.N, 0.99, cfg.workers)
    summary = [f"{name}: {'passed' if ok else 'FAILED'} (value {value!r}, expected {expected})" for name, value, expected, ok in rep.checks]
    summary += [f"offending sample: {o}" for o in rep.offending]
    return RunResult(EXIT_OK if rep.passed else EXIT_FAILED, csv_text(rep.csv_header, rep.csv_rows()), None, summary)


def _run_verify(cfg):
    results = acceptance.run_all(cfg.workers, echo=lambda line: print(line, flush=True))
    rows = [(r.number, r.title, int(r.passed), int(r.advisory), r.detail) for r in results]
    status = EXIT_OK if acceptance.all_passed(results) else EXIT_FAILED
    return RunResult(status, csv_text(("criterion", "title", "passed", "advisory", "detail"), rows), None, [r.line() for r in results])


_DISPATCH = {
    "cdf": lambda c: _run_cdf(c, False),
    "ratio": lambda c: _run_cdf(c, True),
    "sandwich": _run_sandwich,
    "power": _run_power,
    "kappa": _run_kappa,
    "alpha-sweep": _run_alpha,
    "mould": _run_mould,
    "tail": _run_tail,
    "counterexamples": _run_counterexamples,
    "verify": _run_verify,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[int, list[Path]]:
    """Run ``cfg`` and write its artifacts; returns (exit status, written paths)."""
    t0 = time.perf_counter()
    result = _DISPATCH[cfg.experiment](cfg)
    wall = time.perf_counter() - t0
    prefix = Path(cfg.out)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = prefix.with_name(prefix.name + ".csv")
    csv_path.write_text(result.csv, encoding="utf-8")
    written.append(csv_path)
    if result.svg is not None:
        svg_path = prefix.with_name(prefix.name + ".svg")
        svg_path.write_text(result.svg, encoding="utf-8")
        written.append(svg_path)
    meta = [cfg.echo(), f"wall_time_s={wall:.3f}", f"version={__version__}", f"status={result.status}", *result.summary]
    meta_path = prefix.with_name(prefix.name + ".meta")
    meta_path.write_text("\n".join(meta) + "\n", encoding="utf-8")
    written.append(meta_path)
    return result.status, written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="singmin-lab", description="Least singular value / condition number Monte Carlo laboratory")
    parser.add_argument("config", help="path to a key=value experiment file")
    parser.add_argument("--workers", type=int, help="worker processes (overrides the config)")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--out", help="output path prefix override")
    args = parser.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            cfg.workers = args.workers
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ConfigError("--seed must be a 64-bit unsigned integer")
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        status, paths = run_experiment(cfg)
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"singmin-lab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for p in paths:
        print(p)
    if status == EXIT_FAILED:
        print("singmin-lab: assertion failure, see the .meta file", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
