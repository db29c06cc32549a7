"""Command-line driver: ``ldist <command> [flags]``.

Every artifact carries the full run configuration and library versions, and
nothing time-dependent, so the same flags and seed reproduce the output byte
for byte. Exit status: 0 success, 1 selftest failure, 2 invalid input,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

_FORMATS = {
    "coeffs": "json",
    "saddle": "csv",
    "mc": "csv",
    "empirical": "csv",
    "discrepancy": "json",
    "kernel-test": "csv",
    "selftest": "text",
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    q: int | None
    sigma: float
    tau_min: float | None
    tau_max: float | None
    tau_steps: int
    y: float | None
    samples: int
    seed: int
    grid: int
    kernel_T: float | None
    out: str | None
    format: str
    threads: int | None

    def taus(self) -> np.ndarray:
        lo = self.tau_min if self.tau_min is not None else (1.5 if self.sigma == 1.0 else 1.0)
        hi = self.tau_max if self.tau_max is not None else lo + 2.0
        if hi < lo:
            raise ValueError(f"--tau-max {hi} is below --tau-min {lo}")
        return np.linspace(lo, hi, self.tau_steps)

    def validate(self) -> None:
        if not 0.5 < self.sigma <= 1.0:
            raise ValueError(f"--sigma must lie in (1/2, 1], got {self.sigma}")
        if self.tau_steps < 1:
            raise ValueError("--tau-steps must be >= 1")
        if self.samples < 1:
            raise ValueError("--samples must be >= 1")
        if self.y is not None and self.y < 2:
            raise ValueError("--y must be >= 2")
        if self.command in ("empirical", "discrepancy") and self.q is None:
            raise ValueError(f"{self.command} needs --q")
        if self.format not in ("csv", "json", "text"):
            raise ValueError(f"unknown --format {self.format!r}")
        if self.format == "text" and self.command != "selftest":
            raise ValueError("--format text is only for selftest")


def _versions() -> dict:
    import numba
    import scipy

    return {"ldist": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def _metadata(cfg: RunConfig, **extra) -> dict:
    conf = {k: v for k, v in asdict(cfg).items() if k != "out"}
    conf = {k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in conf.items()}
    return {"config": conf, "versions": _versions(), **extra}


def _g(x) -> str | None:
    return None if x is None else f"{float(x):.17g}"


def _csv(meta: dict, header: list[str], rows) -> str:
    """CSV with the metadata as leading ``#`` comment lines."""
    buf = io.StringIO()
    for line in json.dumps(meta, sort_keys=True, indent=1).splitlines():
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([x if isinstance(x, (str, int)) else _g(x) for x in r])
    return buf.getvalue()


def _json(meta: dict, body: dict) -> str:
    return json.dumps({"metadata": meta, **body}, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# commands


def _cmd_coeffs(cfg: RunConfig) -> str:
    from .moments import expansion_coeffs

    c = expansion_coeffs(cfg.sigma)
    if cfg.sigma < 1.0:
        gap = abs(cfg.sigma * c.a[0, 1] - c.a[0, 0])
        if gap > 1e-6 * abs(c.a[0, 0]):
            raise ArithmeticError(f"coefficient identity violated: |sigma a01 - a00| = {gap:.3g}")
    body = json.loads(c.to_json())
    if cfg.format == "csv":
        rows = []
        for name, tab, sig in (("a", c.a, cfg.sigma), ("A", c.A, 1.0)):
            for n in range(tab.shape[0]):
                for m in range(tab.shape[1]):
                    if np.isfinite(tab[n, m]):
                        rows.append([name, _g(sig), n, m, tab[n, m]])
        return _csv(_metadata(cfg), ["table", "sigma", "n", "m", "value"], rows)
    return _json(_metadata(cfg), {"coefficients": body})


def _cmd_saddle(cfg: RunConfig) -> str:
    from .saddle import psi_expansion, psi_saddle

    rows = []
    for t in cfg.taus():
        s = psi_saddle(cfg.sigma, float(t))
        e = psi_expansion(cfg.sigma, float(t)) if t >= 3.0 else None
        rows.append([s.tau, s.kappa, s.psi, s.log_psi,
                     "" if e is None else _g(e.log_psi), "" if e is None else _g(e.log_uncertainty)])
    header = ["tau", "kappa", "psi", "log_psi", "log_psi_expansion", "log_uncertainty_expansion"]
    if cfg.format == "csv":
        return _csv(_metadata(cfg), header, rows)
    return _json(_metadata(cfg), {"curve": [dict(zip(header, [_g(v) if not isinstance(v, str) else (v or None)
                                                              for v in r])) for r in rows]})


def _cmd_mc(cfg: RunConfig) -> str:
    from .random_model import RandomEulerConfig, mc_tail, tail_sd

    y = cfg.y if cfg.y is not None else 1e4
    rc = RandomEulerConfig(cfg.sigma, y, cfg.samples, seed=cfg.seed, tail_eps=None)
    tails = mc_tail(rc, cfg.taus())
    meta = _metadata(cfg, y_used=_g(y), tail_sd=_g(tail_sd(cfg.sigma, y)),
                     event="|L| > e^gamma tau" if cfg.sigma == 1.0 else "log|L| > tau")
    rows = [[t.tau, t.prob, t.std_err] for t in tails]
    if cfg.format == "csv":
        return _csv(meta, ["tau", "prob", "std_err"], rows)
    return _json(meta, {"tails": [{"tau": _g(a), "prob": _g(b), "std_err": _g(c)} for a, b, c in rows]})


def _cmd_empirical(cfg: RunConfig) -> str:
    from .dirichlet import default_y
    from .empirical import character_samples, exceptional_census, exceptional_threshold, phi1_tail, phi_tail
    from .random_model import model_tail

    y = cfg.y if cfg.y is not None else default_y(cfg.sigma, cfg.q)
    s = character_samples(cfg.q, cfg.sigma, y)
    taus = cfg.taus()
    curve = phi1_tail(s, taus) if cfg.sigma == 1.0 else phi_tail(s, taus)
    psi = model_tail(cfg.sigma, taus, 1e4)
    extra = {"y_used": _g(y), "y_model": _g(1e4), "denominator": "q", "principal_character": "excluded"}
    if cfg.sigma < 1.0:
        extra["exceptional_threshold"] = _g(exceptional_threshold(cfg.q, cfg.sigma))
        extra["exceptional_fraction"] = _g(exceptional_census(s, cfg.sigma))
    meta = _metadata(cfg, **extra)
    rows = []
    for t, p, m in zip(curve.taus, curve.probs, psi):
        rows.append([t, p, m, p / m if m > 0 else float("nan"), abs(p / m - 1) if m > 0 else float("nan")])
    header = ["tau", "phi", "psi", "ratio", "deviation"]
    if cfg.format == "csv":
        return _csv(meta, header, rows)
    return _json(meta, {"curve": [dict(zip(header, map(_g, r))) for r in rows]})


def _cmd_discrepancy(cfg: RunConfig) -> str:
    from .empirical import character_samples, discrepancy

    s = character_samples(cfg.q, cfg.sigma, cfg.y)
    rep = discrepancy(s, cfg.sigma, m=cfg.grid, T=cfg.kernel_T)
    body = json.loads(rep.to_json())
    if cfg.format == "csv":
        keys = [k for k in sorted(body) if k not in ("metadata", "argmax")]
        return _csv(_metadata(cfg, **body["metadata"]), ["field", "value"],
                    [[k, str(body[k])] for k in keys] + [["argmax", ";".join(body["argmax"] or [])]])
    return _json(_metadata(cfg), {"report": body})


def _cmd_kernel_test(cfg: RunConfig) -> str:
    from .acceptance import kernel_trials

    t_range = (cfg.kernel_T, cfg.kernel_T) if cfg.kernel_T is not None else (5.0, 50.0)
    trials = kernel_trials(cfg.samples, cfg.seed, t_range)
    worst = min(t.slack for t in trials)
    # smallest constant C with |1_R - W| <= C * envelope on these trials
    c_emp = max(abs(t.indicator - t.smoothed) / t.envelope for t in trials if t.envelope > 0)
    meta = _metadata(cfg, min_slack=_g(worst), measured_constant=_g(c_emp), bound_holds=bool(worst >= -1e-6))
    header = ["a1", "a2", "b1", "b2", "T", "x", "y", "indicator", "smoothed", "envelope", "slack"]
    rows = [[t.rect.a1, t.rect.a2, t.rect.b1, t.rect.b2, t.T, t.z.real, t.z.imag,
             t.indicator, t.smoothed, t.envelope, t.slack] for t in trials]
    if cfg.format == "csv":
        return _csv(meta, header, rows)
    return _json(meta, {"trials": [dict(zip(header, map(_g, r))) for r in rows]})


def _cmd_selftest(cfg: RunConfig, criteria) -> tuple[str, bool]:
    from .acceptance import format_line, run_all

    results = run_all(criteria, echo=lambda line: print(line, file=sys.stderr, flush=True))
    ok = all(r.passed for r in results)
    if cfg.format == "json":
        body = {"results": [{"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
                            for r in results], "passed": ok}
        return _json(_metadata(cfg), body), ok
    lines = [format_line(r) for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return "\n".join(lines) + "\n", ok


_COMMANDS = {
    "coeffs": _cmd_coeffs,
    "saddle": _cmd_saddle,
    "mc": _cmd_mc,
    "empirical": _cmd_empirical,
    "discrepancy": _cmd_discrepancy,
    "kernel-test": _cmd_kernel_test,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=int, help="prime modulus")
    common.add_argument("--sigma", type=float, default=0.75)
    common.add_argument("--tau-min", type=float)
    common.add_argument("--tau-max", type=float)
    common.add_argument("--tau-steps", type=int, default=9)
    common.add_argument("--y", type=float, help="Euler product cutoff")
    common.add_argument("--samples", type=int, default=10**6, help="Monte Carlo samples or kernel trials")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=int, default=32, help="quantile grid size m")
    common.add_argument("--kernel-T", type=float, help="smoothing parameter T")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json", "text"))
    common.add_argument("--threads", type=int, help="worker threads (falls back to LDIST_THREADS)")

    p = argparse.ArgumentParser(prog="ldist", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "coeffs": "expansion coefficient table",
        "saddle": "saddle-point tail curve",
        "mc": "Monte Carlo tails of the random model",
        "empirical": "character tail curve against the model",
        "discrepancy": "rectangle discrepancy report",
        "kernel-test": "smoothing kernel validation",
        "selftest": "run the acceptance suite",
    }
    for name, h in helps.items():
        sp = sub.add_parser(name, parents=[common], help=h)
        if name == "selftest":
            sp.add_argument("--criteria", help="comma-separated criterion numbers (default all)")
    return p


def _config(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command, q=ns.q, sigma=ns.sigma, tau_min=ns.tau_min, tau_max=ns.tau_max,
        tau_steps=ns.tau_steps, y=ns.y, samples=ns.samples, seed=ns.seed, grid=ns.grid,
        kernel_T=ns.kernel_T, out=ns.out, format=ns.format or _FORMATS[ns.command], threads=ns.threads,
    )


def run(cfg: RunConfig, criteria=None) -> int:
    from .random_model import set_threads

    cfg.validate()
    set_threads(cfg.threads)
    # open the destination first so an unwritable path fails before any work
    sink = open(cfg.out, "w", encoding="utf-8", newline="") if cfg.out else None
    try:
        status = EXIT_OK
        if cfg.command == "selftest":
            text, ok = _cmd_selftest(cfg, criteria)
            status = EXIT_OK if ok else EXIT_FAILED
        else:
            text = _COMMANDS[cfg.command](cfg)
        (sink or sys.stdout).write(text)
    finally:
        if sink:
            sink.close()
    return status


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config(ns)
        criteria = None
        if ns.command == "selftest" and ns.criteria:
            criteria = [int(k) for k in ns.criteria.split(",")]
        return run(cfg, criteria)
    except (ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
