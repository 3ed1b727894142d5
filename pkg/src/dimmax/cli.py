"""Batch command-line front end.

Four subcommands share one artifact convention:

  evaluate   entropy / Lyapunov exponent / dimension of a given weight vector,
             by the operator evaluator and (budget permitting) the cylinder
             evaluator with rigorous error brackets;
  optimize   maximize the dimension over the n-digit simplex;
  sweep      optimize over an increasing list of n and extrapolate the limit;
  diagnose   transfer-operator facts: stochasticity, derivative contraction,
             correlation decay certificates, pressure probe.

Every run writes <command>_report.json (deterministic for a fixed config and
seed; validated against the shipped schema) plus <command>_meta.json for
timestamps and versions.  With a delimited format selected it also writes a
CSV of weights, a TSV of the log-log tail with the fitted line, and renders
the matching PNG figures alongside (disable with --no-figures).

Exit codes: 0 success, 2 configuration error, 3 optimization did not
converge (partial artifacts are still written and flagged), 4 internal
numeric failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, measures, optimize, reports, tails, transfer
from .measures import ProbVec
from .transfer import CenteredIndicator, OperatorDiscretization

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    n_list: list[int] = field(default_factory=list)
    weights: list[float] | None = None
    depth: int | None = None
    iters: int = transfer.DEFAULT_ITERS
    nodes: int = transfer.DEFAULT_RESOLUTION
    tol: float = 1e-9
    agreement_tol: float | None = None
    max_iter: int = 500
    method: str = "fixed_point"
    seed: int = 0
    out_dir: str = "dimmax-out"
    format: str = "all"
    figures: bool = True
    m_max: int = 40

    def validate(self) -> None:
        if self.tol <= 0 or (self.agreement_tol is not None and self.agreement_tol <= 0):
            raise ConfigError("tolerances must be positive")
        if self.iters < 1 or self.nodes < 8 or self.max_iter < 1:
            raise ConfigError("iteration and node budgets must be positive (nodes >= 8)")
        if self.depth is not None and not 1 <= self.depth <= 30:
            raise ConfigError("cylinder depth must be in 1..30")
        if self.n is not None and self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.format not in ("json", "csv", "tsv", "all"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command in ("optimize",) and self.n is None:
            raise ConfigError("optimize requires --n")
        if self.command == "sweep" and not self.n_list:
            raise ConfigError("sweep requires --n-list")
        if self.command == "evaluate" and not self.weights:
            raise ConfigError("evaluate requires --weights")
        if self.command == "diagnose" and not self.weights and self.n is None:
            raise ConfigError("diagnose requires --weights or --n")


def _parse_weights(spec: str) -> list[float]:
    spec = spec.strip()
    if spec.startswith("@"):
        with open(spec[1:]) as fh:
            spec = fh.read()
    parts = [s for s in spec.replace(",", " ").split() if s]
    if not parts:
        raise ConfigError("empty weight list")
    return [float(s) for s in parts]


def _parse_n_list(spec: str) -> list[int]:
    return [int(s) for s in spec.replace(",", " ").split() if s]


def _read_config_file(path: str) -> dict:
    """Flat key=value file with the same keys as the long flags."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimmax",
        description="Maximize the dimension of digit-Bernoulli measures for the Gauss map.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("evaluate", "entropy, Lyapunov exponent, dimension of a weight vector"),
        ("optimize", "maximize dimension on the n-digit simplex"),
        ("sweep", "optimize over increasing n and extrapolate the supremum"),
        ("diagnose", "transfer-operator diagnostics"),
    ]:
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="flat key=value config file; flags override it")
        sp.add_argument("--n", type=int)
        sp.add_argument("--n-list", dest="n_list", type=str)
        sp.add_argument("--weights", type=str, help="comma list or @file")
        sp.add_argument("--depth", type=int, help="cylinder enumeration depth")
        sp.add_argument("--iters", type=int, help="operator iterations (default 60)")
        sp.add_argument("--nodes", type=int, help="discretization resolution (default 64)")
        sp.add_argument("--tol", type=float, help="criticality residual tolerance")
        sp.add_argument("--agreement-tol", dest="agreement_tol", type=float)
        sp.add_argument("--max-iter", dest="max_iter", type=int)
        sp.add_argument("--method", choices=["fixed_point", "exp_gradient"])
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out-dir", dest="out_dir", type=str)
        sp.add_argument("--format", choices=["json", "csv", "tsv", "all"])
        sp.add_argument("--no-figures", dest="figures", action="store_false", default=None)
        sp.add_argument("--m-max", dest="m_max", type=int, help="correlation decay horizon")
    return parser


_CONVERTERS = {
    "n": int, "depth": int, "iters": int, "nodes": int, "max_iter": int,
    "seed": int, "m_max": int, "tol": float, "agreement_tol": float,
    "method": str, "out_dir": str, "format": str,
    "weights": _parse_weights, "n_list": _parse_n_list,
    "figures": lambda s: s.lower() in ("1", "true", "yes", "on"),
}


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    if getattr(args, "config", None):
        for key, raw in _read_config_file(args.config).items():
            if key not in _CONVERTERS:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, _CONVERTERS[key](raw))
    for key, conv in _CONVERTERS.items():
        val = getattr(args, key, None)
        if val is None:
            continue
        if key == "weights":
            val = _parse_weights(val)
        elif key == "n_list":
            val = _parse_n_list(val)
        setattr(cfg, key, val)
    cfg.validate()
    return cfg


def _probvec(weights: list[float]) -> ProbVec:
    total = sum(weights)
    if abs(total - 1.0) > 1e-6:
        raise ConfigError(f"weights sum to {total!r}; expected 1 within 1e-6")
    return ProbVec.normalized(weights)


def _eval_to_dict(rep: measures.EvalReport) -> dict:
    return reports.to_jsonable(rep)


# -- subcommands --------------------------------------------------------------


def cmd_evaluate(cfg: RunConfig, disc: OperatorDiscretization):
    p = _probvec(cfg.weights)
    op = measures.dimension(p, method="operator", iters=cfg.iters, disc=disc)
    results = {"weights": list(p.weights), "operator": _eval_to_dict(op)}
    n_eff = int(np.count_nonzero(p.weights))
    depth = cfg.depth or measures.default_cylinder_depth(n_eff)
    if n_eff ** depth <= measures.CYLINDER_BUDGET and depth >= 4:
        cyl = measures.dimension(p, method="cylinder", depth=depth)
        gap = abs(cyl.lyapunov - op.lyapunov)
        combined = cyl.lyapunov_err + op.lyapunov_err + 1e-12
        allowed = cfg.agreement_tol if cfg.agreement_tol is not None else combined
        results["cylinder"] = _eval_to_dict(cyl)
        results["agreement"] = {"lyapunov_gap": gap, "combined_err": combined,
                                "allowed": allowed,
                                "within_errors": bool(gap <= allowed)}
    else:
        results["agreement"] = None
        results["cylinder_note"] = (f"cylinder depth {depth} skipped "
                                    "(outside budget or too shallow to be informative)")
    return results, p, None, EXIT_OK


def cmd_optimize(cfg: RunConfig, disc: OperatorDiscretization):
    res = optimize.maximize_on_simplex(cfg.n, tol=cfg.tol, max_iter=cfg.max_iter,
                                       method=cfg.method, disc=disc, iters=cfg.iters)
    p, d = res.p, res.dimension
    fit = None
    k_lo, k_hi = tails.default_fit_range(cfg.n)
    if k_hi <= cfg.n and k_hi - k_lo >= 3:
        fit = tails.fit_tail_exponent(p, k_lo, k_hi)
    audit = tails.check_ratio_bounds(p, d, slack=10.0 * res.residual)
    results = {
        "n": cfg.n,
        "weights": list(p.weights),
        "report": _eval_to_dict(res.report),
        "grad": reports.to_jsonable(res.grad),
        "converged": res.converged,
        "iterations": res.state.iter,
        "residual_history": list(res.state.residual_history),
        "tail_fit": reports.to_jsonable(fit) if fit else None,
        "ratio_audit": {"violations": len(audit.violations),
                        "pairs_checked": audit.pairs_checked,
                        "worst_margin": audit.worst_margin,
                        "slack": audit.slack},
    }
    return results, p, fit, (EXIT_OK if res.converged else EXIT_NONCONVERGED)


def cmd_sweep(cfg: RunConfig, disc: OperatorDiscretization):
    sw = optimize.sweep_n(cfg.n_list, tol=cfg.tol, max_iter=cfg.max_iter,
                          method=cfg.method, disc=disc, iters=cfg.iters)
    per_n = [{
        "n": e.n, "weights": list(e.p.weights), "dimension": e.dimension,
        "residual": e.residual, "converged": e.converged, "iterations": e.iterations,
    } for e in sw.per_n]
    results = {"per_n": per_n, "D_estimate": sw.D_estimate,
               "extrapolation_note": sw.extrapolation_note,
               "fit_residual": sw.fit_residual}
    final = sw.per_n[-1]
    fit = None
    k_lo, k_hi = tails.default_fit_range(final.n)
    if k_hi <= final.n and k_hi - k_lo >= 3:
        fit = tails.fit_tail_exponent(final.p, k_lo, k_hi)
        results["final_tail_fit"] = reports.to_jsonable(fit)
    code = EXIT_OK if all(e.converged for e in sw.per_n) else EXIT_NONCONVERGED
    return results, final.p, fit, code, sw


def cmd_diagnose(cfg: RunConfig, disc: OperatorDiscretization):
    if cfg.weights:
        p = _probvec(cfg.weights)
    else:
        p = optimize.maximize_on_simplex(cfg.n, tol=cfg.tol, disc=disc,
                                         iters=cfg.iters).p
    ones = np.ones(disc.node_count)
    stoch = float(np.abs(transfer.apply_operator(p, ones, disc) - 1.0).max())
    contraction = transfer.contraction_check(p, disc, seed=cfg.seed)
    corr = transfer.correlation_decay(
        p, v=lambda x: np.cos(np.pi * x), w=lambda x: np.sin(3.0 * x) + x * x,
        m_max=cfg.m_max, disc=disc, iters=cfg.iters)
    corr_ind = transfer.correlation_decay(
        p, v=lambda x: np.cos(np.pi * x), w=CenteredIndicator(1),
        m_max=min(cfg.m_max, 10), disc=disc, iters=cfg.iters)
    probe = transfer.pressure_probe(p, disc=disc)
    lam, lam_err = measures.lyapunov_by_operator(p, disc, cfg.iters)
    results = {
        "weights": list(p.weights),
        "stochasticity": {"max_deviation": stoch},
        "contraction": {
            "sup_ratios": list(contraction.sup_ratios),
            "deriv_ratios": list(contraction.deriv_ratios),
            "worst_sup": contraction.worst_sup,
            "worst_deriv": contraction.worst_deriv,
            "slack": contraction.slack,
            "flagged": contraction.flagged,
        },
        "correlation": {
            "certificates": list(corr.certificates),
            "direct": {str(k): v for k, v in corr.direct.items()},
            "final_certificate": float(corr.certificates[-1]),
            "indicator_certificate_max": float(np.max(corr_ind.certificates)),
        },
        "pressure": {
            "t_grid": list(probe.t_grid), "logs": list(probe.logs),
            "d1": probe.d1, "d2": probe.d2,
            "lyapunov_reference": lam,
            "d1_gap": abs(probe.d1 - lam),
        },
    }
    return results, p, (contraction, corr, probe), EXIT_OK


# -- driver -------------------------------------------------------------------


def run(cfg: RunConfig) -> int:
    t0 = time.monotonic()
    cfg.validate()
    os.makedirs(cfg.out_dir, exist_ok=True)
    disc = OperatorDiscretization(resolution=cfg.nodes)
    np.random.seed(cfg.seed)  # batteries draw through default_rng(seed); this guards strays

    sweep_obj = None
    diag_objs = None
    if cfg.command == "evaluate":
        results, p, fit, code = cmd_evaluate(cfg, disc)
    elif cfg.command == "optimize":
        results, p, fit, code = cmd_optimize(cfg, disc)
    elif cfg.command == "sweep":
        results, p, fit, code, sweep_obj = cmd_sweep(cfg, disc)
    elif cfg.command == "diagnose":
        results, p, diag_objs, code = cmd_diagnose(cfg, disc)
        fit = None
    else:
        raise ConfigError(f"unknown command {cfg.command!r}")

    prefix = os.path.join(cfg.out_dir, cfg.command)
    artifacts = []

    doc = reports.report_envelope(cfg.command, asdict(cfg), results)
    artifacts.append(reports.write_json(f"{prefix}_report.json", doc))

    want_csv = cfg.format in ("csv", "all")
    want_tsv = cfg.format in ("tsv", "all")
    if want_csv:
        rows = [(k + 1, float(w)) for k, w in enumerate(p.weights)]
        artifacts.append(reports.write_csv(f"{prefix}_weights.csv", rows, ["k", "p_k"]))
    if want_tsv and fit is not None and not isinstance(fit, tuple):
        rows = []
        for k in range(1, p.support_n + 1):
            if p.weights[k - 1] <= 0:
                continue
            lk = float(np.log(k))
            rows.append((lk, float(np.log(p.weights[k - 1])), fit.slope * lk + fit.intercept))
        artifacts.append(reports.write_tsv(f"{prefix}_tail.tsv", rows,
                                           ["log_k", "log_p_k", "fit"]))
    if want_tsv and cfg.command in ("optimize", "sweep"):
        # compensated-weight table: third column flat iff the tail law holds
        d_final = (results["report"]["dimension"] if cfg.command == "optimize"
                   else results["per_n"][-1]["dimension"])
        comp = tails.tail_table(p, d_final)
        artifacts.append(reports.write_tsv(f"{prefix}_compensated.tsv",
                                           [(int(k), pk, c) for k, pk, c in comp],
                                           ["k", "p_k", "p_k_k_pow_2d"]))

    if cfg.figures and cfg.format != "json":
        from . import figures

        if cfg.command == "evaluate":
            artifacts.append(figures.weights_figure(p.weights, f"{prefix}_weights.png"))
        elif cfg.command == "optimize":
            artifacts.append(figures.tail_figure(p.weights, fit,
                                                 results["report"]["dimension"],
                                                 f"{prefix}_tail.png"))
            artifacts.append(figures.convergence_figure(results["residual_history"],
                                                        f"{prefix}_convergence.png"))
        elif cfg.command == "sweep":
            ns = [e.n for e in sweep_obj.per_n]
            artifacts.append(figures.sweep_figure(ns, sweep_obj.dimensions,
                                                  sweep_obj.D_estimate,
                                                  f"{prefix}_dimensions.png"))
            artifacts.append(figures.tail_figure(p.weights, fit,
                                                 sweep_obj.per_n[-1].dimension,
                                                 f"{prefix}_tail.png"))
        elif cfg.command == "diagnose":
            contraction, corr, probe = diag_objs
            artifacts.append(figures.diagnostics_figure(contraction, corr, probe,
                                                        f"{prefix}_diagnostics.png"))

    meta = {
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "elapsed_seconds": time.monotonic() - t0,
        "version": __version__,
        "numpy": np.__version__,
        "artifacts": artifacts,
        "exit_code": code,
    }
    reports.write_json(f"{prefix}_meta.json", meta)
    print(json.dumps({"command": cfg.command, "exit_code": code,
                      "report": f"{prefix}_report.json"}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (measures.NumericalError, transfer.NonConvergenceError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
