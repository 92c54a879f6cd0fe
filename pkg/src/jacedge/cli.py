"""Command-line front end: ``jacedge <command> [options]``.

Exit codes: 0 success, 2 configuration error, 3 invalid model,
4 numerical non-convergence, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .coefficients import (
    CoefficientModel,
    VerblunskyModel,
    chebyshev_model,
    free_model,
    load_model,
    szego_sieve_map,
)
from .density import DensityControls, density_curve
from .edge import edge_data
from .errors import (
    ConfigError,
    JacEdgeError,
    ModelValidityError,
    NumericResolutionError,
)

COMMANDS = ("density", "edge", "predict", "verify", "opuc", "subordinate", "selftest")
EXIT_OK, EXIT_CONFIG, EXIT_MODEL, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4, 5

_DEFAULTS = {
    "grid": "1e-4:1e-1:25",
    "linear": False,
    "tol_rel": 1e-6,
    "max_doublings": 5,
    "horizon": 10**5,
    "out": None,
    "format": "csv",
    "thm4_variant": "corrected",
    "workers": 1,
    "series": None,
}


@dataclass
class GridSpec:
    lo: float
    hi: float
    points: int
    log_spaced: bool = True

    def values(self):
        if self.log_spaced:
            return np.logspace(math.log10(self.lo), math.log10(self.hi), self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass
class RunConfig:
    """Fully validated options of one CLI invocation."""

    command: str
    model_path: str | None
    grid: GridSpec
    tol_rel: float = 1e-6
    max_doublings: int = 5
    horizon: int = 10**5
    out: str | None = None
    format: str = "csv"
    thm4_variant: str = "corrected"
    workers: int = 1
    series_path: str | None = None

    @property
    def controls(self):
        return DensityControls(tol_rel=self.tol_rel, max_doublings=self.max_doublings)


def _parse_grid(text, linear, errors):
    parts = str(text).split(":")
    if len(parts) != 3:
        errors.append(f"grid {text!r} is not of the form lo:hi:points")
        return None
    try:
        lo, hi, pts = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        errors.append(f"grid {text!r} has non-numeric fields")
        return None
    return GridSpec(lo, hi, pts, not linear)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="jacedge", description="Spectral density edge asymptotics for Jacobi matrices.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", help="model JSON file")
    p.add_argument("--config", help="JSON file of option defaults (flags override it)")
    p.add_argument("--grid", help="lo:hi:points (delta, or |theta| for opuc)")
    p.add_argument("--linear", action="store_const", const=True, default=None, help="linearly spaced grid")
    p.add_argument("--tol-rel", type=float)
    p.add_argument("--max-doublings", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--thm4-variant", choices=("corrected", "printed"))
    p.add_argument("--series", help="expansion JSON to verify instead of the built-in prediction")
    p.add_argument("--workers", type=int)
    return p


def parse_config(argv):
    """Parse and validate command-line options into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Listing every violated constraint.
    """
    ns = build_parser().parse_args(argv)
    opts = dict(_DEFAULTS)
    if ns.config:
        try:
            with open(ns.config) as fh:
                filed = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(filed, dict):
            raise ConfigError("config file must hold a JSON object")
        filed = {k.replace("-", "_"): v for k, v in filed.items()}
        unknown = set(filed) - set(_DEFAULTS) - {"model"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        opts.update(filed)
    for key in list(_DEFAULTS) + ["model"]:
        val = getattr(ns, key, None)
        if val is not None:
            opts[key] = val

    errors = []
    grid = _parse_grid(opts["grid"], bool(opts["linear"]), errors)
    upper = math.pi if ns.command == "opuc" else 4.0
    if grid is not None:
        if not 0 < grid.lo < grid.hi < upper:
            errors.append(f"grid needs 0 < lo < hi < {upper:g}, got {grid.lo}:{grid.hi}")
        if grid.points < 2:
            errors.append("grid needs at least 2 points")
    if not opts["tol_rel"] > 0:
        errors.append("tol-rel must be positive")
    if opts["max_doublings"] < 0:
        errors.append("max-doublings must be non-negative")
    if opts["horizon"] < 10:
        errors.append("horizon must be at least 10")
    if opts["workers"] < 1:
        errors.append("workers must be at least 1")
    if opts["format"] not in ("csv", "json"):
        errors.append(f"unknown format {opts['format']!r}")
    if opts["thm4_variant"] not in ("corrected", "printed"):
        errors.append(f"unknown thm4 variant {opts['thm4_variant']!r}")
    if ns.command != "selftest" and not opts.get("model"):
        errors.append(f"{ns.command} needs --model")
    if errors:
        raise ConfigError("; ".join(errors))
    return RunConfig(
        command=ns.command,
        model_path=opts.get("model"),
        grid=grid,
        tol_rel=float(opts["tol_rel"]),
        max_doublings=int(opts["max_doublings"]),
        horizon=int(opts["horizon"]),
        out=opts["out"],
        format=opts["format"],
        thm4_variant=opts["thm4_variant"],
        workers=int(opts["workers"]),
        series_path=opts["series"],
    )


# -- output helpers -------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return repr(v) if math.isfinite(v) else "nan"


def _emit_table(cfg, header, rows, meta=None):
    if cfg.format == "json":
        payload = {"columns": header, "rows": [[_json_num(x) for x in r] for r in rows]}
        if meta:
            payload.update(meta)
        text = json.dumps(payload, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        text = buf.getvalue()
    _write(cfg, text)


def _json_num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    return v if math.isfinite(v) else None


def _emit_json(cfg, obj):
    _write(cfg, json.dumps(obj, indent=2, default=_json_num) + "\n")


def _write(cfg, text):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _jacobi(model):
    return szego_sieve_map(model) if isinstance(model, VerblunskyModel) else model


# -- commands ---------------------------------------------------------------


def _cmd_density(cfg, model):
    curve = density_curve(_jacobi(model), cfg.grid.values(), cfg.controls, cfg.workers)
    rows = list(zip(curve.deltas, curve.x, curve.f, curve.logf, curve.converged, curve.n_max_used))
    _emit_table(cfg, ["delta", "x", "f", "logf", "converged", "n_max_used"], rows)
    return EXIT_OK if np.all(curve.converged) else EXIT_NUMERIC


def _cmd_edge(cfg, model):
    jm = _jacobi(model)
    rows = []
    for d in cfg.grid.values():
        ed = edge_data(jm, 2.0 - d)
        rows.append((d, ed.x, ed.N, ed.g, ed.h, ed.kappa_next, -2 * ed.g, 2 * ed.h))
    _emit_table(cfg, ["delta", "x", "N", "g", "h", "kappa_next", "band_centre", "band_halfwidth"], rows)
    return EXIT_OK


def _load_series(cfg, model):
    from .asymptotics import ExpansionSeries, predict_series

    if cfg.series_path:
        try:
            with open(cfg.series_path) as fh:
                return ExpansionSeries.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read series {cfg.series_path}: {exc}") from exc
    return predict_series(model, cfg.thm4_variant)


def _cmd_predict(cfg, model):
    _emit_json(cfg, _load_series(cfg, model).to_dict())
    return EXIT_OK


def _cmd_verify(cfg, model):
    from .asymptotics import verify_expansion

    series = _load_series(cfg, model)
    rep = verify_expansion(model, series, cfg.grid.values(), cfg.controls, cfg.workers,
                           subordinacy_horizon=cfg.horizon)
    _emit_json(cfg, rep.to_dict())
    return {"PASS": EXIT_OK, "FAIL": EXIT_VERIFY}.get(rep.verdict, EXIT_NUMERIC)


def _cmd_opuc(cfg, model):
    from .asymptotics import predict_series

    if not isinstance(model, VerblunskyModel):
        raise ConfigError("opuc needs a Verblunsky model")
    thetas = cfg.grid.values()
    half = 0.5 * thetas
    deltas = 4.0 * np.sin(0.5 * half) ** 2
    curve = density_curve(szego_sieve_map(model), deltas, cfg.controls, cfg.workers)
    logw = np.log(2 * math.pi * np.sin(half)) + curve.logf
    series = predict_series(model)
    var = np.sin(half) if series.variable == "sin-half-theta" else thetas
    pred = -series.evaluate(var)
    rows = list(zip(thetas, curve.x, logw, pred, logw - pred, curve.converged))
    _emit_table(cfg, ["theta", "x", "logw", "predicted", "residual", "converged"], rows,
                meta={"series": series.to_dict()})
    return EXIT_OK if np.all(curve.converged) else EXIT_NUMERIC


def _cmd_subordinate(cfg, model):
    from .recurrence import dirichlet_subordinacy_check, subordinate_at_edge

    jm = _jacobi(model)
    cert = subordinate_at_edge(jm, horizon=cfg.horizon)
    sub = dirichlet_subordinacy_check(jm, horizon=cfg.horizon)
    _emit_json(cfg, {
        "holds": cert.holds,
        "c_lower": cert.c_lower,
        "c_upper": cert.c_upper,
        "lower_ok": cert.lower_ok,
        "upper_ok": cert.upper_ok,
        "monotone_ok": cert.monotone_ok,
        "backward_M": cert.backward_M,
        "agreement": cert.agreement,
        "window": list(cert.window) if cert.window else None,
        "log_v_end": float(cert.log_v[-1]),
        "dirichlet": {"status": sub.status, "slope": sub.slope, "reason": sub.reason},
        "details": cert.details,
    })
    return EXIT_OK if cert.holds else EXIT_VERIFY


def selftest_checks():
    """Closed-form and invariant checks; returns ``[(name, ok, detail)]``."""
    from .asymptotics import beta_integral_quadrature, log_gamma, series_coeffs, thm3_leading, thm4_series, thm5_leading, thm6_series
    from .coefficients import TailClass
    from .density import density
    from .edge import q_sup
    from .recurrence import ScaledSolution, dirichlet_subordinacy_check, wronskian_drift

    out = []
    xs = np.linspace(-1.9, 1.9, 21)
    err = max(abs(density(free_model(), x).f / (math.sqrt(4 - x * x) / (2 * math.pi)) - 1) for x in xs)
    out.append(("free density", err <= 1e-8, f"max rel err {err:.2e}"))
    err = max(abs(density(chebyshev_model(), x).f * math.pi * math.sqrt(4 - x * x) - 1) for x in xs)
    out.append(("Chebyshev density", err <= 1e-8, f"max rel err {err:.2e}"))
    st = dirichlet_subordinacy_check(chebyshev_model(), horizon=10**4).status
    out.append(("Chebyshev edge solution subordinate", st == "subordinate", st))
    m = CoefficientModel(a_terms=((0.25, 0.5),))
    u0 = ScaledSolution(1.0, 0.0, 0.0, 1)
    v0 = ScaledSolution(0.0, 1.0, 0.0, 1)
    d = wronskian_drift(m, 1.7, u0, v0, 10**5)
    out.append(("Wronskian constancy", d <= 1e-10, f"drift {d:.2e}"))
    rel = 0.0
    for c, t in ((0.25, 0.5), (0.3, 0.7), (0.1, 1.4)):
        rel = max(rel, abs(thm4_series(c, t).terms[0][0] / thm3_leading(TailClass(t, 2 * c, "a")).terms[0][0] - 1))
    out.append(("T0 = Q1", rel <= 1e-12, f"rel {rel:.1e}"))
    rel = 0.0
    for D, t in ((0.5, 0.5), (0.3, 0.25), (0.7, 0.8)):
        p0 = thm6_series(D, t).terms[0][0] * 2 ** (1 / t - 1)
        rel = max(rel, abs(p0 / thm5_leading(D, t).terms[0][0] - 1))
    out.append(("P0 2^(1/tau-1) = P1", rel <= 1e-12, f"rel {rel:.1e}"))
    err = 0.0
    for b in (1 / 3, 0.5, 2 / 3, 1.0, 1.5):
        ref = math.exp(log_gamma(1 / b - 0.5) - log_gamma(1 / b)) * math.sqrt(math.pi) / 2
        err = max(err, abs(beta_integral_quadrature(b, 0) - ref))
    out.append(("Beta integral quadrature", err <= 1e-10, f"abs err {err:.1e}"))
    try:
        for k in ("F", "H", "G"):
            series_coeffs(k, 6)
        out.append(("series validation", True, "F, H, G to l=6"))
    except JacEdgeError as exc:
        out.append(("series validation", False, str(exc)))
    q = q_sup(0.01)
    out.append(("q_sup(0.01)", abs(q - 0.0066667) <= 1e-5, f"{q:.7f}"))
    return out


def _cmd_selftest(cfg, model):
    results = selftest_checks()
    rows = [(n, "PASS" if ok else "FAIL", d) for n, ok, d in results]
    if cfg.format == "json":
        _emit_json(cfg, [{"check": n, "status": s, "detail": d} for n, s, d in rows])
    else:
        _write(cfg, "".join(f"{s}  {n}: {d}\n" for n, s, d in rows))
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY


_RUNNERS = {
    "density": _cmd_density,
    "edge": _cmd_edge,
    "predict": _cmd_predict,
    "verify": _cmd_verify,
    "opuc": _cmd_opuc,
    "subordinate": _cmd_subordinate,
    "selftest": _cmd_selftest,
}


def run(cfg):
    """Execute a validated configuration and return the exit status."""
    model = load_model(cfg.model_path) if cfg.model_path else None
    if cfg.command in ("density", "edge", "subordinate") and model is not None:
        if not isinstance(model, (CoefficientModel, VerblunskyModel)):
            raise ConfigError("unsupported model")
    return _RUNNERS[cfg.command](cfg, model)


def main(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelValidityError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except NumericResolutionError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except JacEdgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
