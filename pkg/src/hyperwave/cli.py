"""Command-line front end.

Every subcommand prints a JSON summary (or CSV rows) on stdout, or writes
it atomically to ``--output``. Exit codes: 0 success, 2 invalid input,
3 numerical nonconvergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dispersive, kernels, lwp, space, transforms, wave
from .errors import NonConvergenceError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 2, 3


@dataclass(frozen=True)
class RunConfig:
    n: int = 3
    rho_tilde: float | None = None
    tol: float = 1e-10
    tail_tol: float = 1e-8
    r_max: float = 8.0
    format: str = "json"
    output: str | None = None
    quiet: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValidationError("n must be an integer >= 2")
        if not (self.tol > 0 and self.tail_tol > 0):
            raise ValidationError("tolerances must be positive")
        if not self.r_max > 0:
            raise ValidationError("r_max must be positive")
        if self.format not in ("json", "csv"):
            raise ValidationError("format must be json or csv")

    @property
    def params(self) -> space.SpaceParams:
        return space.SpaceParams(self.n, self.rho_tilde)


# ---------------------------------------------------------------------------
# helpers


def _floats(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from exc


def _complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ValidationError(f"expected a real or complex number, got {text!r}") from exc


def _rational(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"expected a rational number, got {text!r}") from exc


DATA = {
    "gaussian": lambda r: np.exp(-r * r),
    "bump": lambda r: np.where(r < 1.0, np.exp(-1.0 / np.maximum(1.0 - r * r, 1e-300)) * math.e, 0.0),
    "zero": lambda r: np.zeros_like(r),
}


def _data(name: str, amplitude: float, r_max: float) -> transforms.RadialFunction:
    if name not in DATA:
        raise ValidationError(f"unknown data profile {name!r}; choose from {sorted(DATA)}")
    base = DATA[name]
    decay = "compactly-supported" if name == "bump" else "gaussian"
    return transforms.RadialFunction.sample(lambda r: amplitude * base(r), r_max=r_max, decay=decay)


def _cplx_cols(prefix: str, z) -> dict:
    z = complex(z)
    return {f"{prefix}_re": z.real, f"{prefix}_im": z.imag}


# ---------------------------------------------------------------------------
# subcommands; each returns (summary, rows)


def cmd_phi(cfg, a):
    lam, rs = _floats(a["lam"]), _floats(a["r"])
    M = space.phi_matrix(cfg.params, lam, rs)
    rows = [{"lam": l, "r": r, **_cplx_cols("phi", M[i, j])} for i, l in enumerate(lam) for j, r in enumerate(rs)]
    return {"n": cfg.n, "count": len(rows)}, rows


def cmd_transform(cfg, a):
    p = cfg.params
    f = _data(a["data"], a["amplitude"], cfg.r_max)
    grid = transforms.adaptive_spectral_grid(p, lambda g: transforms.spherical_transform(p, f, g).values, cfg.tol)
    Hf = transforms.spherical_transform(p, f, grid)
    back = transforms.inverse_spherical_transform(p, Hf, f.grid, decay=f.decay, weights=f.weights)
    scale = max(float(np.max(np.abs(f.values))), 1e-300)
    err = float(np.max(np.abs(back.values - f.values))) / scale
    l2_space = transforms.lq_norm(p, f, 2.0)
    l2_spec = transforms.spectral_l2_norm(p, Hf)
    rows = [{"lam": float(l), **_cplx_cols("Hf", v)} for l, v in zip(grid.lambdas, Hf.values)]
    summary = {"n": cfg.n, "lam_max": float(grid.lambdas[-1]), "roundtrip_rel_err": err,
               "l2_space": l2_space, "l2_spectral": l2_spec}
    return summary, rows


def cmd_abel(cfg, a):
    p = cfg.params
    f = _data(a["data"], a["amplitude"], cfg.r_max)
    grid = transforms.adaptive_spectral_grid(p, lambda g: transforms.spherical_transform(p, f, g).values, cfg.tol)
    Hf = transforms.spherical_transform(p, f, grid)
    g = transforms.inverse_fourier_even(grid.lambdas, grid.weights, Hf.values)
    rs = np.array(_floats(a["r"]))
    if rs.size < 2 or rs[0] != 0.0:
        rs = np.concatenate([[0.0], rs[rs > 0]])
    via_abel = transforms.abel_inverse(p, g, rs)
    direct = transforms.inverse_spherical_transform(p, Hf, rs)
    ref = DATA[a["data"]](rs) * a["amplitude"]
    rows = [{"r": float(r), "abel": float(np.real(x)), "direct": float(np.real(y)), "exact": float(e)}
            for r, x, y, e in zip(rs, via_abel.values, direct.values, ref)]
    scale = max(float(np.max(np.abs(ref))), 1e-300)
    summary = {"n": cfg.n, "max_rel_diff": float(np.max(np.abs(via_abel.values - direct.values))) / scale}
    return summary, rows


def cmd_kernel(cfg, a):
    p = cfg.params
    sigma, tau = _complex(a["sigma"]), float(a["tau"])
    ts, rs = _floats(a["t"]), _floats(a["r"])
    kind = a["kind"]
    if kind == "w0":
        W = kernels.w0_grid(p, sigma, tau, ts, rs)
    elif kind == "winf":
        W = kernels.w_inf_grid(p, sigma, tau, ts, rs, cfg.tol)
    elif kind == "winf-tilde":
        W = kernels.w_inf_tilde_grid(p, sigma, tau, ts, rs, cfg.tol)
    else:
        raise ValidationError(f"unknown kernel kind {kind!r}")
    rows = [{"t": t, "r": r, **_cplx_cols("w", W[i, j])} for i, t in enumerate(ts) for j, r in enumerate(rs)]
    return {"n": cfg.n, "kind": kind, "count": len(rows)}, rows


def cmd_envelope(cfg, a):
    regs = tuple(x.strip() for x in a["regimes"].split(",")) if a["regimes"] else kernels.REGIMES
    tables = kernels.kernel_envelope_report(cfg.params, float(a["tau"]), regs, int(a["nt"]), int(a["nr"]))
    rows = [t.as_dict() for t in tables]
    return {"n": cfg.n, "tau": float(a["tau"]), "all_passed": all(t.passed for t in tables), "regimes": rows}, rows


def cmd_ks(cfg, a):
    p = cfg.params
    ks = dispersive.KSExponents(float(a["q"]), float(a["q_tilde"]))
    kappa = _data(a["data"], a["amplitude"], cfg.r_max)
    val = dispersive.ks_bound(p, kappa, ks, cfg.tail_tol)
    summary = {"n": cfg.n, "q": ks.q, "q_tilde": ks.q_tilde, "Q": ks.Q, "bound": val}
    return summary, [summary]


def cmd_dispersive(cfg, a):
    times = _floats(a["times"]) if a["times"] else None
    sigma = None if a["sigma"] is None else _complex(a["sigma"])
    rep = dispersive.dispersive_decay_probe(cfg.params, float(a["q"]), sigma, float(a["tau"]), times,
                                            probe=not a["no_probe"], window=a["window"])
    return rep.as_dict(), rep.rows()


def cmd_solve(cfg, a):
    p = cfg.params
    f = _data(a["data"], a["amplitude"], cfg.r_max)
    g = _data(a["velocity"], a["amplitude"], cfg.r_max)
    t = float(a["t"])
    st = wave.propagate(p, f, g, t, tol=cfg.tol)
    rows = [{"r": float(r), "u": float(np.real(u)), "ut": float(np.real(v))}
            for r, u, v in zip(st.u.grid, st.u.values, st.ut.values)]
    summary = {"n": cfg.n, "t": t, "energy": wave.energy(p, st), "nodes": len(rows)}
    return summary, rows


def cmd_nlw(cfg, a):
    p = cfg.params
    gamma, T = float(a["gamma"]), float(a["T"])
    f = _data(a["data"], a["amplitude"], cfg.r_max)
    g = _data("zero", 0.0, cfg.r_max)
    pair = None
    verdict = None
    if a["sigma"] is not None:
        verdict = lwp.classify(cfg.n, _rational(a["gamma"]), _rational(a["sigma"]))
        pair = verdict.pq
    rep = wave.nlw_picard(p, f, g, gamma, T, int(a["max_iters"]), cfg.tol, norm_pair=pair)
    summary = rep.as_dict()
    if verdict is not None:
        summary["lwp"] = verdict.as_dict()
    rows = [{"iteration": k + 1, "difference": d, "energy_difference": e}
            for k, (d, e) in enumerate(zip(rep.differences, rep.energy_differences))]
    if not rep.converged:
        raise NonConvergenceError(f"Picard iteration did not converge in {rep.iterations} steps")
    return summary, rows


def cmd_lwp(cfg, a):
    g, s = _rational(a["gamma"]), _rational(a["sigma"])
    v = lwp.classify(cfg.n, g, s)
    out = v.as_dict()
    if a["bruteforce"]:
        bw = lwp.bruteforce_witness(cfg.n, g, s, int(a["bruteforce"]))
        out["bruteforce_witness"] = None if bw is None else [str(x) for x in bw]
    return out, [{"status": out["status"], "case": out["case"]}]


def cmd_thresholds(cfg, a):
    d = lwp.thresholds(cfg.n).as_dict()
    return {"n": cfg.n, **d}, [{"name": k, "value": v} for k, v in d.items() if not k.endswith("_float")]


def cmd_regions(cfg, a):
    gs = np.linspace(float(a["gamma_min"]), float(a["gamma_max"]), int(a["ng"]))
    ss = np.linspace(float(a["sigma_min"]), float(a["sigma_max"]), int(a["ns"]))
    rows = lwp.region_samples(cfg.n, [Fraction(repr(float(x))) for x in gs], [Fraction(repr(float(x))) for x in ss])
    counts = {}
    for r in rows:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    return {"n": cfg.n, "counts": counts}, rows


def cmd_calibrate(cfg, a):
    c = transforms.calibrate_constants(cfg.n, refresh=True)
    closed = transforms.closed_form_constants(cfg.n)
    summary = {"n": cfg.n, "calibrated": c, "closed_form": closed}
    return summary, [{"name": k, "calibrated": c[k], "closed_form": closed[k]} for k in c]


# name -> (handler, help, defaults, options); options map dest -> argparse kwargs
SUBCOMMANDS = {
    "phi": (cmd_phi, "spherical functions phi_lam(r)", {"lam": "0,1,2", "r": "0,1,2"},
            {"lam": {}, "r": {}}),
    "transform": (cmd_transform, "spherical transform and round trip", {"data": "gaussian", "amplitude": 1.0},
                  {"data": {}, "amplitude": {"type": float}}),
    "abel": (cmd_abel, "Abel-route inverse transform", {"data": "gaussian", "amplitude": 1.0, "r": "0,0.5,1,1.5,2"},
             {"data": {}, "amplitude": {"type": float}, "r": {}}),
    "kernel": (cmd_kernel, "wave kernels on a (t, r) grid",
               {"kind": "w0", "sigma": "1", "tau": 0.0, "t": "1,2", "r": "0,0.5,1"},
               {"kind": {}, "sigma": {}, "tau": {"type": float}, "t": {}, "r": {}}),
    "envelope": (cmd_envelope, "kernel envelope ratio tables", {"tau": 0.0, "regimes": "", "nt": 8, "nr": 24},
                 {"tau": {"type": float}, "regimes": {}, "nt": {"type": int}, "nr": {"type": int}}),
    "ks": (cmd_ks, "Kunze-Stein bound for a radial kernel",
           {"q": 4.0, "q_tilde": 4.0, "data": "gaussian", "amplitude": 1.0},
           {"q": {"type": float}, "q_tilde": {"type": float}, "data": {}, "amplitude": {"type": float}}),
    "dispersive": (cmd_dispersive, "dispersive decay brackets",
                   {"q": 4.0, "tau": 1.0, "sigma": None, "times": "", "no_probe": False, "window": "auto"},
                   {"q": {"type": float}, "tau": {"type": float}, "sigma": {}, "times": {},
                    "no_probe": {"action": "store_true"}, "window": {"choices": ["auto", "small", "large"]}}),
    "solve": (cmd_solve, "linear wave propagation",
              {"t": 1.0, "data": "gaussian", "velocity": "zero", "amplitude": 1.0},
              {"t": {"type": float}, "data": {}, "velocity": {}, "amplitude": {"type": float}}),
    "nlw": (cmd_nlw, "Picard iteration for the semilinear equation",
            {"gamma": "3", "T": 0.2, "data": "gaussian", "amplitude": 0.5, "sigma": None, "max_iters": 30},
            {"gamma": {}, "T": {"type": float}, "data": {}, "amplitude": {"type": float}, "sigma": {},
             "max_iters": {"type": int}}),
    "lwp": (cmd_lwp, "classify (n, gamma, sigma)", {"gamma": "3/2", "sigma": "1/10", "bruteforce": 0},
            {"gamma": {}, "sigma": {}, "bruteforce": {"type": int}}),
    "thresholds": (cmd_thresholds, "exponent thresholds for dimension n", {}, {}),
    "regions": (cmd_regions, "sample the (gamma, sigma) plane",
                {"gamma_min": 1.05, "gamma_max": 3.0, "sigma_min": 0.0, "sigma_max": 1.5, "ng": 20, "ns": 20},
                {"gamma_min": {"type": float}, "gamma_max": {"type": float}, "sigma_min": {"type": float},
                 "sigma_max": {"type": float}, "ng": {"type": int}, "ns": {"type": int}}),
    "calibrate": (cmd_calibrate, "calibrate normalization constants", {}, {}),
}

GLOBAL_DEFAULTS = {"n": 3, "rho_tilde": None, "tol": 1e-10, "tail_tol": 1e-8, "r_max": 8.0,
                   "format": "json", "output": None, "quiet": False}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperwave", description="Wave equations on real hyperbolic spaces.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    S = argparse.SUPPRESS
    for name, (_, help_, _, opts) in SUBCOMMANDS.items():
        sp = sub.add_parser(name, help=help_, argument_default=S)
        sp.add_argument("--n", type=int)
        sp.add_argument("--rho-tilde", dest="rho_tilde", type=float)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--tail-tol", dest="tail_tol", type=float)
        sp.add_argument("--r-max", dest="r_max", type=float)
        sp.add_argument("--format", choices=["json", "csv"])
        sp.add_argument("--output")
        sp.add_argument("--quiet", action="store_true")
        sp.add_argument("--config", help="JSON file with option values")
        for dest, kw in opts.items():
            sp.add_argument("--" + dest.replace("_", "-"), dest=dest, **kw)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(command: str, flags: dict) -> tuple[RunConfig, dict]:
    """Merge defaults, config file and flags (in increasing precedence)."""
    _, _, defaults, _ = SUBCOMMANDS[command]
    merged = {**GLOBAL_DEFAULTS, **defaults}
    if "config" in flags:
        cfg_file = _load_config(flags["config"])
        unknown = set(cfg_file) - set(merged)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg_file)
    merged.update({k: v for k, v in flags.items() if k != "config"})
    run = RunConfig(**{k: merged[k] for k in GLOBAL_DEFAULTS})
    return run, {k: merged[k] for k in defaults}


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


# commands whose JSON output is the summary alone; rows are only for CSV
SUMMARY_ONLY = {"lwp", "thresholds", "ks", "calibrate", "envelope", "dispersive"}


def _finite(o):
    """Replace non-finite floats by ``None`` so the JSON stays standard."""
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    if isinstance(o, (float, np.floating)) and not math.isfinite(o):
        return None
    return o


def render(summary: dict, rows: list, fmt: str, with_rows: bool = True) -> str:
    if fmt == "json":
        doc = dict(summary)
        if rows and with_rows:
            doc["rows"] = rows
        return json.dumps(_finite(doc), indent=2, default=_json_default, allow_nan=False) + "\n"
    if not rows:
        rows = [summary]
    fields = list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".hyperwave-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if ns.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        cfg, args = resolve(ns.command, flags)
        summary, rows = SUBCOMMANDS[ns.command][0](cfg, args)
        text = render(summary, rows, cfg.format, ns.command not in SUMMARY_ONLY)
        if cfg.output:
            write_atomic(cfg.output, text)
        elif not cfg.quiet:
            sys.stdout.write(text)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NonConvergenceError as exc:
        print(f"nonconvergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
