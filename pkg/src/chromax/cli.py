"""Config-driven experiment runner: ``chromax <command> --config <path> [options]``.

Every command writes ``<out>/<command>.csv`` with a fixed header and
``<out>/manifest.json`` holding the resolved configuration (all defaults
filled in), the library version and timing.  Exit codes: 0 success, 1
configuration error, 2 numerical failure (``<out>/diagnostic.json``).
"""

import argparse
import copy
import csv
import io
import json
import math
import sys
import time
import traceback
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, approx, chromatic, dyadic, kernels, orthopoly, wavelet
from .errors import ChromaxError, ConfigError, ParameterInfeasible, ParameterOutOfRange

COMMANDS = ("recur", "quad", "basis", "expand", "reconstruct", "converge", "wavelet", "walsh",
            "diag")

HEADERS = {
    "recur": ["segment", "k", "alpha", "beta"],
    "quad": ["segment", "i", "node", "weight"],
    "basis": ["point", "m", "re", "im"],
    "expand": ["segment", "m", "coefficient"],
    "reconstruct": ["point", "N", "mode", "re", "im", "exact_re", "exact_im", "abs_err"],
    "converge": ["n", "lhs_norm", "en_proxy", "ratio"],
    "wavelet": ["N", "window_norm", "center_error", "probe_error"],
    "walsh": ["check", "value", "threshold", "passed"],
    "diag": ["quantity", "n", "value"],
}

_NUM = {"type": "number"}
_POS_INT = {"type": "integer", "minimum": 1}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "kernel": {
            "type": "object",
            "properties": {
                "name": {"enum": sorted(kernels.KERNELS)},
                "n": _POS_INT,
                "M_int": {"type": "integer", "minimum": 0, "maximum": 16},
                "m_frac": {"type": "integer", "minimum": 0, "maximum": 16},
            },
            "required": ["name"],
            "additionalProperties": False,
        },
        "weight": {
            "type": ["object", "null"],
            "properties": {
                "family": {"enum": ["hermite", "laguerre", "scaled_laguerre", "jacobi", "freud"]},
                "alpha": _NUM, "beta": _NUM, "scale": _NUM, "m": _POS_INT,
            },
            "required": ["family"],
            "additionalProperties": False,
        },
        "x0": {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]},
        "N_max": {"type": "integer", "minimum": 0, "maximum": 200},
        "degrees": {"type": "array", "items": _POS_INT, "minItems": 1},
        "mode": {"enum": ["partial", "cesaro", "dvp"]},
        "fhat": {
            "type": "object",
            "properties": {
                "name": {"enum": ["exp_decay", "gaussian", "indicator", "poly", "samples"]},
                "lam": _NUM, "sigma": _NUM, "center": _NUM, "lo": _NUM, "hi": _NUM,
                "coeffs": {"type": "array", "items": _NUM, "minItems": 1},
                "path": {"type": "string"},
            },
            "required": ["name"],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "lo": _NUM, "hi": _NUM, "count": _POS_INT,
                "points": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                      "minItems": 2, "maxItems": 2}},
            },
            "additionalProperties": False,
        },
        "preset": {"enum": sorted(approx.PRESETS)},
        "norms": {
            "type": "object",
            "properties": {k: _NUM for k in ("p", "q", "a", "b", "delta", "eps")},
            "additionalProperties": False,
        },
        "window": {
            "type": "object",
            "properties": {
                "a_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "b_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "a_panels": _POS_INT, "b_panels": _POS_INT, "order": _POS_INT,
            },
            "additionalProperties": False,
        },
        "probe": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "tolerances": {
            "type": "object",
            "properties": {"coefficient_rtol": _NUM, "admissibility": _NUM,
                           "identity": _NUM, "fd_step": _NUM, "walsh_triples": _POS_INT},
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
    },
}

DEFAULTS = {
    "kernel": {"name": "laplace"},
    "weight": {"family": "laguerre", "alpha": 0.0},
    "x0": 0.0,
    "N_max": 16,
    "degrees": [2, 4, 8, 16],
    "mode": "partial",
    "fhat": {"name": "exp_decay", "lam": 0.5},
    "grid": {"lo": 0.0, "hi": 5.0, "count": 20},
    "norms": {"p": 2.0, "q": 2.0, "a": 0.0, "b": 0.0, "delta": 0.01, "eps": 0.01},
    "window": {"a_range": [0.25, 4.0], "b_range": None, "a_panels": 8, "b_panels": 12,
               "order": 8},
    "probe": [2.0, 1.0],
    "tolerances": {"coefficient_rtol": 1e-12, "admissibility": 1e-4, "identity": 1e-12,
                   "fd_step": 1e-4, "walsh_triples": 1000},
    "seed": 0,
}

_KERNEL_DEFAULTS = {
    "poisson": {"n": 1},
    "walsh": {"M_int": 6, "m_frac": 10},
}

_WEIGHT_DEFAULTS = {
    "fourier": {"family": "hermite"},
    "bargmann": {"family": "hermite"},
    "walsh": {"family": "laguerre", "alpha": 0.0},
    "laplace": {"family": "laguerre", "alpha": 0.0},
    "poisson": None,
}


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(raw, command, overrides=None):
    """Validate a raw config, apply command-line overrides and fill every default."""
    raw = _merge(raw, overrides or {})
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc
    kname = raw.get("kernel", DEFAULTS["kernel"])["name"]
    cfg = copy.deepcopy(DEFAULTS)
    cfg["kernel"] = {"name": kname, **_KERNEL_DEFAULTS.get(kname, {})}
    cfg["weight"] = copy.deepcopy(_WEIGHT_DEFAULTS[kname])
    if kname == "poisson":
        cfg["x0"] = [1.0, 0.0]
        cfg["fhat"] = {"name": "exp_decay", "lam": 1.0}
    if kname in ("fourier", "bargmann"):
        cfg["fhat"] = {"name": "gaussian", "sigma": math.sqrt(0.5), "center": 0.0}
        cfg["grid"] = {"lo": -4.0, "hi": 4.0, "count": 41}
    if kname == "walsh":
        cfg["fhat"] = {"name": "indicator", "lo": 0.0, "hi": 1.0}
        cfg["grid"] = {"lo": 0.0, "hi": 4.0, "count": 16}
    for key, value in raw.items():
        if key in ("weight", "fhat", "grid") or not isinstance(value, dict):
            # these entries replace the kernel-specific defaults outright
            cfg[key] = copy.deepcopy(value)
        else:
            cfg[key] = _merge(cfg.get(key) or {}, value)
    cfg["command"] = command
    if cfg["window"]["b_range"] is None:
        x0 = cfg["x0"] if isinstance(cfg["x0"], list) else [1.0, 0.0]
        n = cfg["kernel"].get("n", 1)
        cfg["window"]["b_range"] = [-2.0, x0[1] + abs(x0[0]) * n + 6.0]
    if kname == "poisson" and not isinstance(cfg["x0"], list):
        raise ConfigError("the wavelet kernel needs x0 = [a0, b0]")
    if kname != "poisson" and isinstance(cfg["x0"], list):
        raise ConfigError(f"kernel {kname} needs a scalar x0")
    if command in ("reconstruct", "converge", "wavelet") and max(cfg["degrees"]) * (
            2 if cfg["mode"] == "dvp" or command == "converge" else 1) > 400:
        raise ConfigError("degree list too large")
    return cfg


# Resolution of config entries into library objects ---------------------------

def make_kernel(spec):
    name = spec["name"]
    if name == "poisson":
        return kernels.poisson_wavelet(spec["n"])
    if name == "walsh":
        return kernels.walsh(spec["M_int"], spec["m_frac"])
    return kernels.KERNELS[name]()


def make_weight(spec):
    if spec is None:
        return None
    fam = spec["family"]
    if fam == "hermite":
        return orthopoly.hermite()
    if fam == "laguerre":
        return orthopoly.laguerre(spec.get("alpha", 0.0))
    if fam == "scaled_laguerre":
        return orthopoly.scaled_laguerre(spec.get("alpha", 0.0), spec.get("scale", 1.0))
    if fam == "jacobi":
        return orthopoly.jacobi(spec.get("alpha", 0.0), spec.get("beta", 0.0))
    return orthopoly.freud(spec.get("m", 4))


def make_fhat(spec, basis=None, base_dir=Path(".")):
    """``(callable, breakpoints)`` for a catalog entry."""
    name = spec["name"]
    if name == "exp_decay":
        lam = spec.get("lam", 1.0)
        if lam <= 0:
            raise ConfigError("exp_decay needs lam > 0")

        def f(y):
            y = np.asarray(y, dtype=float)
            with np.errstate(over="ignore"):
                return np.where(y >= 0, np.exp(-lam * np.maximum(y, 0.0)), 0.0)

        return f, (0.0,)
    if name == "gaussian":
        s, c = spec.get("sigma", 1.0), spec.get("center", 0.0)
        if s <= 0:
            raise ConfigError("gaussian needs sigma > 0")
        return (lambda y: np.exp(-((np.asarray(y, dtype=float) - c) ** 2) / (2 * s * s))), ()
    if name == "indicator":
        lo, hi = spec.get("lo", 0.0), spec.get("hi", 1.0)
        if not lo < hi:
            raise ConfigError("indicator needs lo < hi")
        return (lambda y: ((np.asarray(y) >= lo) & (np.asarray(y) < hi)).astype(float)), (lo, hi)
    if name == "poly":
        coeffs = np.asarray(spec["coeffs"], dtype=float)

        def f(y):
            # g_x0 = poly, so fhat = poly * sqrt(w_x0) summed over segments
            y = np.asarray(y, dtype=float)
            root = sum(seg.sqrt_weight(y) for seg in basis.segments)
            return np.polynomial.polynomial.polyval(y, coeffs) * root

        return f, ()
    path = Path(spec.get("path", ""))
    path = path if path.is_absolute() else base_dir / path
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read samples file {path}: {exc}") from exc
    if data.shape[1] != 2 or data.shape[0] < 2 or np.any(np.diff(data[:, 0]) <= 0):
        raise ConfigError("samples file needs two columns with increasing y")
    ys, vs = data[:, 0], data[:, 1]
    return (lambda y: np.interp(y, ys, vs, left=0.0, right=0.0)), (float(ys[0]), float(ys[-1]))


def _x0(cfg):
    return tuple(cfg["x0"]) if isinstance(cfg["x0"], list) else float(cfg["x0"])


def _points(cfg):
    g = cfg["grid"]
    if "points" in g:
        return np.asarray(g["points"], dtype=float)
    x = np.linspace(g["lo"], g["hi"], g["count"])
    if cfg["kernel"]["name"] == "poisson":
        raise ConfigError("the wavelet kernel needs grid.points as [a, b] pairs")
    return x


def _label(p):
    return " ".join(_fmt(v) for v in np.atleast_1d(p))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return repr(float(v))


def _basis(cfg, N_max=None):
    return chromatic.build_basis(make_kernel(cfg["kernel"]), make_weight(cfg["weight"]), _x0(cfg),
                                 cfg["N_max"] if N_max is None else N_max)


# Commands -------------------------------------------------------------------

def cmd_recur(cfg, ctx):
    basis = _basis(cfg)
    for i, seg in enumerate(basis.segments):
        for k in range(basis.N_max + 2):
            yield i, k, seg.rec.alpha[k], seg.rec.beta[k]


def cmd_quad(cfg, ctx):
    basis = _basis(cfg)
    for i, seg in enumerate(basis.segments):
        rule = orthopoly.gauss_rule(seg.rec, basis.N_max + 1)
        for j, (x, w) in enumerate(zip(rule.nodes, rule.weights)):
            yield i, j, x, w


def cmd_basis(cfg, ctx):
    basis = _basis(cfg)
    pts = _points(cfg)
    mats, err = chromatic.basis_matrix(basis, pts)
    ctx["basis_quadrature_error"] = err
    total = sum(mats)
    for j, p in enumerate(pts):
        for m in range(basis.N_max + 1):
            v = complex(total[m][j])
            yield _label(p), m, v.real, v.imag


def cmd_expand(cfg, ctx):
    basis = _basis(cfg)
    f, bps = make_fhat(cfg["fhat"], basis, ctx["base_dir"])
    c = chromatic.chromatic_coefficients(basis, f, breakpoints=bps,
                                         rtol=cfg["tolerances"]["coefficient_rtol"])
    ctx["coefficient_error"] = c.err
    for i, vals in enumerate(c.values):
        for m, v in enumerate(vals):
            yield i, m, v


def cmd_reconstruct(cfg, ctx):
    mode = cfg["mode"]
    top = max(cfg["degrees"])
    need = 2 * top - 1 if mode == "dvp" else top
    basis = _basis(cfg, max(cfg["N_max"], need))
    f, bps = make_fhat(cfg["fhat"], basis, ctx["base_dir"])
    c = chromatic.chromatic_coefficients(basis, f, breakpoints=bps,
                                         rtol=cfg["tolerances"]["coefficient_rtol"])
    pts = _points(cfg)
    exact, err = kernels.transform(basis.kernel, f, pts, breakpoints=bps)
    ctx["coefficient_error"] = c.err
    ctx["transform_error"] = err
    for N in sorted(cfg["degrees"]):
        vals = np.atleast_1d(chromatic.reconstruct(basis, c, pts, N, mode))
        for p, v, e in zip(pts, vals, np.atleast_1d(exact)):
            v, e = complex(v), complex(e)
            yield _label(p), N, mode, v.real, v.imag, e.real, e.imag, abs(v - e)


def _converge_config(cfg):
    degrees = tuple(sorted(cfg["degrees"]))
    nm = cfg["norms"]
    x0 = _x0(cfg)
    preset = cfg.get("preset")
    if preset in ("laplace-weighted",):
        return approx.laplace_weighted_sweep(p=nm["p"], q=nm["q"], a=nm["a"], b=nm["b"],
                                       delta=nm["delta"], eps=nm["eps"], x0=x0,
                                       alpha=(cfg["weight"] or {}).get("alpha", 0.0),
                                       degrees=degrees)
    if preset == "laplace-power":
        return approx.laplace_power_sweep(p=nm["p"], q=nm["q"], a=nm["a"], b=nm["b"],
                                       delta=nm["delta"], x0=x0,
                                       alpha=(cfg["weight"] or {}).get("alpha", 0.0),
                                       degrees=degrees)
    if preset == "laplace":
        return approx.laplace_sweep(x0=x0, alpha=(cfg["weight"] or {}).get("alpha", 0.0),
                                    degrees=degrees)
    if preset is not None:
        return approx.PRESETS[preset](degrees=degrees)
    K = make_kernel(cfg["kernel"])
    W = make_weight(cfg["weight"])
    if W is None:
        raise ConfigError("converge needs a base weight")
    f, bps = make_fhat(cfg["fhat"], None, Path("."))
    window = None
    if K.name in ("fourier", "bargmann"):
        window = (cfg["grid"]["lo"], cfg["grid"]["hi"])
    return approx.ConvergenceConfig("custom", K, W, x0, f, p=nm["p"], q=nm["q"],
                                    degrees=degrees, fhat_breakpoints=bps, x_window=window)


def cmd_converge(cfg, ctx):
    exp = _converge_config(cfg)
    ctx["experiment"] = {"name": exp.name, "p": exp.p, "q": exp.q, "x_window": exp.x_window,
                         "x_panels": exp.x_panels, "x_log_eps": exp.x_log_eps,
                         "summability": "dvp", "N_max": 2 * max(exp.degrees) - 1,
                         **{k: v for k, v in exp.meta.items()}}
    report = approx.convergence_experiment(exp)
    ctx["wall_time"] = [r.wall_time for r in report.rows]
    for r in report.rows:
        yield r.n, r.lhs_norm, r.en_proxy, r.ratio


def cmd_wavelet(cfg, ctx):
    if cfg["kernel"]["name"] != "poisson":
        raise ConfigError("the wavelet command needs kernel poisson")
    n = cfg["kernel"]["n"]
    x0 = _x0(cfg)
    top = max(cfg["degrees"])
    basis = wavelet.split_basis(n, x0, top)
    f, bps = make_fhat(cfg["fhat"], basis, ctx["base_dir"])
    c = chromatic.chromatic_coefficients(basis, f, breakpoints=bps)
    w = cfg["window"]
    win = wavelet.WaveletWindow(tuple(w["a_range"]), tuple(w["b_range"]), w["a_panels"],
                                w["b_panels"], w["order"])
    pts, wts = win.grid()
    probes = np.array([x0, cfg["probe"]], dtype=float)
    Wf, _ = wavelet.wavelet_transform(f, n, pts, breakpoints=bps)
    Wp, _ = wavelet.wavelet_transform(f, n, probes, breakpoints=bps)
    for N in sorted(cfg["degrees"]):
        S = wavelet.wavelet_partial_sum(basis, c, pts, N)
        Sp = wavelet.wavelet_partial_sum(basis, c, probes, N)
        err = np.abs(Wp - Sp)
        yield N, wavelet.wavelet_domain_norm(Wf - S, n, wts, win.symmetric), err[0], err[1]


def walsh_checks(seed, triples=1000, M_int=6, m_frac=10):
    """Rows ``(check, value, threshold, passed)`` of the dyadic suite."""
    rng = np.random.default_rng(seed)
    lim = 1 << 6

    def rand():
        return dyadic.from_code(int(rng.integers(0, lim * lim)), 6, 6)

    bad = 0
    for _ in range(triples):
        x, y, t = rand(), rand(), rand()
        lhs = dyadic.walsh_eval(dyadic.dyadic_add(x, y), t)
        bad += lhs != dyadic.walsh_eval(x, t) * dyadic.walsh_eval(y, t)
    yield "character_identity_failures", bad, 0, bad == 0

    y_c = dyadic.cell_midpoints(M_int, m_frac)
    chi = (y_c < 1.0).astype(float)
    F = dyadic.walsh_transform_grid(chi, M_int, m_frac)
    t_c = (np.arange(F.size) + 0.5) * 2.0**-M_int
    dev = float(np.max(np.abs(F - (t_c < 1.0))))
    yield "indicator_self_dual_max_dev", dev, 0, dev == 0.0

    worst = 0.0
    for code in rng.integers(0, 1 << 12, size=20):
        yv = dyadic.from_code(int(code), 6, 6)
        t = dyadic.from_code(int(rng.integers(0, 1 << 12)), 6, 6)

        def psi(t_, yv=yv):
            return dyadic.walsh_eval(yv, t_)

        d = dyadic.dyadic_derivative_partial(psi, t, 6, j_start=-6)
        worst = max(worst, abs(d - yv.value * psi(t)))
    yield "dyadic_derivative_eigen_max_dev", worst, 0, worst == 0.0

    tests = {
        "exp": np.exp(-y_c),
        "indicator": ((y_c >= 0.5) & (y_c < 3.0)).astype(float),
        "rational": 1.0 / (1.0 + y_c) ** 2,
        "bump": y_c * np.exp(-y_c),
        "signed": np.where(y_c < 2.0, 1.0, -1.0) * np.exp(-2 * y_c),
    }
    cell_y, cell_t = 2.0**-m_frac, 2.0**-M_int
    for name, vals in tests.items():
        Fv = dyadic.walsh_transform_grid(vals, M_int, m_frac)
        for p, pc in ((1.0, np.inf), (2.0, 2.0)):
            lhs = dyadic.grid_norm(Fv, cell_t, pc)
            rhs = dyadic.grid_norm(vals, cell_y, p)
            yield f"hausdorff_young_{name}_p{int(p)}", lhs - rhs, 1e-12 * rhs, lhs <= rhs * (1 + 1e-12)

    report = approx.convergence_experiment(approx.walsh_sweep(M_int=M_int, m_frac=m_frac))
    errs = report.column("lhs_norm")
    for r in report.rows:
        yield f"walsh_sweep_lhs_n{r.n}", r.lhs_norm, math.nan, True
    mono = bool(np.all(np.diff(errs) < 0))
    yield "walsh_sweep_decreasing", float(mono), 1, mono


def cmd_walsh(cfg, ctx):
    k = cfg["kernel"]
    M_int = k.get("M_int", 6) if k["name"] == "walsh" else 6
    m_frac = k.get("m_frac", 10) if k["name"] == "walsh" else 10
    yield from walsh_checks(cfg["seed"], cfg["tolerances"]["walsh_triples"], M_int, m_frac)


def cmd_diag(cfg, ctx):
    tol = cfg["tolerances"]
    if cfg["kernel"]["name"] == "poisson":
        n = cfg["kernel"]["n"]
        x0 = _x0(cfg)
        adm = wavelet.admissibility_numeric(n)
        yield "admissibility", n, adm
        yield "admissibility_error", n, abs(adm - 1.0 / n)
        yield "psi_integral", n, wavelet.psi_integral(n)
        yield "sign_change", n, wavelet.sign_change(n, x0)
        rng = np.random.default_rng(cfg["seed"])
        a0, b0 = x0
        y = b0 + abs(a0) * rng.uniform(0.05, 20.0, 100) * np.sign(a0)
        binom, op = wavelet.identity_residuals(n, x0, y, "exact")
        yield "binomial_identity_residual", n, binom
        yield "operator_identity_residual_exact", n, op
        if n == 1:
            y_fd = b0 + a0 * rng.uniform(0.05, 8.0, 100)
            _, op_fd = wavelet.identity_residuals(1, x0, y_fd, "fd", h=tol["fd_step"])
            yield "operator_identity_residual_fd", n, op_fd
        return
    basis = _basis(cfg, max(cfg["N_max"], max(cfg["degrees"]) + 1))
    for i, seg in enumerate(basis.segments):
        iv = seg.interval
        # effective supports of the shipped weights at degrees <= 200
        lo = iv.lo if np.isfinite(iv.lo) else -12.0
        hi = iv.hi if np.isfinite(iv.hi) else (80.0 if np.isfinite(iv.lo) else 12.0)
        grid = np.linspace(lo, hi, 20001)[1:-1]
        for n in sorted(cfg["degrees"]):
            if n + 1 > seg.rec.n_max:
                continue
            try:
                gl = orthopoly.gamma_lambda(seg.rec, seg.weight, lambda y: np.ones_like(y), n, grid)
            except ChromaxError as exc:
                ctx.setdefault("skipped", []).append(f"segment {i} n={n}: {exc}")
                continue
            yield f"gamma_seg{i}", n, gl.gamma
            yield f"lambda_seg{i}", n, gl.lam
            yield f"gamma_lambda_over_n_seg{i}", n, gl.ratio


RUNNERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def build_parser():
    p = argparse.ArgumentParser(prog="chromax", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON configuration file")
    p.add_argument("--out", default="chromax-out", help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--degrees", default=None, help="comma-separated degree list, e.g. 2,4,8,16")
    p.add_argument("--kernel", default=None, help="kernel name override")
    p.add_argument("--n", type=int, default=None, help="wavelet order override")
    p.add_argument("--x0", default=None, help="expansion point override (a,b for the wavelet)")
    p.add_argument("--preset", default=None, help="convergence preset override")
    return p


def _overrides(args):
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.degrees is not None:
        text = args.degrees.strip()
        try:
            out["degrees"] = [int(v) for v in text.split(",")] if text else []
        except ValueError as exc:
            raise ConfigError(f"bad --degrees {args.degrees!r}") from exc
    if args.kernel is not None or args.n is not None:
        k = {"name": args.kernel} if args.kernel else {}
        if args.n is not None:
            k["n"] = args.n
        out["kernel"] = k
    if args.x0 is not None:
        try:
            vals = [float(v) for v in args.x0.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --x0 {args.x0!r}") from exc
        out["x0"] = vals if len(vals) > 1 else vals[0]
    if args.preset is not None:
        out["preset"] = args.preset
    return out


def run(command, config_path, out_dir, overrides=None):
    """Run one command; returns the process exit code."""
    out = Path(out_dir)
    try:
        raw = json.loads(Path(config_path).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        raw.pop("command", None)
        if "kernel" in (overrides or {}) and "name" not in overrides["kernel"]:
            overrides["kernel"]["name"] = raw.get("kernel", DEFAULTS["kernel"])["name"]
        if "kernel" in (overrides or {}) and overrides["kernel"]["name"] != raw.get(
                "kernel", DEFAULTS["kernel"])["name"]:
            raw.pop("weight", None)
            raw.pop("x0", None)
        cfg = resolve_config(raw, command, overrides)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"chromax: configuration error: {exc}", file=sys.stderr)
        return 1
    out.mkdir(parents=True, exist_ok=True)
    ctx = {"base_dir": Path(config_path).resolve().parent}
    t0 = time.perf_counter()
    try:
        rows = list(RUNNERS[command](cfg, ctx))
    except (ConfigError, ParameterInfeasible, ParameterOutOfRange) as exc:
        print(f"chromax: configuration error: {exc}", file=sys.stderr)
        return 1
    except (ChromaxError, ArithmeticError, np.linalg.LinAlgError) as exc:
        diag = {"command": command, "error": type(exc).__name__, "message": str(exc),
                "config": cfg, "traceback": traceback.format_exc().splitlines()[-6:],
                "version": __version__}
        (out / "diagnostic.json").write_text(json.dumps(_jsonable(diag), indent=2) + "\n")
        print(f"chromax: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    _write_csv(out / f"{command}.csv", HEADERS[command], rows)
    ctx.pop("base_dir")
    manifest = {"command": command, "version": __version__, "config": cfg,
                "csv": f"{command}.csv", "header": HEADERS[command], "rows": len(rows),
                "elapsed_seconds": time.perf_counter() - t0, "details": ctx,
                "library_defaults": {"quadrature_gl_order": 20, "layout_log_eps": 1e-32,
                                     "stieltjes_tol": 1e-10, "basis_quad_rtol": 1e-11,
                                     "transform_rtol": 1e-11, "wavelet_panels": [8, 16],
                                     "en_proxy_irls": {"max_iter": 50, "rtol": 1e-10}}}
    (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2) + "\n")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = _overrides(args)
    except ConfigError as exc:
        print(f"chromax: configuration error: {exc}", file=sys.stderr)
        return 1
    return run(args.command, args.config, args.out, overrides)


if __name__ == "__main__":
    sys.exit(main())
