"""Command-line frontend.

Commands: classify, build-c, t-matrix, spectrum, resolvent, verify.
Global flags: --config <json>, --json, --csv <path>, --plot <path>,
--tol <float>, --grid-L <float>, --grid-n <int>, --degrees.
Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numeric failure (non-convergence or singular configuration).

Angles are radians unless --degrees is given.  A config file is a single
JSON object whose keys mirror the long flags (hyphens as underscores);
command-line flags override config values and unknown config keys are
rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import defect, dirac, schrodinger as sch
from .defect import CParams, compose_u, decompose_u
from .errors import NumericalFailure
from .numerics import Grid
from .verify import run_battery

USAGE_ERROR, VERIFY_FAILURE, NUMERIC_FAILURE = 2, 1, 3

_CONFIG_KEYS = {
    "model", "theta", "omega", "phi", "xi", "q", "r", "gamma",
    "u_entries", "coupling", "c", "z", "tol", "grid_L", "grid_n",
    "degrees", "sweep", "csv", "plot", "json", "gaussian_center",
    "gaussian_width", "input",
}


class UsageError(ValueError):
    pass


def _complex_pairs(data, shape):
    arr = np.asarray(data, dtype=float)
    if arr.shape != shape + (2,):
        raise UsageError(f"expected nested [re, im] pairs of shape {shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must contain a JSON object")
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config fields: {sorted(unknown)}")
    return cfg


def _merged(args: argparse.Namespace, cfg: dict, key: str, default=None):
    val = getattr(args, key, None)
    if val is not None:
        return val
    if key in cfg:
        return cfg[key]
    return default


def _angle(val, degrees: bool) -> float:
    v = float(val)
    return math.radians(v) if degrees else v


def _param_source(args, cfg):
    """Identify which of the four parameter sources is configured."""
    degrees = bool(_merged(args, cfg, "degrees", False))
    get = lambda k, d=None: _merged(args, cfg, k, d)
    sources = []
    if get("u_entries") is not None:
        sources.append("entries")
    if get("coupling") is not None:
        sources.append("coupling")
    if get("q") is not None or get("r") is not None or get("gamma") is not None:
        sources.append("u_params")
    if get("theta") is not None:
        sources.append("family")
    if len(sources) != 1:
        raise UsageError(
            f"exactly one parameter source required, got {sources or 'none'}: "
            "give (theta, omega, phi, xi), or (q, r, phi, gamma, xi), or "
            "u-entries, or a coupling matrix"
        )
    return sources[0], degrees


def _u_from_args(args, cfg):
    source, degrees = _param_source(args, cfg)
    get = lambda k, d=None: _merged(args, cfg, k, d)
    if source == "entries":
        m = _complex_pairs(get("u_entries"), (2, 2))
        return decompose_u(m)
    if source == "u_params":
        q = float(get("q", 0.0))
        r = get("r")
        r = math.sqrt(max(0.0, 1.0 - q * q)) if r is None else float(r)
        return compose_u(q, r,
                         _angle(get("phi", 0.0), degrees),
                         _angle(get("gamma", 0.0), degrees),
                         _angle(get("xi", 0.0), degrees))
    if source == "family":
        p, phi, xi = _family_from_args(args, cfg)
        return defect.u_with_c_symmetry(p, phi, xi)
    raise UsageError("a coupling matrix does not determine a unitary label")


def _family_from_args(args, cfg):
    _, degrees = _param_source(args, cfg)
    get = lambda k, d=None: _merged(args, cfg, k, d)
    theta = get("theta")
    if theta is None:
        raise UsageError("this command needs the (theta, omega, phi, xi) source")
    p = CParams(float(theta), _angle(get("omega", 0.0), degrees))
    return p, _angle(get("phi", 0.0), degrees), _angle(get("xi", 0.0), degrees)


def _fmt(v) -> str:
    return f"{v:.15g}"


def _complex_out(z: complex):
    return [float(np.real(z)), float(np.imag(z))]


def _matrix_out(m: np.ndarray):
    return [[_complex_out(v) for v in row] for row in np.asarray(m, dtype=complex)]


def _emit(payload: dict, as_json: bool):
    if as_json:
        print(json.dumps(payload, indent=2))
        return
    for key, val in payload.items():
        print(f"{key}: {json.dumps(val) if isinstance(val, (dict, list)) else val}")


def _write_csv(path: str | None, header: list[str], rows: list[tuple]):
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row)
              for row in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args, cfg) -> int:
    u = _u_from_args(args, cfg)
    tol = float(_merged(args, cfg, "tol", 1e-10))
    cl = defect.classify(u, tol=tol)
    s = defect.extension_subspace(u)
    payload = {
        "class": cl.kind,
        "theta": cl.params.theta if cl.params else None,
        "omega": cl.params.omega if cl.params else None,
        "in_upsilon": defect.in_extension_center(u, tol=max(tol, 1e-10)),
        "d1": [_complex_out(v) for v in s.d1],
        "d2": [_complex_out(v) for v in s.d2],
    }
    _emit(payload, args.json)
    return 0


def cmd_build_c(args, cfg) -> int:
    get = lambda k, d=None: _merged(args, cfg, k, d)
    theta = get("theta")
    if theta is None:
        raise UsageError("build-c needs --theta (and optionally --omega)")
    degrees = bool(get("degrees", False))
    p = CParams(float(theta), _angle(get("omega", 0.0), degrees))
    c = defect.c_operator(p)
    gen = defect.c_generator(p)
    pp, pm = defect.projectors(p)
    sym = defect.standard_symmetries()
    eye = np.eye(4)
    jc = sym.J @ c
    residuals = {
        "c_squared": float(np.abs(c @ c - eye).max()),
        "adjoint_family": float(np.abs(c.conj().T
                                       - defect.c_operator(CParams(1 / p.theta, p.omega))).max()),
        "exponential_form": float(np.abs(
            (math.cosh(p.chi) * eye - math.sinh(p.chi) * defect.r_omega(p.omega)) @ sym.J - c
        ).max()),
        "projector_idempotent": float(np.abs(pp @ pp - pp).max()),
        "projector_sum": float(np.abs(pp + pm - eye).max()),
    }
    payload = {
        "theta": p.theta,
        "omega": p.omega,
        "norm": float(np.linalg.norm(c, 2)),
        "jc_min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (jc + jc.conj().T)).min()),
        "c_matrix": _matrix_out(c),
        "generator": _matrix_out(gen),
        "projector_plus": _matrix_out(pp),
        "projector_minus": _matrix_out(pm),
        "residuals": residuals,
    }
    _emit(payload, args.json)
    return 0


def cmd_tmatrix(args, cfg) -> int:
    p, phi, xi = _family_from_args(args, cfg)
    t_closed = sch.coupling_from_params(p, phi, xi)
    t_solve = sch.coupling_from_subspace(defect.u_with_c_symmetry(p, phi, xi))
    diff = float(np.abs(t_closed.matrix - t_solve.matrix).max())
    rho = math.sqrt(1.0 + p.beta**2 * math.sin(phi) ** 2)
    delta = p.alpha * (math.cos(phi) - math.sin(phi)) + rho * (math.cos(xi) + math.sin(xi))
    payload = {
        "t_closed_form": _matrix_out(t_closed.matrix),
        "t_boundary_solve": _matrix_out(t_solve.matrix),
        "max_difference": diff,
        "delta": delta,
    }
    _emit(payload, args.json)
    return 0


def _essential_string(intervals) -> str:
    parts = []
    for lo, hi in intervals:
        left = "(-inf" if math.isinf(lo) else f"[{_fmt(lo)}"
        right = "inf)" if math.isinf(hi) else f"{_fmt(hi)}]"
        parts.append(f"{left},{right}")
    return "U".join(parts)


def _coupling_spectrum(t, tol: float):
    roots = sch.determinant_roots(t, tol=tol)
    recs = tuple(
        sch.EigenvalueRecord(z=z, factor="determinant",
                             residual=abs(sch.determinant_condition(t, math.sqrt(-z))))
        for z in roots
    )
    return sch.SpectrumResult(essential=((0.0, math.inf),), discrete=recs)


def _spectrum_once(model: str, args, cfg):
    get = lambda k, d=None: _merged(args, cfg, k, d)
    tol = float(get("tol", 1e-10))
    if model == "schrodinger":
        if get("coupling") is not None:
            t = sch.ZeroRangeCoupling(_complex_pairs(get("coupling"), (2, 2)))
            return _coupling_spectrum(t, tol)
        source, _ = _param_source(args, cfg)
        if source == "family":
            p, phi, xi = _family_from_args(args, cfg)
            return sch.bound_states(p, phi, xi, tol=tol)
        u = _u_from_args(args, cfg)
        try:
            return _coupling_spectrum(sch.coupling_from_subspace(u), tol)
        except sch.SingularConfigurationError:
            # separated (center) extensions have no coupling form but an
            # elementary Robin spectrum
            if defect.in_extension_center(u, tol=max(tol, 1e-10)):
                return sch.upsilon_bound_states(sch.upsilon_c_parameter(u))
            raise
    if model == "dirac":
        m = dirac.dirac_model(float(get("c", 1.0)))
        return dirac.gap_bound_states(_u_from_args(args, cfg), m, tol=tol)
    raise UsageError(f"unknown model {model!r}; choose schrodinger or dirac")


def _spectrum_payload(spec) -> dict:
    return {
        "essential": _essential_string(spec.essential),
        "essential_intervals": [[None if math.isinf(lo) else lo,
                                 None if math.isinf(hi) else hi]
                                for lo, hi in spec.essential],
        "discrete": [{"z": rec.z, "factor": rec.factor, "residual": rec.residual}
                     for rec in spec.discrete],
    }


def cmd_spectrum(args, cfg) -> int:
    get = lambda k, d=None: _merged(args, cfg, k, d)
    model = get("model")
    if model is None:
        raise UsageError("spectrum needs --model schrodinger|dirac")
    sweep = get("sweep")
    if sweep is None:
        spec = _spectrum_once(model, args, cfg)
        payload = {"model": model, **_spectrum_payload(spec)}
        _emit(payload, args.json)
        return 0

    if isinstance(sweep, dict):
        param = sweep["param"]
        lo, hi, count = float(sweep["start"]), float(sweep["stop"]), int(sweep["count"])
    else:
        param, lo, hi, count = sweep[0], float(sweep[1]), float(sweep[2]), int(sweep[3])
    if param not in ("theta", "omega", "phi", "xi", "c"):
        raise UsageError(f"sweep parameter {param!r} not one of theta/omega/phi/xi/c")
    rows = []
    for val in np.linspace(lo, hi, count):
        setattr(args, param, float(val))
        spec = _spectrum_once(model, args, cfg)
        for idx, rec in enumerate(spec.discrete):
            rows.append((float(val), idx, float(rec.z)))
    _write_csv(get("csv"), [param, "eigenvalue_index", "z"], rows)
    plot = get("plot")
    if plot is not None:
        _render_sweep_plot(rows, param, plot)
    if args.json:
        print(json.dumps({"model": model, "sweep": param, "rows": len(rows),
                          "csv": get("csv"), "plot": plot}))
    return 0


def cmd_resolvent(args, cfg) -> int:
    get = lambda k, d=None: _merged(args, cfg, k, d)
    p, phi, xi = _family_from_args(args, cfg)
    z_raw = get("z")
    if z_raw is None:
        raise UsageError("resolvent needs --z-re/--z-im (or config key 'z': [re, im])")
    z = complex(float(z_raw[0]), float(z_raw[1]))
    grid = Grid(float(get("grid_L", 30.0)), int(get("grid_n", 2000)))
    xs = grid.nodes()
    if get("input") is not None:
        data = np.loadtxt(get("input"), delimiter=",", skiprows=1)
        if data.shape[0] != xs.size:
            raise UsageError(
                f"input samples ({data.shape[0]}) do not match the grid ({xs.size} nodes)"
            )
        f = data[:, 1] + 1j * data[:, 2]
    else:
        center = float(get("gaussian_center", 0.3))
        width = float(get("gaussian_width", 1.0))
        f = np.exp(-((xs - center) / width) ** 2).astype(complex)
    res = sch.krein_resolvent_apply(f, grid, z, p, phi, xi, tol=float(get("tol", 1e-10)))
    rows = [(float(x), float(v.real), float(v.imag)) for x, v in zip(xs, res.values)]
    _write_csv(get("csv"), ["x", "re", "im"], rows)
    plot = get("plot")
    if plot is not None:
        _render_resolvent_plot(xs, f, res.values, z, plot)
    summary = {
        "z": _complex_out(z),
        "coeff_plus": _complex_out(res.coeff_plus),
        "coeff_minus": _complex_out(res.coeff_minus),
        "denominator_plus": _complex_out(res.denom_plus),
        "denominator_minus": _complex_out(res.denom_minus),
        "bc_residual": res.bc_residual() if res.coupling is not None else None,
        "csv": get("csv"),
        "plot": plot,
    }
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        print(f"bc_residual: {summary['bc_residual']}")
    return 0


def cmd_verify(args, cfg) -> int:
    results = run_battery(inject_fault=bool(args.inject_fault))
    if args.json:
        print(json.dumps([r.as_dict() for r in results], indent=2))
    else:
        for r in results:
            mark = "PASS" if r.passed else "FAIL"
            extra = f"  [{r.detail}]" if r.detail else ""
            print(f"{mark} {r.name:34s} residual={r.residual:.3e} "
                  f"threshold={r.threshold:.1e}{extra}")
    return 0 if all(r.passed for r in results) else VERIFY_FAILURE


# ---------------------------------------------------------------------------
# figure rendering
# ---------------------------------------------------------------------------

def _render_sweep_plot(rows, param: str, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    by_index: dict[int, list] = {}
    for val, idx, z in rows:
        by_index.setdefault(idx, []).append((val, z))
    for idx, pts in sorted(by_index.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], ".-", ms=3, lw=0.8,
                label=f"branch {idx}")
    ax.set_xlabel(param)
    ax.set_ylabel("eigenvalue z")
    ax.grid(alpha=0.3)
    if by_index:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _render_resolvent_plot(xs, f, values, z, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(2, 1, figsize=(6.5, 5.0), sharex=True)
    axes[0].plot(xs, np.real(f), "k--", lw=0.8, label="Re f")
    axes[0].plot(xs, np.real(values), "b-", lw=1.0, label="Re (A-z)^{-1} f")
    axes[1].plot(xs, np.imag(f), "k--", lw=0.8, label="Im f")
    axes[1].plot(xs, np.imag(values), "r-", lw=1.0, label="Im (A-z)^{-1} f")
    for ax in axes:
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    axes[1].set_xlabel("x")
    fig.suptitle(f"resolvent at z = {z}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _global_flags() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    g = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g.add_argument("--config", default=s, help="JSON config file; flags override its values")
    g.add_argument("--json", action="store_true", default=s,
                   help="machine-readable output")
    g.add_argument("--csv", default=s, help="CSV output path (spectrum sweeps, resolvent)")
    g.add_argument("--plot", default=s, help="render a PNG figure next to the CSV output")
    g.add_argument("--tol", type=float, default=s, help="numeric tolerance (default 1e-10)")
    g.add_argument("--grid-L", dest="grid_L", type=float, default=s,
                   help="half-width of the grid")
    g.add_argument("--grid-n", dest="grid_n", type=int, default=s,
                   help="nodes per half-line")
    g.add_argument("--degrees", action="store_true", default=s,
                   help="interpret angle arguments as degrees")
    return g


def _build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    ap = argparse.ArgumentParser(
        prog="kreinext",
        allow_abbrev=False,
        parents=[common],
        description="Classification, construction and spectra of J-self-adjoint "
                    "extensions with C-symmetries (defect-space core, zero-range "
                    "Schrodinger and point-perturbed Dirac models).",
    )

    sub = ap.add_subparsers(dest="command", required=True)

    def add_family(sp):
        sp.add_argument("--theta", type=float)
        sp.add_argument("--omega", type=float)
        sp.add_argument("--phi", type=float)
        sp.add_argument("--xi", type=float)

    def add_unitary(sp):
        sp.add_argument("--q", type=float)
        sp.add_argument("--r", type=float)
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--u-entries", dest="u_entries", type=json.loads,
                        help='2x2 entries as JSON [[ [re,im], ... ], ...]')

    sp = sub.add_parser("classify", parents=[common],
                        help="classify the extension labelled by U")
    add_family(sp)
    add_unitary(sp)

    sp = sub.add_parser("build-c", parents=[common],
                        help="emit the C operator, generator and projectors")
    sp.add_argument("--theta", type=float)
    sp.add_argument("--omega", type=float)

    sp = sub.add_parser("t-matrix", parents=[common],
                        help="coupling matrix via both construction paths")
    add_family(sp)

    sp = sub.add_parser("spectrum", parents=[common],
                        help="essential and discrete spectrum")
    sp.add_argument("--model", choices=("schrodinger", "dirac"))
    add_family(sp)
    add_unitary(sp)
    sp.add_argument("--light-speed", dest="c", type=float,
                    help="velocity of light (dirac model)")
    sp.add_argument("--coupling", type=json.loads,
                    help='2x2 coupling entries as JSON [[ [re,im], ... ], ...]')
    sp.add_argument("--sweep", nargs=4, metavar=("PARAM", "START", "STOP", "N"),
                    help="sweep one of theta/omega/phi/xi/c and emit CSV rows")

    sp = sub.add_parser("resolvent", parents=[common],
                        help="apply the extension resolvent to a sampled function")
    add_family(sp)
    sp.add_argument("--z-re", dest="z_re", type=float)
    sp.add_argument("--z-im", dest="z_im", type=float)
    sp.add_argument("--gaussian-center", dest="gaussian_center", type=float)
    sp.add_argument("--gaussian-width", dest="gaussian_width", type=float)
    sp.add_argument("--input", help="CSV file (x, re, im) sampled on the grid")

    sp = sub.add_parser("verify", parents=[common],
                        help="run the cross-check battery")
    sp.add_argument("--inject-fault", dest="inject_fault", action="store_true",
                    help="negative control: flip a matrix entry in one check")

    return ap


_COMMANDS = {
    "classify": cmd_classify,
    "build-c": cmd_build_c,
    "t-matrix": cmd_tmatrix,
    "spectrum": cmd_spectrum,
    "resolvent": cmd_resolvent,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(getattr(args, "config", None))
        args.json = bool(_merged(args, cfg, "json", False))
        if args.command == "resolvent" and getattr(args, "z_re", None) is not None:
            args.z = [args.z_re, 0.0 if args.z_im is None else args.z_im]
        elif args.command == "resolvent":
            args.z = None
        return _COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except NumericalFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
