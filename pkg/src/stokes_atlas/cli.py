"""Command-line front end: ``stokes-atlas {analyze|verify|slice|eval}``.

Exit codes: 0 success, 1 a mandatory verification check failed, 2 bad
arguments, 3 non-generic parameters, 4 invalid case or label, 5 point on a
singular locus, 6 any other numerical failure (pole, no convergence).
"""

from __future__ import annotations

import argparse
import cmath
import csv
import datetime as _dt
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import gkz as gk
from . import hyperfun as hf
from . import stokes as st
from .errors import CaseError, DomainError, GenericityError, StokesAtlasError

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_GENERIC, EXIT_CASE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2, 3, 4, 5, 6


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# parsing


_COMPLEX_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?([+-](\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?i?$")


def parse_complex(text: str) -> complex:
    """``re+imi`` syntax, e.g. ``0.3-0.2i``, ``-2i``, ``1.5``, ``i``."""
    s = text.strip().replace(" ", "")
    if s in ("i", "+i"):
        return 1j
    if s == "-i":
        return -1j
    s = re.sub(r"([+-])i$", r"\g<1>1i", s)
    if not _COMPLEX_RE.match(s):
        raise UsageError(f"cannot parse complex number {text!r}")
    try:
        return complex(s[:-1] + "j" if s.endswith("i") else s)
    except ValueError as exc:
        raise UsageError(f"cannot parse complex number {text!r}") from exc


def parse_complex_list(text: str | None) -> list:
    if text is None or text.strip() == "":
        return []
    return [parse_complex(t) for t in text.split(",")]


def parse_float_list(text: str | None) -> list:
    if text is None or text.strip() == "":
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse real list {text!r}") from exc


# --------------------------------------------------------------------------
# serialization


def _fmt_float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    s = format(v, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_jsonable(obj):
    """Convert numpy/complex containers into plain lists, dicts, floats and strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list):
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def loads(text: str):
    return json.loads(text)


def matrix_entries(M) -> list:
    """Row-major ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


# --------------------------------------------------------------------------
# report assembly


def _flags(args) -> dict:
    return {
        "k0_term": bool(getattr(args, "k0_term", False)),
        "raw_sigma2_prefactor": bool(getattr(args, "raw_sigma2_prefactor", False)),
        "hpi_literal": bool(getattr(args, "hpi_literal", False)),
    }


def _corrections(flags: dict) -> list:
    out = [
        "operator carries the factor x: L = (-1)^sigma x prod(theta+mu) - prod(theta+nu-1)",
        "sigma=0 mod 4 S_0 A-sum starts at k=1" if not flags["k0_term"] else "sigma=0 mod 4 S_0 A-sum includes k=0 (raw)",
        "sigma=2 mod 4 S_0 prefactor read as a single (2 pi)^sigma i"
        if not flags["raw_sigma2_prefactor"] else "sigma=2 mod 4 S_0 prefactor squared (raw)",
        "hypersurface equations use 2 h pi" if not flags["hpi_literal"] else "hypersurface equations use 2 h (raw)",
        "Gamma-series factorization uses argument (-1)^p z",
        "total monodromy transition count N inferred from the sector counts",
    ]
    return out


def check_dict(c: st.Check) -> dict:
    return {"name": c.name, "passed": c.passed, "residual": c.residual, "mandatory": c.mandatory, "detail": c.detail}


def stokes_section(params: hf.HyperParams, flags: dict, oracle: bool = True) -> dict:
    structure = st.build_structure(params, flags["k0_term"], flags["raw_sigma2_prefactor"])
    c = structure.constants
    rep = audit_section(params, flags, oracle)
    return {
        "constants": {
            "sigma": params.sigma,
            "lambda": c.lam,
            "zeta": c.zeta,
            "index_set": list(c.index_set),
            "A": list(c.A),
            "B": list(c.B),
        },
        "exponential_factors": [dict(f) for f in structure.exponential_factors],
        "sectors": [{"n": s.n, "arg_lo": s.lo, "arg_hi": s.hi} for s in structure.sectors],
        "lines": [{"family": ln.family, "pair": list(ln.pair), "arg_t": list(ln.angles)} for ln in structure.lines],
        "matrices": {lab: matrix_entries(S) for lab, S in structure.matrices.items()},
        "formal_monodromy": matrix_entries(structure.formal_monodromy),
        "total_monodromy": matrix_entries(structure.total_monodromy()),
        "transition_count": st.transition_count(params.sigma),
        "index_issues": list(structure.issues),
        "audit": rep,
    }


def audit_section(params: hf.HyperParams, flags: dict, oracle: bool = True) -> dict:
    rep = st.audit(params, flags["k0_term"], flags["raw_sigma2_prefactor"], oracle=oracle)
    return {
        "passed": rep.passed,
        "checks": [check_dict(c) for c in rep.checks],
        "issues": rep.issues,
        "flags": rep.flags,
        "eig_M_inf": list(rep.closed_form["eig_M_inf"]),
    }


def _params_echo(params: hf.HyperParams) -> dict:
    return {"a": list(params.a), "b": list(params.b), "p": params.p, "q": params.q, "sigma": params.sigma,
            "mu": list(params.mu), "nu": list(params.nu)}


def _ode_params(args) -> hf.HyperParams:
    try:
        return hf.HyperParams(parse_complex_list(args.a), parse_complex_list(args.b))
    except ValueError as exc:
        if isinstance(exc, StokesAtlasError):
            raise
        raise UsageError(str(exc)) from exc


def _gkz_model(args) -> gk.GkzModel:
    a, b = parse_complex_list(args.a), parse_complex_list(args.b)
    p = len(a) if args.p is None else args.p
    q = (len(b) - 1) if args.q is None else args.q
    try:
        return gk.build_model(p, q, a, b)
    except ValueError as exc:
        if isinstance(exc, StokesAtlasError):
            raise
        raise UsageError(str(exc)) from exc


def build_report(args) -> dict:
    flags = _flags(args)
    report = {
        "tool": {"name": "stokes-atlas", "version": __version__, "flags": flags, "corrections": _corrections(flags)},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "mode": args.mode,
    }
    if args.mode == "ode":
        params = _ode_params(args)
        params.require_generic()
        if args.matrix:
            st.canonical_label(params.sigma, args.matrix)
        report["params"] = _params_echo(params)
        if params.sigma < 1:
            raise CaseError(f"sigma = {params.sigma}: no irregular singularity at infinity")
        report["regular"] = False
        report["stokes"] = stokes_section(params, flags)
    else:
        model = _gkz_model(args)
        report["params"] = {"a": list(model.a), "b": list(model.b), "p": model.p, "q": model.q,
                            "b_completed": model.b_completed}
        report["regular"] = model.regular
        report["gkz"] = {
            "n_vars": model.n_vars,
            "lattice_gen": list(model.lattice_gen),
            "sigma_eff": model.sigma_eff,
            "rank": model.q + 1,
            "beta": {f"1,{j}": v for (_, j), v in model.beta.items()},
            "gammas": [list(g) for g in model.gammas],
            "singular_divisor": gk.singular_divisor(model.p, model.q),
        }
        if not model.regular:
            params = model.one_variable_params()
            params.require_generic()
            if args.matrix:
                st.canonical_label(params.sigma, args.matrix)
            factors = gk.exponential_factors(model)
            report["gkz"]["exponential_factors"] = factors
            report["gkz"]["good_decomposition"] = gk.is_good_decomposition(factors)
            report["gkz"]["one_variable_params"] = _params_echo(params)
            report["stokes"] = stokes_section(params, flags)
    return to_jsonable(report)


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# verify


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("STOKES_ATLAS_THREADS", "1")))
    except ValueError:
        return 1


def _sample_params(rng, p: int, q: int):
    while True:
        a = rng.uniform(-0.9, 0.9, p) + 1j * rng.uniform(-0.3, 0.3, p)
        b = rng.uniform(-0.9, 0.9, q) + 1j * rng.uniform(-0.3, 0.3, q)
        params = hf.HyperParams(a, b)
        gaps = [hf.nm.distance_to_integer(u - v) for u in list(a) + list(b) for v in list(a) + list(b)
                if u is not v and u != v]
        if min(gaps, default=1.0) > 0.05:
            return params


def _residual_suite(params: hf.HyperParams, tol: float) -> list:
    checks = []
    alpha, beta = params.a, params.b
    op, scale = hf.annihilator_params(alpha, beta)
    x = 2.0 * cmath.exp(0.7j)
    series = hf.fpq_series(alpha, beta, 80, scale)
    r = hf.ode_residual(op, series, x)
    checks.append({"name": "fpq_series_ode_residual", "passed": r < 1e-10, "residual": r, "mandatory": True, "detail": ""})
    perm = hf.eval_fpq(hf.HyperParams(alpha[::-1], beta[::-1]), x, tol).value
    val = hf.eval_fpq(params, x, tol).value
    d = abs(perm - val) / max(abs(val), 1e-300)
    checks.append({"name": "fpq_permutation_symmetry", "passed": d < 1e-12, "residual": d, "mandatory": True, "detail": ""})
    return checks


def _gkz_suite(model: gk.GkzModel, x) -> list:
    checks = []
    for i in range(1, model.q + 2):
        v = gk.eval_gamma_series(model, i, x).value
        v1 = gk.eval_gamma_series(model, i, x, shift=1).value
        f = gk.gamma_series_factorized(model, i, x).value
        r = gk.pde_residual(model, i, x)
        scale = max(abs(v), 1e-300)
        checks += [
            {"name": f"gamma{i}_shift_invariance", "passed": abs(v - v1) / scale < 1e-13,
             "residual": abs(v - v1) / scale, "mandatory": True, "detail": ""},
            {"name": f"gamma{i}_factorization", "passed": abs(v - f) / scale < 1e-11,
             "residual": abs(v - f) / scale, "mandatory": True, "detail": ""},
            {"name": f"gamma{i}_euler_termwise", "passed": r.euler_termwise_exact and max(r.euler) == 0.0,
             "residual": max(r.euler), "mandatory": True, "detail": ""},
            {"name": f"gamma{i}_toric_tail", "passed": r.toric <= r.toric_bound + 1e-14 * scale,
             "residual": r.toric, "mandatory": True, "detail": f"bound {r.toric_bound:.3e}"},
        ]
    return checks


def _verify_one(params: hf.HyperParams, flags: dict, tol: float, model: gk.GkzModel | None = None) -> dict:
    params.require_generic()
    checks = _residual_suite(params, tol)
    if model is not None:
        x = [0.9 * cmath.exp(0.3j * (k + 1)) for k in range(model.n_vars)]
        checks += _gkz_suite(model, x)
        params = model.one_variable_params()
    out = {"params": _params_echo(params), "residual_checks": checks}
    if params.sigma >= 1:
        aud = audit_section(params, flags)
        out["audit"] = aud
        spectral = [c for c in aud["checks"] if c["name"] == "spectral_identity"][0]
        out["advisory"] = [] if params.sigma <= 2 else [spectral]
    mandatory = [c for c in checks if c["mandatory"]]
    if "audit" in out:
        mandatory += [c for c in out["audit"]["checks"] if c["mandatory"]]
    out["passed"] = all(c["passed"] for c in mandatory)
    return out


def build_verify(args) -> dict:
    flags = _flags(args)
    jobs = []
    if args.a is not None or args.b is not None:
        if args.mode == "gkz":
            model = _gkz_model(args)
            jobs.append((hf.HyperParams(model.a, model.b[:-1]), model))
        else:
            jobs.append((_ode_params(args), None))
    else:
        if args.p is None or args.q is None:
            raise UsageError("verify needs --a/--b or --p/--q for sampling")
        rng = np.random.default_rng(args.seed)
        for _ in range(args.samples):
            params = _sample_params(rng, args.p, args.q)
            model = None
            if args.mode == "gkz":
                extra = _sample_params(rng, 0, 1).b
                model = gk.build_model(args.p, args.q, params.a, list(params.b) + list(extra))
            jobs.append((params, model))
    with ThreadPoolExecutor(max_workers=min(_threads(), max(1, len(jobs)))) as pool:
        results = list(pool.map(lambda job: _verify_one(job[0], flags, args.tol, job[1]), jobs))
    return to_jsonable({
        "tool": {"name": "stokes-atlas", "version": __version__, "flags": flags, "corrections": _corrections(flags)},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "mode": args.mode,
        "seed": args.seed,
        "samples": results,
        "passed": all(r["passed"] for r in results),
    })


# --------------------------------------------------------------------------
# slice


def _pair_label(sol: gk.SliceSolution) -> str:
    if sol.family == "sps1":
        return f"sps1_h{sol.pair[1]}"
    return f"sps2_h{sol.pair[0]}_h{sol.pair[1]}"


def slice_rows(model: gk.GkzModel, sl: gk.SlicePoint, hpi_literal: bool, pair=None) -> list:
    rows = []
    for s in gk.hypersurface_slice(model, sl, hpi_literal):
        if pair is not None and tuple(s.pair) != tuple(pair):
            continue
        h1, h2 = (s.pair[1], "") if s.family == "sps1" else (s.pair[0], s.pair[1])
        rows.append([_fmt_float(s.theta1), _pair_label(s), h1, h2, s.branch_sign, s.n])
    return rows


def run_slice(args) -> None:
    model = _gkz_model(args)
    if model.regular:
        raise CaseError("no Stokes hypersurfaces for the regular system")
    fixed = parse_float_list(args.fixed_args)
    thetas = parse_float_list(args.theta)
    l = args.l
    pair = tuple(int(v) for v in args.pair.split(",")) if args.pair else None
    header = ["theta1_rad", "pair_label", "h1", "h2", "branch_sign", "n"]
    try:
        base = gk.SlicePoint(l, fixed, thetas)
        gk.rotation_angle(model, base)
    except ValueError as exc:
        if isinstance(exc, StokesAtlasError):
            raise
        raise UsageError(str(exc)) from exc
    slot = args.sweep_slot if args.sweep_slot is not None else model.p - l
    if not 0 <= slot < len(fixed):
        raise UsageError(f"sweep slot {slot} outside 0..{len(fixed) - 1}")
    grid = [2 * math.pi * k / args.samples for k in range(args.samples)]

    def point(v):
        vals = list(fixed)
        vals[slot] = v
        return gk.SlicePoint(l, vals, thetas)

    out_rows = []
    if args.sweep:
        header = ["swept_arg_rad"] + header
        for v in grid:
            for row in slice_rows(model, point(v), args.hpi_literal, pair):
                out_rows.append([_fmt_float(v)] + row)
    else:
        out_rows = slice_rows(model, base, args.hpi_literal, pair)
    _write_csv(args.out, header, out_rows)
    if args.out:
        root, ext = os.path.splitext(args.out)
        rot = [[_fmt_float(v), _fmt_float(gk.rotation_angle(model, point(v)))] for v in grid]
        _write_csv(root + "_rotation" + (ext or ".csv"), ["swept_arg_rad", "rotation_angle_rad"], rot)


def _write_csv(path, header, rows):
    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            fh.close()


# --------------------------------------------------------------------------
# eval


def run_eval(args) -> dict:
    if args.fpq:
        params = _ode_params(args)
        ev = hf.eval_fpq(params, parse_complex(args.x), args.tol)
    elif args.basis:
        params = _ode_params(args)
        if args.h is None or not 1 <= args.h <= params.q:
            raise CaseError(f"--h must lie in 1..{params.q}")
        ev = hf.eval_basis_at_zero(params, parse_complex(args.x), args.tol)[args.h - 1]
    else:
        model = _gkz_model(args)
        x = parse_complex_list(args.x)
        if len(x) != model.n_vars:
            raise UsageError(f"--x needs {model.n_vars} coordinates")
        if args.i is None:
            raise UsageError("--i is required")
        if args.gamma_series:
            ev = gk.eval_gamma_series(model, args.i, x, args.tol, shift=args.shift)
        else:
            val = gk.lifted_basis(model, args.i, args.tol)(x)
            ev = hf.Evaluation(val, float("nan"), 0)
    return to_jsonable({"value": ev.value, "err_estimate": ev.err_estimate, "terms_used": ev.terms_used})


# --------------------------------------------------------------------------
# argument parser


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stokes-atlas", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mode=True):
        if mode:
            p.add_argument("--mode", choices=["ode", "gkz"], default="ode")
        p.add_argument("--a", help="upper parameters, comma separated (re+imi syntax)")
        p.add_argument("--b", help="lower parameters, comma separated")
        p.add_argument("--p", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out")
        p.add_argument("--k0-term", action="store_true", help="keep the k=0 A-term (sigma = 0 mod 4)")
        p.add_argument("--raw-sigma2-prefactor", action="store_true",
                       help="square the (2 pi)^sigma i prefactor (sigma = 2 mod 4)")
        p.add_argument("--hpi-literal", action="store_true", help="use 2h instead of 2h pi in slice equations")

    pa = sub.add_parser("analyze", help="full Stokes report")
    common(pa)
    pa.add_argument("--matrix", help="validate a Stokes matrix label for the sigma-case")

    pv = sub.add_parser("verify", help="audit and residual suites")
    common(pv)
    pv.add_argument("--samples", type=int, default=20)

    ps = sub.add_parser("slice", help="Stokes hypersurface slice as CSV")
    common(ps, mode=False)
    ps.add_argument("--l", type=int, default=1)
    ps.add_argument("--fixed-args", default="", help="arg x_{l+1}..arg x_{p+q+1} in radians")
    ps.add_argument("--theta", default="", help="theta_2..theta_l in radians")
    ps.add_argument("--pair", help="restrict to one factor pair, e.g. 0,0")
    ps.add_argument("--sweep", action="store_true", help="sweep one fixed argument over [0, 2 pi)")
    ps.add_argument("--sweep-slot", type=int, help="0-based index into --fixed-args (default: arg x_{p+1})")
    ps.add_argument("--samples", type=int, default=360)

    pe = sub.add_parser("eval", help="evaluate a single function value")
    common(pe, mode=False)
    kind = pe.add_mutually_exclusive_group(required=True)
    kind.add_argument("--fpq", action="store_true")
    kind.add_argument("--basis", action="store_true")
    kind.add_argument("--gamma-series", action="store_true")
    kind.add_argument("--lift", action="store_true")
    pe.add_argument("--x", required=True)
    pe.add_argument("--h", type=int)
    pe.add_argument("--i", type=int)
    pe.add_argument("--shift", type=int, default=0)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            _write(dumps(build_report(args)) + "\n", args.out)
            return EXIT_OK
        if args.command == "verify":
            rep = build_verify(args)
            _write(dumps(rep) + "\n", args.out)
            return EXIT_OK if rep["passed"] else EXIT_VERIFY
        if args.command == "slice":
            args.mode = "gkz"
            run_slice(args)
            return EXIT_OK
        args.mode = "gkz" if (args.gamma_series or args.lift) else "ode"
        _write(dumps(run_eval(args)) + "\n", args.out)
        return EXIT_OK
    except UsageError as exc:
        print(f"stokes-atlas: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GenericityError as exc:
        print(f"stokes-atlas: GenericityError: {exc}", file=sys.stderr)
        return EXIT_GENERIC
    except CaseError as exc:
        print(f"stokes-atlas: CaseError: {exc}", file=sys.stderr)
        return EXIT_CASE
    except DomainError as exc:
        print(f"stokes-atlas: DomainError: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except StokesAtlasError as exc:
        print(f"stokes-atlas: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
