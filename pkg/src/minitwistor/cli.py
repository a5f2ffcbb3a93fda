"""Command-line interface.

JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 verification failure, 2 input error. Floats are printed with 17
significant digits so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import g2, lines, sphere, study, transforms
from .errors import InputError, MinitwistorError
from .numerics import FDConfig
from .selftest import DEFAULT_SEED, MODULES, overall_passed, run_selftest

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class CLIInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIInputError(f"{self.prog}: {message}")


# -- serialization ----------------------------------------------------------


def dumps(obj) -> str:
    """JSON text with floats fixed to 17 significant digits; NaN/inf become null."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, complex):
        return dumps({"re": obj.real, "im": obj.imag})
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def vector(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of reals: {text!r}") from None
    return np.array(vals)


def rational_vector(text: str) -> list[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a comma-separated list of rationals: {text!r}") from None


def json_arg(text: str):
    """Inline JSON (starting with ``{`` or ``[``) or a path to a JSON file."""
    src = text.strip()
    if not src.startswith(("{", "[")):
        try:
            src = Path(text).read_text()
        except OSError as exc:
            raise argparse.ArgumentTypeError(f"cannot read {text!r}: {exc.strerror}") from None
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"malformed JSON: {exc}") from None


def _line_arg(obj) -> lines.OrientedLine:
    if isinstance(obj, dict) and "line" in obj:
        obj = obj["line"]
    if isinstance(obj, dict) and {"re", "du"} <= obj.keys():
        A = study.DualVector.from_json(obj)
        return study.dual_moment3_to_line(A)
    if not isinstance(obj, dict) or "u" not in obj or "v" not in obj:
        raise InputError('line JSON must be {"u": [...], "v": [...]}')
    # lenient: renormalize
    return lines.normalize_line(obj["u"], obj["v"])


def _fd(args) -> FDConfig:
    kwargs = {"richardson": getattr(args, "richardson", False)}
    if getattr(args, "step", None) is not None:
        kwargs["step"] = args.step
    return FDConfig.from_env(**kwargs)


def _ok(payload: dict, passed: bool = True) -> tuple[int, dict]:
    payload = dict(payload)
    payload["status"] = "ok" if passed else "fail"
    return (EXIT_OK if passed else EXIT_FAIL), payload


# -- line / section ---------------------------------------------------------


def cmd_line_from_points(args):
    return _ok({"line": lines.line_through_points(args.p, args.q).to_json()})


def cmd_line_intersect(args):
    if args.printed_formula:
        pairs = lines.sections_intersect(args.p, args.q, printed_formula=True)
        foot = lines.line_through_points(args.p, args.q).v
        matches = all(np.allclose(v, foot, rtol=0, atol=1e-12) for _, v in pairs)
        sys.stderr.write("diagnostic: printed intersection formula, compared with the foot of the perpendicular\n")
        return _ok(
            {
                "printed_formula": True,
                "lines": [{"u": u.tolist(), "v": v.tolist()} for u, v in pairs],
                "foot_oracle": foot.tolist(),
                "matches_oracle": matches,
            }
        )
    return _ok({"lines": [L.to_json() for L in lines.sections_intersect(args.p, args.q)]})


def cmd_line_incidence(args):
    L = _line_arg(args.line) if args.line is not None else lines.normalize_line(args.u, args.v)
    return _ok({"incident": lines.incidence(args.p, L), "line": L.to_json()})


def cmd_section_eval(args):
    return _ok({"line": lines.laplace_section_eval(args.p, args.u, strict=False).to_json()})


def cmd_section_zeros(args):
    return _ok({"zeros": [z.tolist() for z in lines.section_zeros(args.p)]})


def cmd_section_common(args):
    L = lines.common_point_of_three(args.p, args.q, args.r)
    return _ok({"line": None if L is None else L.to_json()})


# -- laplacian --------------------------------------------------------------


def _unit(u):
    n = np.linalg.norm(u)
    if n == 0:
        raise InputError("u must be nonzero")
    return u / n


def cmd_laplacian_check(args):
    u = _unit(args.u)
    cfg = _fd(args)
    res = sphere.eigen_residual(args.p, u, cfg)
    tol = args.tol * (1 + np.linalg.norm(args.p))
    return _ok({"residual": res, "tolerance": tol, "n": args.p.size - 1, "step": cfg.step}, res <= tol)


def cmd_laplacian_gradient(args):
    u = _unit(args.u)
    g = sphere.spherical_gradient(sphere.linear_function(args.p), u, _fd(args))
    section = lines.laplace_section_eval(args.p, u).v
    return _ok({"gradient": g.tolist(), "section": section.tolist(),
                "max_difference": float(np.max(np.abs(g - section)))})


def cmd_laplacian_multiplicity(args):
    out = {"closed_form": sphere.harmonic_multiplicity(args.n, args.k)}
    if args.oracle:
        out["oracle"] = sphere.harmonic_multiplicity_oracle(args.n, args.k)
        return _ok(out, out["oracle"] == out["closed_form"])
    return _ok(out)


# -- g2 ---------------------------------------------------------------------


def cmd_g2_cross(args):
    X, Y = args.x, args.y
    res = g2.cross_identity_residuals(X, Y)
    return _ok({"cross": g2.cross7(X, Y).tolist(), "identity_residuals": list(res)})


def cmd_g2_algebra_dim(args):
    d = g2.g2_algebra_dimension()
    return _ok({"dim": d}, d == 14)


def cmd_g2_isotropy(args):
    d = g2.isotropy_dimension(args.u)
    return _ok({"u": [str(x) for x in args.u], "dim": d}, d == 8)


def cmd_g2_pseudoholo(args):
    u = _unit(args.u)
    L, jac = g2.laplace_section_field(args.p)
    R = g2.pseudoholo_residual(L, u, None if args.fd else jac, _fd(args))
    worst = float(np.max(np.abs(R)))
    tol = 1e-5 if args.fd else 1e-12 * max(1.0, float(np.linalg.norm(args.p)))
    return _ok({"max_residual": worst, "tolerance": tol, "derivative": "fd" if args.fd else "analytic"},
               worst <= tol)


def _selftest_payload(results, timings):
    passed = overall_passed(results)
    payload = {
        "checks": [r.to_json(timings) for r in results],
        "passed": sum(r.passed for r in results if not r.expected_fail),
        "failed": sum(not r.passed for r in results if not r.expected_fail),
        "expected_failures": sum(r.expected_fail for r in results),
    }
    return _ok(payload, passed)


def cmd_g2_selftest(args):
    return _selftest_payload(run_selftest(args.seed, "g2"), args.timings)


# -- dual -------------------------------------------------------------------


def cmd_dual_angle(args):
    La, Lb = _line_arg(args.a), _line_arg(args.b)
    if args.rep == "moment":
        A, B = study.line_to_dual_moment3(La), study.line_to_dual_moment3(Lb)
    else:
        A, B = study.line_to_dual_foot(La), study.line_to_dual_foot(Lb)
    ang = study.dual_angle(A, B, rep=args.rep)
    dot = A.dot(B)
    return _ok({
        "theta": ang.theta, "rho": ang.rho, "direct": ang.direct,
        "dot": {"re": dot.a, "du": dot.b},
        "a": A.to_json(), "b": B.to_json(),
    })


def cmd_dual_motion(args):
    R = study.rotation_matrix3(args.axis, args.angle)
    M = study.motion_to_dual_matrix3(R, args.c)
    MtM = M.T @ M
    out = {"matrix": M.to_json(),
           "orthogonality_residual": float(max(np.max(np.abs(MtM.re - np.eye(3))), np.max(np.abs(MtM.du))))}
    if args.line is not None:
        L = _line_arg(args.line)
        A = M @ study.line_to_dual_moment3(L)
        out["image"] = A.to_json()
        out["line"] = study.dual_moment3_to_line(A).to_json()
    return _ok(out)


# -- whittaker / xray -------------------------------------------------------


def _spec(obj) -> transforms.TwistorFunctionSpec:
    return transforms.TwistorFunctionSpec.from_json(obj)


def _contour(obj) -> transforms.ContourSpec:
    return transforms.ContourSpec() if obj is None else transforms.ContourSpec.from_json(obj)


def cmd_whittaker_eval(args):
    V = transforms.whittaker_eval(_spec(args.spec), args.x, _contour(args.contour))
    return _ok({"V": V})


def cmd_whittaker_verify(args):
    spec, C = _spec(args.spec), _contour(args.contour)
    cfg = _fd(args)
    res = transforms.harmonicity_residual(spec, args.x, C, cfg)
    scale = transforms.harmonicity_scale(spec, args.x, C, cfg)
    tol = args.tol * scale
    return _ok({"residual": res, "scale": scale, "tolerance": tol}, res <= tol)


def cmd_whittaker_grid(args):
    spec, C = _spec(args.spec), _contour(args.contour)
    if args.lo.size != 3 or args.hi.size != 3:
        raise InputError("--lo and --hi must be points of R^3")
    if args.res < 1:
        raise InputError("--res must be at least 1")
    axes = [np.linspace(args.lo[i], args.hi[i], args.res) for i in range(3)]
    rows, invalid = [], 0
    for x1 in axes[0]:
        for x2 in axes[1]:
            for x3 in axes[2]:
                x = np.array([x1, x2, x3])
                try:
                    V = transforms.whittaker_eval(spec, x, C)
                except MinitwistorError:
                    V = complex(math.nan, math.nan)
                    invalid += 1
                rows.append((x1, x2, x3, V.real, V.imag))
    try:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "x2", "x3", "re_V", "im_V"])
            for row in rows:
                w.writerow([format(float(t), ".17g") for t in row])
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    if invalid:
        sys.stderr.write(f"{invalid} grid points invalid for this contour (written as NaN)\n")
    return _ok({"out": str(args.out), "rows": len(rows), "invalid": invalid})


def cmd_xray_eval(args):
    field = transforms.FieldSpec.from_json(args.field)
    L = _line_arg(args.line) if args.line is not None else lines.normalize_line(args.u, args.v)
    return _ok({"value": transforms.xray_transform(field, L, args.method), "line": L.to_json()})


def cmd_xray_john(args):
    field = transforms.FieldSpec.from_json(args.field)
    if args.chart.size != 4:
        raise InputError("--chart takes a1,a2,b1,b2")
    res = transforms.john_residual(field, args.chart, _fd(args))
    scale = max(field.peak_transform(), 1e-300)
    tol = args.tol * scale
    return _ok({"residual": res, "scale": scale, "tolerance": tol,
                "value": transforms.john_transform(field, args.chart)}, res <= tol)


def cmd_selftest(args):
    results = run_selftest(args.seed, args.module, corrupt_phi=args.corrupt_phi)
    code, payload = _selftest_payload(results, args.timings)
    payload = {"seed": args.seed, "module": args.module, **payload}
    return code, payload


# -- parser -----------------------------------------------------------------


def _fd_flags(p):
    p.add_argument("--step", type=float, default=None, help="FD step (default 1e-3 or $MINITWISTOR_FD_STEP)")
    p.add_argument("--richardson", action="store_true", help="one Richardson extrapolation level")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minitwistor", description="Oriented lines, Laplace sections and twistor transforms.")
    groups = parser.add_subparsers(dest="group", required=True)

    def group(name, help_):
        g = groups.add_parser(name, help=help_)
        return g.add_subparsers(dest="action", required=True)

    line = group("line", "oriented lines")
    p = line.add_parser("from-points", help="oriented line from p towards q")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--q", type=vector, required=True)
    p.set_defaults(func=cmd_line_from_points)
    p = line.add_parser("intersect", help="the two common points of the sections of p and q")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--q", type=vector, required=True)
    p.add_argument("--printed-formula", action="store_true", help="diagnostic: use the printed (uncorrected) foot formula")
    p.set_defaults(func=cmd_line_intersect)
    p = line.add_parser("incidence", help="does p lie on the line?")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--line", type=json_arg)
    p.add_argument("--u", type=vector)
    p.add_argument("--v", type=vector)
    p.set_defaults(func=cmd_line_incidence)

    section = group("section", "Laplace sections")
    p = section.add_parser("eval", help="value of the section of p at u")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--u", type=vector, required=True)
    p.set_defaults(func=cmd_section_eval)
    p = section.add_parser("zeros", help="the two zeros of the section of p")
    p.add_argument("--p", type=vector, required=True)
    p.set_defaults(func=cmd_section_zeros)
    p = section.add_parser("common", help="common twistor point of three sections")
    for name in ("--p", "--q", "--r"):
        p.add_argument(name, type=vector, required=True)
    p.set_defaults(func=cmd_section_common)

    lap = group("laplacian", "spherical Laplacian")
    p = lap.add_parser("check", help="eigenvalue-n residual of chi_p at u")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--u", type=vector, required=True)
    p.add_argument("--tol", type=float, default=1e-5)
    _fd_flags(p)
    p.set_defaults(func=cmd_laplacian_check)
    p = lap.add_parser("gradient", help="FD gradient of chi_p against the Laplace section")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--u", type=vector, required=True)
    _fd_flags(p)
    p.set_defaults(func=cmd_laplacian_gradient)
    p = lap.add_parser("multiplicity", help="dimension of the k-th eigenspace on S^n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also count harmonic polynomials exactly")
    p.set_defaults(func=cmd_laplacian_multiplicity)

    g = group("g2", "G2 structure on R^7")
    p = g.add_parser("selftest", help="run the G2 invariant suites")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_g2_selftest)
    p = g.add_parser("cross", help="7-dimensional cross product")
    p.add_argument("--x", type=vector, required=True)
    p.add_argument("--y", type=vector, required=True)
    p.set_defaults(func=cmd_g2_cross)
    p = g.add_parser("algebra-dim", help="exact dimension of g2")
    p.set_defaults(func=cmd_g2_algebra_dim)
    p = g.add_parser("isotropy", help="exact dimension of the stabiliser of u in g2")
    p.add_argument("--u", type=rational_vector, required=True)
    p.set_defaults(func=cmd_g2_isotropy)
    p = g.add_parser("pseudoholo", help="pseudoholomorphicity residual of the section of p")
    p.add_argument("--p", type=vector, required=True)
    p.add_argument("--u", type=vector, required=True)
    p.add_argument("--fd", action="store_true", help="finite-difference derivative")
    _fd_flags(p)
    p.set_defaults(func=cmd_g2_pseudoholo)

    dual = group("dual", "dual-number line geometry")
    p = dual.add_parser("angle", help="dual angle between two lines")
    p.add_argument("--a", type=json_arg, required=True, help="line JSON or moment dual vector JSON")
    p.add_argument("--b", type=json_arg, required=True)
    p.add_argument("--rep", choices=("moment", "foot"), default="moment")
    p.set_defaults(func=cmd_dual_angle)
    p = dual.add_parser("motion", help="dual orthogonal matrix of a rigid motion")
    p.add_argument("--axis", type=vector, default=np.array([0.0, 0.0, 1.0]))
    p.add_argument("--angle", type=float, default=0.0)
    p.add_argument("--c", type=vector, default=np.zeros(3))
    p.add_argument("--line", type=json_arg)
    p.set_defaults(func=cmd_dual_motion)

    wh = group("whittaker", "contour-integral harmonic functions")
    for name, func, help_ in (
        ("eval", cmd_whittaker_eval, "V(x) for a twistor function"),
        ("verify", cmd_whittaker_verify, "harmonicity residual of V at x"),
    ):
        p = wh.add_parser(name, help=help_)
        p.add_argument("--spec", type=json_arg, required=True)
        p.add_argument("--x", type=vector, required=True)
        p.add_argument("--contour", type=json_arg)
        if name == "verify":
            p.add_argument("--tol", type=float, default=1e-4)
            _fd_flags(p)
        p.set_defaults(func=func)
    p = wh.add_parser("grid", help="CSV of V over a box")
    p.add_argument("--spec", type=json_arg, required=True)
    p.add_argument("--contour", type=json_arg)
    p.add_argument("--lo", type=vector, required=True)
    p.add_argument("--hi", type=vector, required=True)
    p.add_argument("--res", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_whittaker_grid)

    xr = group("xray", "X-ray transform")
    p = xr.add_parser("eval", help="integral of a field along a line")
    p.add_argument("--field", type=json_arg, required=True)
    p.add_argument("--line", type=json_arg)
    p.add_argument("--u", type=vector)
    p.add_argument("--v", type=vector)
    p.add_argument("--method", choices=("closed", "quad"), default="closed")
    p.set_defaults(func=cmd_xray_eval)
    p = xr.add_parser("john", help="ultrahyperbolic residual at a chart point")
    p.add_argument("--field", type=json_arg, required=True)
    p.add_argument("--chart", type=vector, required=True)
    p.add_argument("--tol", type=float, default=1e-4)
    _fd_flags(p)
    p.set_defaults(func=cmd_xray_john)

    p = groups.add_parser("selftest", help="run every invariant suite")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--module", choices=MODULES)
    p.add_argument("--timings", action="store_true", help="include per-check wall time (not deterministic)")
    p.add_argument("--corrupt-phi", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


_NEGATIVE = re.compile(r"^-[\d.]")


def _attach_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-1,2,3" as an option; glue such values to their flag
    out: list[str] = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run_command(argv: list[str]) -> tuple[int, str]:
    """Run one command; return the exit code and the JSON text for stdout."""
    try:
        args = build_parser().parse_args(_attach_negative_values(list(argv)))
        if getattr(args, "line", None) is None and getattr(args, "func", None) in (cmd_line_incidence, cmd_xray_eval):
            if args.u is None or args.v is None:
                raise InputError("give either --line or both --u and --v")
        code, payload = args.func(args)
    except (CLIInputError, InputError, argparse.ArgumentTypeError) as exc:
        code, payload = EXIT_INPUT, {"status": "error", "error": {"type": type(exc).__name__, "message": str(exc)}}
    except MinitwistorError as exc:
        code, payload = EXIT_FAIL, {"status": "fail", "error": {"type": type(exc).__name__, "message": str(exc)}}
    return code, dumps(payload)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv or argv[0] in ("-h", "--help") or "-h" in argv or "--help" in argv:
        try:
            build_parser().parse_args(argv or ["--help"])
        except SystemExit as exc:
            return int(exc.code or 0)
    code, text = run_command(argv)
    if code == EXIT_INPUT:
        sys.stderr.write(json.loads(text)["error"]["message"] + "\n")
    sys.stdout.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
