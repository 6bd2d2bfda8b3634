"""``psr``: command-line access to the toolkit.

Every command reads a polynomial in the JSON schema
``{"n": n, "terms": [{"monomial": [e_x, e_y1, ...], "coeff": c}]}``
(or a previous command's output holding one under ``limit_p3`` or
``polynomial``) and writes JSON to stdout.  Errors are written as
``{"error": code, "message": ...}`` with exit status 2.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import catalog, examples, metric
from .cubic import CubicForm, StandardFormPoly, assemble_standard, extract_standard, from_json_dict, to_json_dict
from .errors import ParseError, PSRError, SchemaError
from .evolution import evolve, extract_limit, horizon_R
from .hyperbolicity import DEFAULT_SEED, DEFAULT_SING_TOL, closedness
from .standard_form import FIXED, CONTINUOUS, standard_form_at

EXIT_ERROR = 2


def default_seed():
    env = os.environ.get("PSR_SEED")
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise ParseError(f"PSR_SEED={env!r} is not an integer") from None


# -- I/O helpers -----------------------------------------------------------------


def _plain(obj):
    """Convert numpy scalars/arrays and enums into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def emit(obj, out=None):
    text = json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"
    _write(text, out)


def _write(text, out=None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def load_polynomial(path) -> CubicForm:
    try:
        if path == "-":
            raw = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                raw = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if isinstance(doc, dict) and "terms" not in doc:
        for key in ("limit_p3", "polynomial", "standard_form"):
            if isinstance(doc.get(key), dict):
                doc = doc[key]
                break
    return from_json_dict(doc)


def load_standard(path) -> StandardFormPoly:
    return extract_standard(load_polynomial(path))


def parse_vector(text, name="vector"):
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise ParseError(f"--{name} expects comma-separated numbers, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ParseError(f"--{name} expects finite numbers, got {text!r}")
    return np.array(vals)


def _check_len(v, n, name):
    if len(v) != n:
        raise SchemaError(f"--{name} needs {n} entries, got {len(v)}")
    return v


def p3_terms(p3: CubicForm):
    """P3 as a term list over the ``y`` variables only."""
    out = []
    for idx, c in sorted(p3.coeffs.items()):
        if c != 0.0:
            mon = [0] * p3.dim
            for i in idx:
                mon[i] += 1
            out.append({"monomial": mon, "coeff": float(c)})
    return out


def sf_json(sf: StandardFormPoly):
    return to_json_dict(assemble_standard(sf))


# -- commands ----------------------------------------------------------------------


def cmd_check(args):
    sf = load_standard(args.poly)
    v = closedness(sf, sing_tol=args.sing_tol, seed=args.seed)
    return {"status": v.status, "max_value": v.max_value, "margin": v.margin, "argmax": v.argmax}


def cmd_standard_form(args):
    h = load_polynomial(args.poly)
    p = _check_len(parse_vector(args.point, "point"), h.dim, "point")
    at = standard_form_at(h, p, FIXED if args.gauge == "fixed" else CONTINUOUS)
    return {
        "A": at.transform.matrix,
        "P3": {"n": at.sf.n, "terms": p3_terms(at.sf.p3)},
        "standard_form": sf_json(at.sf),
    }


def _direction(args, n):
    return _check_len(parse_vector(args.dir, "dir"), n, "dir")


def cmd_evolve(args):
    sf = load_standard(args.poly)
    v = _direction(args, sf.n)
    if args.samples < 1:
        raise SchemaError("--samples must be positive")
    R = horizon_R(float(sf.p3(v / np.linalg.norm(v))))
    t_max = R if args.t_max is None else args.t_max
    ts = [t_max * j / args.samples for j in range(args.samples)] if args.t is None else list(parse_vector(args.t, "t"))
    trace = evolve(sf, v, ts, FIXED if args.gauge == "fixed" else CONTINUOUS)
    return {
        "direction": trace.direction,
        "R": trace.R,
        "samples": [{"t": s.t, "P3": p3_terms(s.sf.p3), "cond": s.cond} for s in trace.samples],
    }


def cmd_limit(args):
    sf = load_standard(args.poly)
    v = _direction(args, sf.n)
    lim = extract_limit(sf, v, FIXED if args.gauge == "fixed" else CONTINUOUS, tol=args.tol)
    return {
        "limit_p3": sf_json(lim.limit_sf),
        "error_estimate": lim.extrapolation_error_estimate,
        "R": lim.R,
        "samples_used": lim.samples_used,
    }


def cmd_classify(args):
    sf = load_standard(args.poly)
    res = catalog.classify(sf.p3, tol=args.class_tol, seed=args.seed)
    d = res.to_dict()
    d["w_axis"] = res.w_axis
    return d


def cmd_symmetry_dim(args):
    sf = load_standard(args.poly)
    k = catalog.symmetry_dim_lower_bound(sf)
    return {"symmetry_dim_lower_bound": k} if args.json else k


def cmd_dom_plot(args):
    sf = load_standard(args.poly)
    text = metric.dom_boundary_emit(sf, args.resolution, seed=args.seed)
    if args.json:
        rows = [line.split(",") for line in text.strip().split("\n")]
        return {"columns": rows[0], "rows": [[float(x) for x in r] for r in rows[1:]]}
    _write(text, args.out)
    return None


def cmd_metric(args):
    sf = load_standard(args.poly)
    out = {}
    if args.point is not None:
        y = _check_len(parse_vector(args.point, "point"), sf.n, "point")
        out["point"] = y
        out["g"] = metric.centro_affine_metric(sf, y).g
    if args.dir is not None:
        v = _direction(args, sf.n)
        res = metric.metric_convergence_check(sf, v, U_radius=args.radius, eps=args.eps)
        out["convergence"] = res.to_dict()
    if not out:
        raise SchemaError("metric needs --point and/or --dir")
    return out


EXAMPLE_PARAMS = ("n", "m", "b", "c")


def cmd_examples(args):
    if args.name == "list":
        return {"examples": sorted(examples.REGISTRY)}
    params = {k: getattr(args, k) for k in EXAMPLE_PARAMS if getattr(args, k) is not None}
    if args.F is not None:
        params["F"] = json.loads(args.F)
    try:
        sf = examples.registry(args.name, **params)
    except TypeError as exc:
        raise SchemaError(f"bad parameters for {args.name}: {exc}") from None
    out = {"name": args.name, "polynomial": sf_json(sf)}
    if args.t is not None:
        if args.name != "motivating":
            raise SchemaError("--t is only defined for the motivating example")
        trace = evolve(sf, [1.0, 0.0], [args.t])
        out["t"] = args.t
        out["P3_t"] = p3_terms(trace.samples[0].sf.p3)
        out["P3_t_closed_form"] = p3_terms(examples.motivating_at(args.t).p3)
    return out


# -- parser ----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $PSR_SEED or built-in)")
    common.add_argument("--json", action="store_true", help="machine-readable output everywhere")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")

    p = argparse.ArgumentParser(prog="psr", description="Cubic projective special real toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("check", cmd_check, "closedness verdict of a standard form")
    sp.add_argument("poly")
    sp.add_argument("--sing-tol", type=float, default=DEFAULT_SING_TOL)

    sp = add("standard-form", cmd_standard_form, "standard form with reference point p")
    sp.add_argument("poly")
    sp.add_argument("--point", required=True)
    sp.add_argument("--gauge", choices=["continuous", "fixed"], default="continuous")

    for name, fn, help_ in (("evolve", cmd_evolve, "P3|_t along a direction"), ("limit", cmd_limit, "limit polynomial along a direction")):
        sp = add(name, fn, help_)
        sp.add_argument("poly")
        sp.add_argument("--dir", required=True)
        sp.add_argument("--gauge", choices=["continuous", "fixed"], default="continuous")
        if name == "evolve":
            sp.add_argument("--samples", type=int, default=8)
            sp.add_argument("--t-max", type=float, default=None)
            sp.add_argument("--t", default=None, help="explicit comma-separated t values")
        else:
            sp.add_argument("--tol", type=float, default=1e-4)

    sp = add("classify", cmd_classify, "match a limit polynomial against the catalog")
    sp.add_argument("poly")
    sp.add_argument("--class-tol", type=float, default=catalog.CLASS_TOL)

    sp = add("symmetry-dim", cmd_symmetry_dim, "lower bound for the symmetry dimension")
    sp.add_argument("poly")

    sp = add("dom-plot", cmd_dom_plot, "CSV samples of the boundary of dom(H)")
    sp.add_argument("poly")
    sp.add_argument("--resolution", type=int, default=360)

    sp = add("metric", cmd_metric, "centro-affine metric; convergence check with --dir")
    sp.add_argument("poly")
    sp.add_argument("--point", default=None)
    sp.add_argument("--dir", default=None)
    sp.add_argument("--radius", type=float, default=0.2)
    sp.add_argument("--eps", type=float, default=1e-2)

    sp = add("examples", cmd_examples, "named example polynomials ('list' to enumerate)")
    sp.add_argument("name")
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--c", type=float, default=None)
    sp.add_argument("--F", default=None, help="JSON list of symmetric matrices (catalog)")
    return p


def _validate(args):
    for name in ("sing_tol", "class_tol", "tol", "eps", "radius"):
        val = getattr(args, name, None)
        if val is not None and not val > 0:
            raise SchemaError(f"--{name.replace('_', '-')} must be positive")
    if getattr(args, "resolution", 1) < 1:
        raise SchemaError("--resolution must be positive")


VECTOR_FLAGS = ("--dir", "--point", "--t")


def _attach_negative_values(argv):
    """``--dir -1,0`` -> ``--dir=-1,0`` so argparse does not take ``-1,0`` for an option."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in VECTOR_FLAGS and i + 1 < len(argv) and argv[i + 1][:2].lstrip("-")[:1] in "0123456789." and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(_attach_negative_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        if args.seed is None:
            args.seed = default_seed()
        _validate(args)
        result = args.func(args)
    except PSRError as exc:
        emit(exc.to_dict())
        return EXIT_ERROR
    except (ValueError, np.linalg.LinAlgError) as exc:
        emit({"error": type(exc).__name__, "message": str(exc)})
        return EXIT_ERROR
    if result is not None:
        if isinstance(result, int) and not args.json:
            _write(f"{result}\n", args.out)
        else:
            emit(result, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
