"""Command-line front end.

Commands: decompose, kahler-check, metric-curvature, frame-search,
theorem {self-dual | ricci-flat | unitary-product}.

Exit codes: 0 all checks passed, 1 a mathematical check failed
(violation or inconclusive; details in the report), 2 input or parse
error.  Reports go to standard output as stable "key: value" text or as
a single JSON document with sorted keys; floats use the shortest
round-trip representation, so output is byte-identical for identical
inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .bivectors import FrameRotation
from .kahler import (
    build_const_hol_sec,
    build_surface_product,
    from_unitary_frame,
    kaehler_residuals,
    structure_from_dict,
)
from .metrics import (
    MetricDomainError,
    ParseError,
    christoffel_oracle,
    curvature_at,
    metric_from_dict,
    nabla_J_residuals,
    unitary_product_check,
)
from .obstructions import (
    VERDICT_CONFORMALLY_FLAT,
    VERDICT_FLAT,
    VERDICT_SPECIAL_FRAME,
    frame_search,
    ricciflat_nullspace,
    run_obstruction_suite,
)
from .operators import bianchi_defect, decompose, operator_from_dict

PASSING_VERDICTS = (VERDICT_FLAT, VERDICT_CONFORMALLY_FLAT, VERDICT_SPECIAL_FRAME)


class InputError(Exception):
    """Malformed file, unreadable path, or out-of-contract flag value."""


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="curv4",
        description="curvature-operator laboratory for 4-dimensional metrics",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=False):
        p.add_argument("--tolerance", type=float, default=1e-9)
        p.add_argument("--format", choices=("text", "json"), default="text")
        if seeded:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--restarts", type=int, default=32)

    p = sub.add_parser("decompose", help="split an operator into its five invariant parts")
    p.add_argument("--input", required=True)
    common(p)

    p = sub.add_parser("kahler-check", help="evaluate the twelve Kaehler conditions")
    p.add_argument("--input", required=True)
    p.add_argument("--frame", default=None, help="optional frame file {'Q': 4x4}")
    common(p)

    p = sub.add_parser("metric-curvature", help="curvature of a diagonal metric at a point")
    p.add_argument("--input", required=True)
    p.add_argument("--point", default="0,0,0,0")
    common(p)

    p = sub.add_parser("frame-search", help="search SO(4) for a distinct-index-free frame")
    p.add_argument("--input", required=True)
    common(p, seeded=True)

    p = sub.add_parser("theorem", help="run one of the obstruction checks")
    p.add_argument("which", choices=("self-dual", "ricci-flat", "unitary-product"))
    p.add_argument("--input", default=None)
    p.add_argument("--coeffs", default=None, help="comma-separated unit triple")
    p.add_argument("--point", default="0,0,0,0")
    common(p, seeded=True)

    return parser


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as err:
        raise InputError(f"{path}: {err.strerror or err}") from err
    except json.JSONDecodeError as err:
        raise InputError(
            f"{path}: line {err.lineno} column {err.colno}: {err.msg}"
        ) from err


# The canonical Kaehler builders are addressable by name in operator files:
# {"builder": "const-hol-sec", "params": [c]} or
# {"builder": "surface-product", "params": [k1, k2]}.
_BUILDERS = {
    "const-hol-sec": (build_const_hol_sec, 1),
    "surface-product": (lambda k1, k2: build_surface_product(k1, k2)[0], 2),
}


def _operator_from_doc(doc):
    if isinstance(doc, dict) and "builder" in doc:
        name = doc["builder"]
        if name not in _BUILDERS:
            raise ValueError(
                f"unknown builder {name!r}; available: {sorted(_BUILDERS)}"
            )
        build, arity = _BUILDERS[name]
        params = doc.get("params", [])
        if len(params) != arity:
            raise ValueError(f"builder {name!r} takes {arity} parameter(s)")
        return build(*(float(p) for p in params))
    return operator_from_dict(doc)


def _load_operator(path):
    doc = _load_json(path)
    try:
        op = _operator_from_doc(doc)
        structure = structure_from_dict(doc) if "J" in doc else None
        if structure is None and isinstance(doc, dict) and "builder" in doc:
            structure = from_unitary_frame()
        frame = FrameRotation(np.array(doc["frame"], dtype=float)) if "frame" in doc else None
    except ValueError as err:
        raise InputError(f"{path}: {err}") from err
    return op, structure, frame


def _load_metric(path):
    doc = _load_json(path)
    try:
        return metric_from_dict(doc)
    except (ParseError, ValueError) as err:
        raise InputError(f"{path}: {err}") from err


def _load_frame(path):
    doc = _load_json(path)
    if not isinstance(doc, dict) or "Q" not in doc:
        raise InputError(f"{path}: frame document needs a 'Q' key")
    try:
        return FrameRotation(np.array(doc["Q"], dtype=float))
    except ValueError as err:
        raise InputError(f"{path}: {err}") from err


def _parse_point(text):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as err:
        raise InputError(f"--point: {err}") from err
    if len(values) != 4:
        raise InputError("--point needs four comma-separated coordinates")
    return values


def _parse_coeffs(text):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as err:
        raise InputError(f"--coeffs: {err}") from err
    if len(values) != 3:
        raise InputError("--coeffs needs three comma-separated numbers")
    if abs(sum(v * v for v in values) - 1.0) > 1e-9:
        raise InputError("--coeffs must be a unit triple")
    return values


def _base_payload(args):
    return {"version": __version__, "command": args.command, "tolerance": args.tolerance}


def _cmd_decompose(args):
    op, _, _ = _load_operator(args.input)
    dec = decompose(op)
    scale = max(1.0, op.norm())
    payload = _base_payload(args)
    payload.update(
        {
            "r": dec.r,
            "bianchi_defect": bianchi_defect(op),
            "norms": {
                "scalar": dec.scalar_part.norm(),
                "traceless_ricci": dec.traceless_ricci_part.norm(),
                "weyl_plus": dec.weyl_plus.norm(),
                "weyl_minus": dec.weyl_minus.norm(),
                "bianchi": dec.bianchi_part.norm(),
            },
            "weyl_minus_within_tolerance": bool(
                dec.weyl_minus.norm() <= args.tolerance * scale
            ),
        }
    )
    return payload, False


def _cmd_kahler_check(args):
    op, structure, frame = _load_operator(args.input)
    structure = structure if structure is not None else from_unitary_frame()
    if args.frame is not None:
        frame = _load_frame(args.frame)
    frame = frame if frame is not None else FrameRotation.identity()
    lines = kaehler_residuals(op, structure, frame)
    worst = float(np.max(np.abs(lines)))
    passed = worst <= args.tolerance * max(1.0, op.norm())
    payload = _base_payload(args)
    payload.update(
        {
            "residuals": {f"line_{k + 1:02d}": float(v) for k, v in enumerate(lines)},
            "max_residual": worst,
            "passed": bool(passed),
        }
    )
    return payload, not passed


def _cmd_metric_curvature(args):
    metric, j_field = _load_metric(args.input)
    point = _parse_point(args.point)
    try:
        primary = curvature_at(metric, point)
        oracle = christoffel_oracle(metric, point)
    except MetricDomainError as err:
        raise InputError(str(err)) from err
    scale = max(1.0, float(np.max(np.abs(primary.matrix))))
    agreement = float(np.max(np.abs(primary.matrix - oracle.matrix)))
    distinct = max(
        abs(primary.component(1, 2, 3, 4)),
        abs(primary.component(1, 3, 2, 4)),
        abs(primary.component(1, 4, 2, 3)),
        abs(oracle.component(1, 2, 3, 4)),
        abs(oracle.component(1, 3, 2, 4)),
        abs(oracle.component(1, 4, 2, 3)),
    )
    defect = abs(bianchi_defect(primary))
    checks = {
        "oracle_agreement": agreement <= 1e-8 * scale,
        "distinct_index": distinct <= args.tolerance * scale,
        "bianchi": defect <= args.tolerance * scale,
    }
    payload = _base_payload(args)
    payload.update(
        {
            "point": list(point),
            "matrix": [[float(v) for v in row] for row in primary.matrix],
            "oracle_agreement": agreement,
            "distinct_index_max": float(distinct),
            "bianchi_defect": float(defect),
            "checks": {k: bool(v) for k, v in checks.items()},
        }
    )
    if j_field is not None:
        try:
            residuals = nabla_J_residuals(metric, j_field, point)
        except ValueError as err:
            raise InputError(str(err)) from err
        worst = float(np.max(np.abs(residuals)))
        payload["nabla_J_max_residual"] = worst
        checks["nabla_J"] = worst <= args.tolerance
        payload["checks"]["nabla_J"] = bool(checks["nabla_J"])
    return payload, not all(checks.values())


def _cmd_frame_search(args):
    op, _, _ = _load_operator(args.input)
    result = frame_search(op, restarts=args.restarts, seed=args.seed, tol=args.tolerance)
    payload = _base_payload(args)
    payload.update(
        {
            "seed": args.seed,
            "restarts": args.restarts,
            "residual": result.residual,
            "restart_index": result.restart_index,
            "conclusive": bool(result.conclusive),
            "frame": [[float(v) for v in row] for row in result.frame.matrix],
        }
    )
    return payload, not result.conclusive


def _cmd_theorem(args):
    payload = _base_payload(args)
    payload["theorem"] = args.which
    if args.which == "self-dual":
        if args.input is None:
            raise InputError("theorem self-dual needs --input")
        op, structure, _ = _load_operator(args.input)
        report = run_obstruction_suite(
            op,
            structure,
            tolerance=args.tolerance,
            restarts=args.restarts,
            seed=args.seed,
        )
        payload.update(report.to_dict())
        return payload, report.verdict not in PASSING_VERDICTS
    if args.which == "ricci-flat":
        if args.coeffs is None:
            raise InputError("theorem ricci-flat needs --coeffs")
        coeffs = _parse_coeffs(args.coeffs)
        cert = ricciflat_nullspace(coeffs)
        control = ricciflat_nullspace(coeffs, include_distinct_index=False)
        payload.update(
            {
                "coefficients": list(coeffs),
                "nullspace_dimension": cert.dimension,
                "control_dimension_without_distinct_index": control.dimension,
                "constraints": cert.constraint_count,
                "smallest_singular_values": [float(v) for v in cert.singular_values[-3:]],
            }
        )
        return payload, cert.dimension != 0
    # unitary-product
    if args.input is None:
        raise InputError("theorem unitary-product needs --input")
    metric, _ = _load_metric(args.input)
    point = _parse_point(args.point)
    try:
        report = unitary_product_check(metric, point, tol=args.tolerance)
    except MetricDomainError as err:
        raise InputError(str(err)) from err
    payload.update(
        {
            "point": list(point),
            "residuals": report.residuals,
            "is_product": bool(report.is_product),
            "failed": list(report.failed),
        }
    )
    return payload, not report.is_product


_DISPATCH = {
    "decompose": _cmd_decompose,
    "kahler-check": _cmd_kahler_check,
    "metric-curvature": _cmd_metric_curvature,
    "frame-search": _cmd_frame_search,
    "theorem": _cmd_theorem,
}


def _json_default(obj):
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"unserializable object {obj!r}")


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key in sorted(obj):
            yield from _flatten(obj[key], f"{prefix}{key}.")
    else:
        name = prefix[:-1]
        if isinstance(obj, str):
            yield name, obj
        else:
            yield name, json.dumps(obj, default=_json_default)


def emit_report(payload, fmt):
    """Render a report dict as deterministic text or JSON."""
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2, default=_json_default)
    return "\n".join(f"{key}: {value}" for key, value in _flatten(payload))


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.tolerance <= 0.0:
            raise InputError("--tolerance must be positive")
        if getattr(args, "restarts", 1) < 1:
            raise InputError("--restarts must be at least 1")
        payload, failed = _DISPATCH[args.command](args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(emit_report(payload, args.format))
    return 1 if failed else 0


def run():
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    run()
