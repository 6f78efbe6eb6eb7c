"""Command-line interface.

Subcommands: ``check`` (contact certification of a profile curve),
``rationalize`` (piecewise-linear approximation with certificate),
``plug`` (build the mapping-torus plug and verify its contract),
``certify`` (exact insertion ledger), ``insert`` (ledger plus demo-scale
geometry), and ``prove`` (the end-to-end certified bound).

Reports are canonical JSON: running a command twice with the same inputs
produces byte-identical report files.  Wall-clock timings go to a separate
``*.timings.json`` sidecar so they never perturb the report bytes.
Exit codes: 0 pass, 1 contract or certification failure, 2 malformed input.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import figures as figs
from . import jsonio as jio
from .curves import (
    ProfileCurve,
    brute_force_min_period,
    check_contact,
    volume_exact,
)
from .errors import LutzError, SchemaError
from .insertion import certify_insertion, insert_plug
from .plug import PlugSpec, build_plug, verify_plug_contract
from .rationalize import rationalize

BUILTIN_CURVES = ("tight-torus",)


def _builtin_curve(name: str) -> ProfileCurve:
    if name == "tight-torus":
        return ProfileCurve.from_functions(
            math.cos,
            lambda r: -math.sin(r),
            domain=(-1.0, 1.0),
            segments=64,
            df1=lambda r: -math.sin(r),
            df2=lambda r: -math.cos(r),
        )
    raise SchemaError(
        f"unknown builtin curve {name!r}; available: {', '.join(BUILTIN_CURVES)}"
    )


def _load_curve(args) -> ProfileCurve:
    if getattr(args, "builtin", None):
        return _builtin_curve(args.builtin)
    if not args.curve:
        raise SchemaError("pass --curve FILE or --builtin NAME")
    return jio.curve_from_json(jio.read_json(args.curve))


def _load_plug_spec(args) -> PlugSpec:
    if args.plug_spec:
        return jio.plug_spec_from_json(jio.read_json(args.plug_spec))
    if args.n is None:
        raise SchemaError("pass --plug-spec FILE or --n SECTORS")
    return PlugSpec(n=args.n)


def _fraction_arg(text: str, flag: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{flag}: not a rational: {text!r}") from exc


class _Timings:
    def __init__(self):
        self.stages: list[dict] = []
        self._t0 = time.perf_counter()

    def mark(self, name: str) -> None:
        now = time.perf_counter()
        self.stages.append({"name": name, "seconds": now - self._t0})
        self._t0 = now


# ---------------------------------------------------------------------------
# subcommand implementations: each returns (report dict, passed, figure writer)
# ---------------------------------------------------------------------------


def _cmd_check(args, timings):
    curve = _load_curve(args)
    timings.mark("load")
    cert = check_contact(curve)
    timings.mark("contact")
    report = {
        "kind": "contact_report",
        "contact": cert.passed,
        "wronskian_max": float(cert.max_wronskian),
        "wronskian_witness": None if cert.witness is None else float(cert.witness),
        "domain": [str(curve.domain[0]), str(curve.domain[1])],
        "num_segments": curve.num_segments,
        "is_c1": curve.is_c1,
    }
    if cert.passed:
        vol = volume_exact(curve)
        report["volume"] = float(vol)
        report["volume_exact"] = str(vol)
        brute = brute_force_min_period(curve, args.brute_q, grid=args.brute_grid)
        report["min_period"] = {
            "value": brute.period,
            "slope": str(brute.slope),
            "radius": brute.radius,
            "max_denominator": args.brute_q,
            "candidates_checked": brute.candidates_checked,
        }
        timings.mark("periods")

    def figures(stem: Path):
        figs.curve_overlay_figure(curve, None, stem.with_name(stem.name + "_curve.svg"))

    return report, cert.passed, figures


def _cmd_rationalize(args, timings):
    curve = _load_curve(args)
    timings.mark("load")
    epsilon = _fraction_arg(args.epsilon, "--epsilon")
    result = rationalize(curve, epsilon, max_vertices=args.max_vertices)
    timings.mark("rationalize")
    rep = result.report
    report = {
        "kind": "rationalization_report",
        "passed": rep.passed,
        "epsilon": rep.epsilon,
        "iterations": result.iterations,
        "vertices": [str(v) for v in result.vertices],
        "slopes": [str(s) for s in result.slopes],
        "certificate": {
            "contact_original": rep.contact_original,
            "contact_rationalized": rep.contact_rationalized,
            "volume_original": rep.volume_original,
            "volume_rationalized": rep.volume_rationalized,
            "volume_difference": rep.volume_difference,
            "min_period_factor": rep.min_period_factor,
            "max_period_factor": rep.max_period_factor,
            "anchor_misses": rep.anchor_misses,
        },
        "curve": jio.curve_to_json(result.curve),
        "pl_curve": jio.curve_to_json(result.pl_curve),
    }

    def figures(stem: Path):
        figs.curve_overlay_figure(
            curve,
            result.curve,
            stem.with_name(stem.name + "_curve.svg"),
            vertices=result.vertices,
        )

    return report, rep.passed, figures


def _orbit_summary(orbit_report) -> dict:
    histogram: dict[str, int] = {}
    for orbit in orbit_report.orbits:
        key = str(orbit.period)
        histogram[key] = histogram.get(key, 0) + 1
    return {
        "count": len(orbit_report.orbits),
        "histogram": dict(sorted(histogram.items(), key=lambda kv: int(kv[0]))),
        "k_max": orbit_report.k_max,
        "has_identity_annulus": orbit_report.has_identity_annulus,
        "identity_action": orbit_report.identity_action,
    }


def _plug_report_json(spec: PlugSpec, contract) -> dict:
    return {
        "kind": "plug_report",
        "spec": jio.plug_spec_to_json(spec),
        "passed": contract.passed,
        "failures": list(contract.failures),
        "boundary_error": contract.boundary_error,
        "max_det_error": contract.max_det_error,
        "min_tau": contract.min_tau,
        "dtau_residual": contract.dtau_residual,
        "invariance_error": contract.invariance_error,
        "min_action": contract.min_action,
        "identity_action": contract.identity_action,
        "volume": contract.volume,
        "census": list(contract.census_counts),
        "expected_census": list(contract.expected_census),
        "orbits": _orbit_summary(contract.orbit_report),
    }


def _cmd_plug(args, timings):
    spec = _load_plug_spec(args)
    timings.mark("load")
    plug = build_plug(spec)
    timings.mark("build")
    contract = verify_plug_contract(
        plug, orbit_seed=args.seed, strict=args.strict_plug
    )
    timings.mark("contract")
    report = _plug_report_json(spec, contract)

    def figures(stem: Path):
        figs.necklace_figure(
            plug.necklace, stem.with_name(stem.name + "_necklace.svg")
        )

    return report, contract.passed, figures


def _certificate_json(atlas, bound) -> dict:
    return {
        "kind": "insertion_certificate",
        "atlas": jio.atlas_to_json(atlas),
        "target": None if bound.target is None else str(bound.target),
        "epsilon": str(bound.epsilon),
        "delta": str(bound.delta),
        "tmin_bound": str(bound.tmin_bound),
        "volume_bound": str(bound.volume_bound),
        "ratio": str(bound.ratio),
        "ratio_float": float(bound.ratio),
        "meets_target": bound.meets_target,
        "volume_bound_below_2eps": bound.volume_bound < 2 * bound.epsilon,
    }


def _allowances(args) -> tuple:
    target = None if args.target_c is None else _fraction_arg(args.target_c, "--target-c")
    epsilon = None if args.epsilon is None else _fraction_arg(args.epsilon, "--epsilon")
    delta = None if args.delta is None else _fraction_arg(args.delta, "--delta")
    if target is None and (epsilon is None or delta is None):
        raise SchemaError("pass --target-c C, or both --epsilon and --delta")
    return target, epsilon, delta


def _cmd_certify(args, timings):
    atlas = jio.atlas_from_json(jio.read_json(args.atlas))
    timings.mark("load")
    target, epsilon, delta = _allowances(args)
    bound = certify_insertion(atlas, target, epsilon, delta)
    timings.mark("ledger")
    report = _certificate_json(atlas, bound)
    passed = bound.meets_target if bound.target is not None else True
    return report, passed, None


def _insertion_json(demo) -> dict:
    report = {
        "kind": "insertion_report",
        "certificate": _certificate_json(demo.atlas, demo.bound),
        "demo_delta": demo.demo_delta,
        "embedding": {
            "kind": demo.embedding.kind,
            "disc_radius": demo.embedding.disc_radius,
            "area_error": demo.embedding_report.area_error,
            "max_density_error": demo.embedding_report.max_density_error,
            "max_density_error_fd": demo.embedding_report.max_density_error_fd,
            "boundary_margin": demo.embedding_report.boundary_margin,
            "passed": demo.embedding_report.passed,
        },
        "annulus": {
            "census": list(demo.annulus_census.counts),
            "expected_census": list(demo.annulus.expected_census()),
            "euler_characteristic": demo.annulus_census.euler_characteristic,
            "census_ok": demo.annulus_census_ok,
            "outward_min_slope": demo.outward_min_slope,
        },
        "budget": {
            "piece_index": demo.budget.piece_index,
            "budget": demo.budget.budget,
            "demo_volume": demo.budget.demo_volume,
            "satisfied": demo.budget.satisfied,
        },
        "plug_contract": None,
    }
    if demo.contract is not None:
        report["plug_contract"] = _plug_report_json(demo.plug.spec, demo.contract)
    return report


def _insertion_passed(demo) -> bool:
    return (
        demo.embedding_report.passed
        and demo.annulus_census_ok
        and demo.outward_min_slope > 0
        and demo.budget.satisfied
        and (demo.contract is None or demo.contract.passed)
        and (demo.bound.target is None or demo.bound.meets_target)
    )


def _run_insert(args, timings, run_contract: bool):
    atlas = jio.atlas_from_json(jio.read_json(args.atlas))
    timings.mark("load")
    target, epsilon, delta = _allowances(args)
    spec = None
    if args.plug_spec:
        spec = jio.plug_spec_from_json(jio.read_json(args.plug_spec))
    demo = insert_plug(
        atlas,
        target_ratio=target,
        epsilon=epsilon,
        delta=delta,
        demo_delta=args.demo_delta,
        plug_spec=spec,
        run_contract=run_contract,
        strict_plug=args.strict_plug,
    )
    timings.mark("insert")
    return demo


def _insert_figures(demo):
    def figures(stem: Path):
        figs.necklace_figure(
            demo.plug.necklace, stem.with_name(stem.name + "_necklace.svg")
        )
        figs.annulus_figure(
            demo.annulus, stem.with_name(stem.name + "_annulus.svg")
        )
        figs.embedding_figure(
            demo.embedding, stem.with_name(stem.name + "_embedding.svg")
        )

    return figures


def _cmd_insert(args, timings):
    demo = _run_insert(args, timings, run_contract=not args.skip_contract)
    return _insertion_json(demo), _insertion_passed(demo), _insert_figures(demo)


def _cmd_prove(args, timings):
    atlas = jio.atlas_from_json(jio.read_json(args.atlas))
    timings.mark("load")
    if args.target_c is None:
        raise SchemaError("prove requires --target-c")
    target = _fraction_arg(args.target_c, "--target-c")
    bound = certify_insertion(atlas, target)
    timings.mark("ledger")
    report = {
        "kind": "systolic_proof",
        "certificate": _certificate_json(atlas, bound),
        "demo": None,
    }
    passed = bound.meets_target
    figures = None
    if not args.ledger_only:
        demo = insert_plug(
            atlas,
            target_ratio=target,
            demo_delta=args.demo_delta,
            run_contract=True,
            strict_plug=args.strict_plug,
        )
        timings.mark("demo")
        report["demo"] = _insertion_json(demo)
        passed = passed and _insertion_passed(demo)
        figures = _insert_figures(demo)
    report["passed"] = passed
    return report, passed, figures


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------


def _add_out_flags(sub):
    sub.add_argument("--out", help="write the JSON report here (default: stdout)")
    sub.add_argument(
        "--figures",
        action="store_true",
        help="also write SVG figures next to --out",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lutzplug",
        description="contact-form analysis, plug construction, and certified "
        "systolic-ratio bounds",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("check", help="certify a profile curve as contact")
    p.add_argument("--curve", help="profile-curve JSON file")
    p.add_argument("--builtin", help=f"named curve ({', '.join(BUILTIN_CURVES)})")
    p.add_argument("--brute-q", type=int, default=60,
                   help="denominator cap for the minimal-period search")
    p.add_argument("--brute-grid", type=int, default=512)
    _add_out_flags(p)
    p.set_defaults(func=_cmd_check)

    p = subs.add_parser("rationalize", help="certified piecewise-linear curve")
    p.add_argument("--curve", help="profile-curve JSON file")
    p.add_argument("--builtin", help=f"named curve ({', '.join(BUILTIN_CURVES)})")
    p.add_argument("--epsilon", required=True, help="total error budget")
    p.add_argument("--max-vertices", type=int, default=512)
    _add_out_flags(p)
    p.set_defaults(func=_cmd_rationalize)

    p = subs.add_parser("plug", help="build a plug and verify its contract")
    p.add_argument("--plug-spec", help="plug-spec JSON file")
    p.add_argument("--n", type=int, help="sector count (defaults otherwise)")
    p.add_argument("--seed", type=int, default=0, help="orbit-search seed")
    p.add_argument("--strict-plug", action="store_true",
                   help="raise on the first violated contract item")
    _add_out_flags(p)
    p.set_defaults(func=_cmd_plug)

    for name, helptext in (
        ("certify", "exact insertion ledger"),
        ("insert", "ledger plus demo-scale insertion geometry"),
    ):
        p = subs.add_parser(name, help=helptext)
        p.add_argument("--atlas", required=True, help="tube-atlas JSON file")
        p.add_argument("--target-c", help="target certified ratio")
        p.add_argument("--epsilon", help="explicit period allowance")
        p.add_argument("--delta", help="explicit per-piece thickness")
        if name == "insert":
            p.add_argument("--demo-delta", type=float, default=0.5)
            p.add_argument("--plug-spec", help="plug-spec JSON for the demo")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--strict-plug", action="store_true")
            p.add_argument("--skip-contract", action="store_true",
                           help="skip the expensive plug contract verification")
        _add_out_flags(p)
        p.set_defaults(func=_cmd_certify if name == "certify" else _cmd_insert)

    p = subs.add_parser("prove", help="end-to-end certified bound")
    p.add_argument("--atlas", required=True)
    p.add_argument("--target-c", required=True)
    p.add_argument("--demo-delta", type=float, default=0.5)
    p.add_argument("--ledger-only", action="store_true",
                   help="skip the demo build; exact arithmetic only")
    p.add_argument("--strict-plug", action="store_true")
    _add_out_flags(p)
    p.set_defaults(func=_cmd_prove)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.figures and not args.out:
        print("error: --figures requires --out", file=sys.stderr)
        return 2
    timings = _Timings()
    try:
        report, passed, figure_writer = args.func(args, timings)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LutzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = jio.canonical_dumps(report)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        if figure_writer is not None and args.figures:
            figure_writer(out.with_suffix(""))
        timings.mark("write")
        sidecar = out.with_name(out.stem + ".timings.json")
        sidecar.write_text(
            jio.canonical_dumps({"kind": "timings", "stages": timings.stages}),
            encoding="utf-8",
        )
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
