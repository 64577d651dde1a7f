"""Command-line entry point.

Every subcommand reads a JSON config, runs its checks, and emits a
canonical JSON report.  Exit codes: 0 when every check passed (purely
informational commands always pass), 1 when a check failed or errored,
2 for unusable configs or bad invocations.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config as config_mod, foliation, fock, maps, torus as torus_mod
from .errors import ConfigError
from .geometry import (
    AlmostComplexStructure,
    Chart,
    GridSpec,
    check_acs,
    check_compatibility,
    nijenhuis,
)
from .report import build_report, canonical_dumps
from .config import parse_complex

__all__ = ["main"]


def _record(name, status, headline, **details):
    return {"name": name, "status": status, "headline": headline, "details": details}


def _run_steps(steps):
    """Run (name, fn) pairs; an exception becomes a failed 'error' record."""
    records = []
    for name, fn in steps:
        try:
            records.append(fn(name))
        except Exception as exc:
            records.append({
                "name": name,
                "status": "error",
                "headline": f"error: {exc}",
                "details": {"message": str(exc)},
            })
    return records


# ---------------------------------------------------------------------------
# check-integrability


def _chart_from_grid(modes: int, grid: dict) -> Chart:
    return Chart(modes, GridSpec(grid["low"], grid["high"], grid["count"]))


def _build_chart(cfg) -> Chart:
    return _chart_from_grid(cfg["modes"], cfg["grid"])


def _structure_from_fragment(spec: dict, modes: int, chart: Chart) -> AlmostComplexStructure:
    kind = spec["kind"]
    if kind == "standard":
        return AlmostComplexStructure.standard(modes)
    if kind == "constant":
        return AlmostComplexStructure.constant(np.array(spec["matrix"], dtype=float))
    if kind == "rotated":
        axis = spec["axis"]
        if isinstance(axis, list):
            axis = tuple(axis)
        return AlmostComplexStructure.rotated(chart, spec["angle"], axis)
    return AlmostComplexStructure.explicit(chart, spec["entries"])


def _build_structure(cfg, chart: Chart) -> AlmostComplexStructure:
    return _structure_from_fragment(cfg["structure"], cfg["modes"], chart)


def _exec_check_integrability(cfg):
    chart = _build_chart(cfg)
    structure = _build_structure(cfg, chart)
    tols = cfg["tolerances"]

    def square(name):
        res = check_acs(structure, chart, tol=tols["structure"])
        status = "pass" if res.passed else "fail"
        return _record(
            name, status,
            f"max |J^2 + 1| = {res.max_deviation:.3e} (tol {res.tolerance:.1e})",
            **{"max_deviation": res.max_deviation, "tolerance": res.tolerance,
               "worst_point": list(res.worst_point)},
        )

    def compatibility(name):
        res = check_compatibility(structure, chart, tol=tols["compatibility"])
        status = "pass" if res.passed else "fail"
        return _record(
            name, status,
            f"symplectic residual {res.symplectic_residual:.3e}, "
            f"min metric eigenvalue {res.min_metric_eigenvalue:.3e}",
            symplectic_residual=res.symplectic_residual,
            metric_asymmetry=res.metric_asymmetry,
            min_metric_eigenvalue=res.min_metric_eigenvalue,
            tolerance=res.tolerance,
        )

    def integrability(name):
        res = nijenhuis(structure, chart, tol=tols["integrability"])
        verdict = "integrable" if res.integrable else "not integrable"
        return _record(
            name, "info",
            f"max torsion norm {res.max_norm:.3e}: {verdict}",
            max_norm=res.max_norm, tolerance=res.tolerance,
            integrable=res.integrable, worst_point=list(res.worst_point),
            worst_pair=list(res.worst_pair),
        )

    return _run_steps([
        ("structure_square", square),
        ("compatibility", compatibility),
        ("integrability", integrability),
    ])


# ---------------------------------------------------------------------------
# coherent-report


def _exec_coherent_report(cfg):
    space = fock.FockSpace(cfg["dim"])
    states = [parse_complex(z) for z in cfg["states"]]

    def commutator(name):
        ops = fock.build_operators(space)[0]
        comm = ops.q @ ops.p - ops.p @ ops.q
        block = slice(0, space.dim - 2)
        resid = float(np.abs(comm[block, block] - 1j * np.eye(space.dim)[block, block]).max())
        status = "pass" if resid < 1e-12 else "fail"
        return _record(
            name, status,
            f"|[Q,P] - i| = {resid:.3e} below the truncation edge",
            residual=resid, tolerance=1e-12, dim=space.dim,
        )

    def eigenstates(name):
        ops = fock.build_operators(space)[0]
        worst = 0.0
        residuals = []
        for z in states:
            vec = fock.coherent(space, z)
            resid = float(np.linalg.norm(ops.annihilator @ vec - z * vec))
            residuals.append({"state": z, "residual": resid})
            worst = max(worst, resid)
        status = "pass" if worst < 1e-8 else "fail"
        return _record(
            name, status,
            f"worst eigen-relation residual {worst:.3e} over {len(states)} states",
            residuals=residuals, tolerance=1e-8,
        )

    def overlap_law(name):
        worst = 0.0
        for za in states:
            for zb in states:
                got = abs(fock.overlap(fock.coherent(space, za), fock.coherent(space, zb))) ** 2
                want = float(np.exp(-abs(za - zb) ** 2 / 2))
                worst = max(worst, abs(got - want))
        status = "pass" if worst < 1e-10 else "fail"
        return _record(
            name, status,
            f"worst |overlap^2 - gaussian law| = {worst:.3e}",
            worst=worst, tolerance=1e-10, n_states=len(states),
        )

    def resolution(name):
        res = fock.resolution_of_unity(
            space, cfg["radius"], n_radial=cfg["n_radial"],
            n_angular=cfg["n_angular"], levels=cfg["levels"],
            threshold=cfg["threshold"],
        )
        status = "pass" if res.passed else "fail"
        return _record(
            name, status,
            f"resolution deviation {res.deviation:.3e} on levels 0..{res.levels} "
            f"(threshold {res.threshold:.1e})",
            deviation=res.deviation, threshold=res.threshold,
            levels=res.levels, radius=res.radius,
            diagonal_deficit=[float(1 - d) for d in res.diagonal[: res.levels + 1]],
        )

    steps = [("canonical_commutator", commutator)]
    if states:
        steps += [("eigen_relation", eigenstates), ("overlap_law", overlap_law)]
    steps.append(("resolution_of_unity", resolution))
    return _run_steps(steps)


# ---------------------------------------------------------------------------
# classify-map


def _exec_classify_map(cfg):
    steps = []
    if "matrix" in cfg:
        def linear(name):
            res = maps.classify_linear(
                np.array(cfg["matrix"], dtype=float), tol=cfg["linear_tolerance"]
            )
            return _record(
                name, "info",
                f"{res.quadrant} (symplectic residual {res.symplectic_residual:.3e}, "
                f"commutant residual {res.commutant_residual:.3e})",
                quadrant=res.quadrant,
                symplectic_residual=res.symplectic_residual,
                commutant_residual=res.commutant_residual,
                tolerance=res.tolerance,
            )
        steps.append(("linear_classification", linear))
    if "map" in cfg:
        def cr(name):
            sub = cfg["map"]
            grid = config_mod._merge(config_mod._GRID_DEFAULTS, sub.get("grid", {}))
            chart = Chart(sub["modes"], GridSpec(grid["low"], grid["high"], grid["count"]))
            tmap = maps.TransitionMap.from_sources(chart, sub["components"])
            res = maps.cr_residual(tmap, chart, tol=cfg["cr_tolerance"])
            verdict = "holomorphic" if res.holomorphic else "not holomorphic"
            return _record(
                name, "info",
                f"max antiholomorphic derivative {res.max_residual:.3e}: {verdict}",
                max_residual=res.max_residual, tolerance=res.tolerance,
                holomorphic=res.holomorphic,
                worst_component=res.worst_component, worst_mode=res.worst_mode,
            )
        steps.append(("cr_residual", cr))
    return _run_steps(steps)


# ---------------------------------------------------------------------------
# transform-vacuum


def _exec_transform_vacuum(cfg):
    space = fock.FockSpace(cfg["dim"])
    lift = maps.PolynomialLift.from_terms({
        (t["w_power"], t["wbar_power"]): parse_complex(t["coefficient"])
        for t in cfg["terms"]
    })
    states = [parse_complex(z) for z in cfg["states"]]

    def transport(name):
        resid = maps.vacuum_transport_residual(lift, space)
        return _record(
            name, "info",
            f"|lift vacuum| = {resid:.6e} "
            f"(antiholomorphic weight {lift.antiholomorphic_weight:.3g})",
            residual=resid,
            antiholomorphic_weight=lift.antiholomorphic_weight,
            annihilates_vacuum=resid < 1e-10,
        )

    steps = [("vacuum_transport", transport)]

    if states:
        def coherence(name):
            operator = maps.lift_normal_ordered(lift, space)
            rows = []
            for z in states:
                resid = maps.coherence_residual(fock.coherent(space, z), operator)
                rows.append({"state": z, "residual": resid})
            return _record(
                name, "info",
                f"coherence residuals for {len(states)} coherent states",
                residuals=rows,
            )
        steps.append(("coherence", coherence))

    if lift.antiholomorphic_weight == 0 and lift.degree >= 1:
        def root_state(name):
            state, root = maps.holomorphic_vacuum_state(lift, space)
            operator = maps.lift_normal_ordered(lift, space)
            resid = float(np.linalg.norm(operator @ state))
            return _record(
                name, "info",
                f"coherent state at root {root:.6g} is annihilated "
                f"(residual {resid:.3e})",
                root=root, residual=resid,
            )
        steps.append(("holomorphic_root_state", root_state))

    return _run_steps(steps)


# ---------------------------------------------------------------------------
# torus


def _exec_torus(cfg):
    steps = []
    for idx, point in enumerate(cfg.get("theta_points", [])):
        def theta_step(name, point=point):
            z = parse_complex(point["z"])
            tau = parse_complex(point["tau"])
            res = torus_mod.theta(z, tau, n_terms=cfg["n_terms"], accuracy=cfg.get("accuracy"))
            return _record(
                name, "info",
                f"theta = {res.value:.12g} (tail bound {res.tail_bound:.1e}), "
                f"kahler coefficient {torus_mod.kahler_coefficient(tau):.6g}",
                z=z, tau=tau, value=res.value, tail_bound=res.tail_bound,
                n_terms=res.n_terms,
                kahler_coefficient=torus_mod.kahler_coefficient(tau),
            )
        steps.append((f"theta_{idx}", theta_step))

    if "pair" in cfg:
        def moduli(name):
            pair = cfg["pair"]
            first = parse_complex(pair["first"])
            second = parse_complex(pair["second"])
            res = torus_mod.classify_moduli_pair(
                first, second, tol=pair.get("tolerance", 1e-9)
            )
            verdict = "equivalent" if res.equivalent else "distinct"
            details = {
                "equivalent": res.equivalent,
                "distance": res.distance,
                "tolerance": res.tolerance,
                "reduced_first": res.reduced_first,
                "reduced_second": res.reduced_second,
            }
            if res.witness is not None:
                details["witness"] = res.witness
            return _record(
                name, "info",
                f"moduli {verdict} (reduced distance {res.distance:.3e})",
                **details,
            )
        steps.append(("moduli_classification", moduli))
    return _run_steps(steps)


# ---------------------------------------------------------------------------
# foliate


def _exec_foliate(cfg):
    if "complement_structure" in cfg:
        frag = config_mod._merge(
            {"grid": dict(config_mod._GRID_DEFAULTS)}, cfg["complement_structure"]
        )
        chart = _chart_from_grid(frag["modes"], frag["grid"])
        structure = _structure_from_fragment(frag, frag["modes"], chart)
    else:
        chart = None
        structure = None
    space = foliation.build_foliated(
        cfg["leaf_modes"], cfg["ambient_modes"], cfg["leaf_dim"],
        cfg["complement_dim"], complement_structure=structure,
        structure_chart=chart,
    )
    leaf_value = parse_complex(cfg["leaf_value"])
    comp_value = parse_complex(cfg["complement_value"])

    def cross(name):
        value = foliation.omega_cross_block(cfg["ambient_modes"], cfg["leaf_modes"])
        status = "pass" if value == 0.0 else "fail"
        return _record(
            name, status,
            f"symplectic leaf/complement cross block = {value:.1e}",
            max_cross_entry=value,
        )

    def complement_flags(name):
        verdict = (
            "complement coherent states are global"
            if space.complement_globally_coherent
            else "complement coherent states are chart-local only"
        )
        return _record(
            name, "info",
            f"complement torsion {space.complement_torsion:.3e}: {verdict}",
            complement_torsion=space.complement_torsion,
            complement_globally_coherent=space.complement_globally_coherent,
            leaf_globally_coherent=space.leaf_globally_coherent,
        )

    def factorization(name):
        resid = foliation.overlap_factorization_residual(
            space, leaf_value, comp_value, leaf_value * 0.5 + 0.25, comp_value * 0.5,
        )
        status = "pass" if resid < 1e-12 else "fail"
        return _record(
            name, status,
            f"overlap factorization residual {resid:.3e}",
            residual=resid, tolerance=1e-12,
        )

    def leaf_res(name):
        res = foliation.leaf_resolution(
            space, cfg["radius"], n_radial=cfg["n_radial"],
            n_angular=cfg["n_angular"], levels=cfg["levels"],
            threshold=cfg["threshold"],
        )
        status = "pass" if res.passed else "fail"
        return _record(
            name, status,
            f"leaf resolution deviation {res.deviation:.3e} "
            f"(threshold {cfg['threshold']:.1e})",
            deviation=res.deviation, threshold=cfg["threshold"],
            levels=cfg["levels"], radius=cfg["radius"],
        )

    def scan(name):
        res = foliation.complement_scan_deviation(
            space, leaf_value, cfg["radius"], n_radial=cfg["n_radial"],
            n_angular=cfg["n_angular"], levels=cfg["levels"],
            threshold=cfg["scan_threshold"],
        )
        status = "pass" if res.exceeded else "fail"
        return _record(
            name, status,
            f"complement scan deviation {res.deviation:.3e} stays above "
            f"{res.threshold:.2g}: quantization is leafwise only",
            deviation=res.deviation, threshold=res.threshold,
            levels=res.levels, radius=res.radius, leaf_value=res.leaf_value,
        )

    return _run_steps([
        ("symplectic_cross_block", cross),
        ("complement_integrability", complement_flags),
        ("overlap_factorization", factorization),
        ("leaf_resolution", leaf_res),
        ("complement_scan", scan),
    ])


_EXECUTORS = {
    "check-integrability": _exec_check_integrability,
    "coherent-report": _exec_coherent_report,
    "classify-map": _exec_classify_map,
    "transform-vacuum": _exec_transform_vacuum,
    "torus": _exec_torus,
    "foliate": _exec_foliate,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phaseq",
        description="verification checks for coherent-state quantization on phase space",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    descriptions = {
        "run": "run whatever command the config names",
        "validate": "check a config and list its problems",
        "check-integrability": "almost-complex-structure, compatibility and torsion checks",
        "coherent-report": "canonical commutator, overlap law and resolution of unity",
        "classify-map": "canonical/holomorphic classification of a transition map",
        "transform-vacuum": "vacuum transport under a normal-ordered polynomial lift",
        "torus": "theta sums and modular-parameter classification",
        "foliate": "leafwise quantization checks on a split phase space",
    }
    for name in ("run", "validate", *config_mod.COMMANDS):
        p = sub.add_parser(name, help=descriptions[name])
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--quiet", action="store_true", help="suppress the summary lines")
    return parser


def _emit(args, report: dict, human_lines: list[str]) -> None:
    text = canonical_dumps(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if not args.quiet:
            for line in human_lines:
                print(line)
    else:
        if not args.quiet:
            for line in human_lines:
                print(line, file=sys.stderr)
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    try:
        config = config_mod.load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    diagnostics = config_mod.validate(config)

    if args.subcommand == "validate":
        for diag in diagnostics:
            print(f"{diag['path']}: {diag['message']}")
        if not diagnostics and not args.quiet:
            print("config ok")
        return 2 if diagnostics else 0

    if diagnostics:
        for diag in diagnostics:
            print(f"error: {diag['path']}: {diag['message']}", file=sys.stderr)
        return 2

    command = config["command"]
    if args.subcommand != "run" and args.subcommand != command:
        print(
            f"error: config names command '{command}' but was invoked as "
            f"'{args.subcommand}'",
            file=sys.stderr,
        )
        return 2

    full = config_mod.apply_defaults(config)
    started = time.perf_counter()
    records = _EXECUTORS[command](full)
    report = build_report(command, config, records)
    report["wall_clock_s"] = round(time.perf_counter() - started, 6)

    lines = [f"{r['status']:>5}  {r['name']}: {r['headline']}" for r in records]
    lines.append(
        f"{command}: {'all checks passed' if report['passed'] else 'CHECKS FAILED'}"
    )
    _emit(args, report, lines)
    return 0 if report["passed"] else 1
