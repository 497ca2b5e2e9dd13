"""Command-line front end.

Subcommands: ``list`` (catalog), ``case`` (run worked examples), ``krylov-dist``
(ad-hoc distance sweep from a config), ``resolvent`` (chain-of-balls
continuation), ``projection`` (contour quadrature).  Every run writes a
canonical JSON report plus CSV tables and PNG figures into the output
directory; wall-clock timings go to a sidecar file so reports stay
byte-identical across reruns of the same config and seed.

Exit codes: 0 success, 1 assertion or numeric failure, 2 usage/config error.
``KBL_LOG`` selects the log level (DEBUG, INFO, ...).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import logging
import math
import os
import sys
import time

from . import cases as case_catalog
from . import config as cfgmod
from . import krylov, reporting, resolvent, spectral
from .errors import ConfigError, KblError
from .krylov import SweepThresholds

log = logging.getLogger("kbl")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _setup_logging():
    level_name = os.environ.get("KBL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _parse_sets(assignments: list[str]) -> dict:
    out = cfgmod.apply_overrides({}, assignments or [])
    return out


def _write_outputs(out_dir: str, stem: str, command: str, config_echo: dict,
                   body: dict, figures_on: bool, elapsed: float) -> str:
    os.makedirs(out_dir, exist_ok=True)
    tables = body.pop("tables", {})
    figure_specs = body.get("figures", [])
    report = {
        "schema": reporting.SCHEMA_VERSION,
        "command": command,
        "config_echo": config_echo,
        "results": {k: v for k, v in body.items() if k not in ("residuals", "figures")},
        "residuals": body.get("residuals", {}),
        "timings": f"{stem}_timings.json",
    }
    for name, table in tables.items():
        reporting.write_csv(
            os.path.join(out_dir, f"{stem}_{name}.csv"), table["header"], table["rows"]
        )
    if figures_on and figure_specs:
        from . import figures as figmod

        figmod.render_report_figures(stem, {**body, "tables": tables}, out_dir)
    path = os.path.join(out_dir, f"{stem}_report.json")
    reporting.write_json_report(path, report)
    reporting.write_text_atomic(
        os.path.join(out_dir, f"{stem}_timings.json"),
        reporting.canonical_json({"total_seconds": elapsed}),
    )
    return path


def cmd_list(_args) -> int:
    for cid in case_catalog.case_ids():
        case = case_catalog.CATALOG[cid]
        print(f"{cid:24s} {case.title}")
    return EXIT_OK


def _run_one_case(case_id: str, overrides: dict) -> dict:
    return case_catalog.run_case(case_id, overrides)


def cmd_case(args) -> int:
    overrides = _parse_sets(args.set)
    unknown = [cid for cid in args.ids if cid not in case_catalog.CATALOG]
    if unknown:
        raise ConfigError(f"unknown case id(s) {unknown}; known: {case_catalog.case_ids()}")
    started = time.perf_counter()
    reports: dict[str, dict] = {}
    if args.jobs > 1 and len(args.ids) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {
                cid: pool.submit(_run_one_case, cid, overrides) for cid in args.ids
            }
            for cid, fut in futures.items():
                reports[cid] = fut.result()
    else:
        for cid in args.ids:
            reports[cid] = _run_one_case(cid, overrides)
    all_passed = True
    for cid in args.ids:
        rep = reports[cid]
        elapsed = time.perf_counter() - started
        path = _write_outputs(
            args.out,
            f"case_{cid}",
            "case",
            {"case": cid, "overrides": overrides, "seed": args.seed},
            rep,
            not args.no_figures,
            elapsed,
        )
        status = "pass" if rep["passed"] else "FAIL"
        print(f"{status}: {cid} -> {path}")
        all_passed &= rep["passed"]
    return EXIT_OK if all_passed else EXIT_FAILURE


def _load_command_config(args) -> dict:
    cfg = cfgmod.load_config(args.config) if args.config else {}
    return cfgmod.apply_overrides(cfg, args.set or [])


def cmd_krylov_dist(args) -> int:
    cfg = _load_command_config(args)
    cfgmod.validate_keys(
        cfg, {"seed", "operator", "space", "vector", "m_max", "thresholds"}, "krylov-dist config"
    )
    for field in ("operator", "space", "vector"):
        if field not in cfg:
            raise ConfigError(f"krylov-dist config needs {field!r}")
    space = cfgmod.build_space(cfg["space"])
    A = cfgmod.build_operator(cfg["operator"])
    if A.dim != space.dim:
        raise ConfigError(f"operator dim {A.dim} != space dim {space.dim}")
    f = cfgmod.build_vector(cfg["vector"], space.dim)
    m_max = int(cfg.get("m_max", 16))
    th_spec = cfg.get("thresholds", {})
    cfgmod.validate_keys(
        th_spec, {"eps_solve_rel", "floor_frac", "stagnation_frac"}, "thresholds"
    )
    thresholds = SweepThresholds(**{k: float(v) for k, v in th_spec.items()})
    started = time.perf_counter()
    sweep = krylov.solvability_sweep(A, f, space, m_max, thresholds)
    label = "inf" if space.p == math.inf else str(int(space.p))
    body = {
        "verdict": sweep.verdict,
        "distances": list(sweep.distances),
        "rank": sweep.rank,
        "grade": sweep.grade,
        "residuals": {"candidate": sweep.residual},
        "tables": {
            "distances": {
                "header": ["m", "distance", "norm", "N"],
                "rows": [[m + 1, d, label, sweep.dim] for m, d in enumerate(sweep.distances)],
            }
        },
        "figures": [{"kind": "distances", "table": "distances"}],
        "title": "distance sweep",
    }
    path = _write_outputs(
        args.out, "krylov_dist", "krylov-dist", cfg, body, not args.no_figures,
        time.perf_counter() - started,
    )
    print(f"report: {path}")
    return EXIT_OK


def cmd_resolvent(args) -> int:
    cfg = _load_command_config(args)
    cfgmod.validate_keys(
        cfg,
        {"seed", "operator", "zeta0", "zeta1", "waypoints", "eps_total", "vector", "degree_cap"},
        "resolvent config",
    )
    for field in ("operator", "zeta0", "zeta1"):
        if field not in cfg:
            raise ConfigError(f"resolvent config needs {field!r}")
    A = cfgmod.build_operator(cfg["operator"])
    zeta0 = cfgmod.parse_complex(cfg["zeta0"], "zeta0")
    zeta1 = cfgmod.parse_complex(cfg["zeta1"], "zeta1")
    waypoints = [cfgmod.parse_complex(w, "waypoint") for w in cfg.get("waypoints", [])]
    eps_total = float(cfg.get("eps_total", 1e-8))
    started = time.perf_counter()
    plan = resolvent.plan_path(A, zeta0, zeta1, waypoints=waypoints, eps_total=eps_total)
    g = cfgmod.build_vector(cfg["vector"], A.dim) if "vector" in cfg else None
    outcome = resolvent.continue_resolvent(A, plan, g=g)
    spectrum = [[z.real, z.imag] for z in A.spectrum_oracle]
    body: dict = {
        "plan": plan.to_json(),
        "residuals": {},
        "figures": [{"kind": "path", "plan": plan.to_json(), "spectrum": spectrum}],
        "title": "resolvent continuation",
    }
    if g is None:
        body["approximant"] = outcome.to_json()
        body["residuals"]["certified_bound"] = outcome.error_bound
        cap = int(cfg.get("degree_cap", resolvent.DEGREE_CAP))
        if outcome.degree_bound is not None and outcome.degree_bound <= cap:
            coeffs = resolvent.extract_polynomial(outcome, cap)
            body["polynomial_coefficients"] = [[c.real, c.imag] for c in coeffs]
    else:
        body["vector_result"] = [[v.real, v.imag] for v in outcome.value]
        body["residuals"]["certified_bound"] = outcome.error_bound
        body["provenance"] = resolvent.provenance_to_json(outcome.provenance)
    path = _write_outputs(
        args.out, "resolvent", "resolvent", cfg, body, not args.no_figures,
        time.perf_counter() - started,
    )
    print(f"report: {path}")
    return EXIT_OK


def cmd_projection(args) -> int:
    cfg = _load_command_config(args)
    cfgmod.validate_keys(cfg, {"seed", "operator", "contour", "vector"}, "projection config")
    for field in ("operator", "contour"):
        if field not in cfg:
            raise ConfigError(f"projection config needs {field!r}")
    A = cfgmod.build_operator(cfg["operator"])
    contour = cfgmod.build_contour(cfg["contour"])
    started = time.perf_counter()
    pr = spectral.projection(A, contour)
    spectrum = (
        [[z.real, z.imag] for z in A.spectrum_oracle] if A.spectrum_oracle is not None else []
    )
    body: dict = {
        "projection": pr.to_json(),
        "residuals": {
            "idempotency": pr.idempotency_residual,
            "commutator": pr.commutator_residual,
        },
        "figures": [],
        "title": "spectral projection",
    }
    if contour.kind == "circle":
        body["figures"].append(
            {
                "kind": "contour",
                "center": contour.params["center"],
                "radius": contour.params["radius"],
                "nodes": contour.params["nodes"],
                "spectrum": spectrum,
            }
        )
    if "vector" in cfg:
        g = cfgmod.build_vector(cfg["vector"], A.dim)
        Pg = pr.P @ g
        body["projected_vector"] = [[v.real, v.imag] for v in Pg]
    path = _write_outputs(
        args.out, "projection", "projection", cfg, body, not args.no_figures,
        time.perf_counter() - started,
    )
    print(f"report: {path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbl",
        description="Krylov-solvability laboratory: cases, sweeps, continuations, projections.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list the case catalog")

    def add_common(p, with_config: bool):
        p.add_argument("--out", default="reports", help="output directory (default: reports)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config/parameter entry (repeatable)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
        p.add_argument("--seed", type=int, default=0, help="seed echoed into reports")
        if with_config:
            p.add_argument("--config", required=False, help="JSON config file")

    p_case = sub.add_parser("case", help="run catalog cases")
    p_case.add_argument("ids", nargs="+", help="case ids (see `kbl list`)")
    p_case.add_argument("--jobs", type=int, default=1, help="run cases concurrently")
    add_common(p_case, with_config=False)

    for name in ("krylov-dist", "resolvent", "projection"):
        p = sub.add_parser(name, help=f"run a {name} config")
        add_common(p, with_config=True)

    return parser


_DISPATCH = {
    "list": cmd_list,
    "case": cmd_case,
    "krylov-dist": cmd_krylov_dist,
    "resolvent": cmd_resolvent,
    "projection": cmd_projection,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KblError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
