"""Command-line interface.

Subcommands:

* ``run CONFIG`` — ground-state optimization from a YAML file, emitting
  one JSON event line per half sweep and a final result line.
* ``verify-oracle CONFIG`` — exact ground energy of the same model from
  the reference diagonalizer.
* ``cost-model`` — the analytic per-sweep cost table for the three
  contraction backends, as CSV or JSON lines.
* ``bench CONFIG`` — time one effective-Hamiltonian application per
  backend on the configured model.

Exit codes: 0 success, 2 bad configuration or usage, 3 verification
mismatch.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import yaml

from .btensor import kernel_backend, set_num_threads
from .dmrg import BACKENDS, SweepSchedule, SweepStage, random_mps, run_dmrg
from .errors import BlockStructureError, ResourceLimitError
from .models import (build_heisenberg, build_hubbard, half_filling_charge,
                     make_lattice, site_basis, terms_to_mpo)
from .perf import BlockModel, cost_table

_MODEL_KINDS = ("heisenberg", "hubbard")


def _emit(obj, extra_fh=None):
    line = json.dumps(obj, sort_keys=True)
    print(line)
    if extra_fh is not None:
        extra_fh.write(line + "\n")
        extra_fh.flush()


def load_config(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError("config must be a YAML mapping")
    return effective_config(raw)


def effective_config(raw: dict) -> dict:
    """Fill defaults and normalize types (YAML leaves '1e-9' as a string)."""
    model = dict(raw.get("model") or {})
    kind = model.get("kind")
    if kind not in _MODEL_KINDS:
        raise ValueError(f"model.kind must be one of {_MODEL_KINDS}, got {kind!r}")
    lat = dict(model.get("lattice") or {})
    lat.setdefault("kind", "square")
    lat["width"] = int(lat.get("width", 1))
    lat["length"] = int(lat.get("length", 2))
    model["lattice"] = lat
    if kind == "heisenberg":
        model["j1"] = float(model.get("j1", 1.0))
        model["j2"] = float(model.get("j2", 0.0))
    else:
        model["t"] = float(model.get("t", 1.0))
        model["u"] = float(model.get("u", 0.0))
    n_sites = lat["width"] * lat["length"]
    if "total_charge" in model and model["total_charge"] is not None:
        model["total_charge"] = [int(c) for c in model["total_charge"]]
    else:
        if kind == "heisenberg":
            model["total_charge"] = [n_sites % 2]
        else:
            model["total_charge"] = list(half_filling_charge(n_sites))
    model["mpo_cutoff"] = float(model.get("mpo_cutoff", 1e-13))
    model["kind"] = kind

    stages = raw.get("schedule") or []
    if not stages:
        raise ValueError("schedule must list at least one stage")
    schedule = []
    for st in stages:
        st = dict(st)
        schedule.append({
            "max_bond": int(st["max_bond"]),
            "sweeps": int(st.get("sweeps", 1)),
            "svd_cutoff": float(st.get("svd_cutoff", 0.0)),
            "davidson_tol": float(st.get("davidson_tol", 1e-9)),
            "davidson_max_iter": int(st.get("davidson_max_iter", 25)),
        })

    init = dict(raw.get("init") or {})
    init = {"max_bond": int(init.get("max_bond", schedule[0]["max_bond"])),
            "seed": int(init.get("seed", 0))}

    backend = raw.get("backend", "list")
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    return {"model": model, "schedule": schedule, "init": init,
            "backend": backend}


def build_model(model_cfg: dict):
    """(site kind, terms, mpo, physical index, total charge) for a config."""
    lat = make_lattice(model_cfg["lattice"]["kind"],
                       model_cfg["lattice"]["width"],
                       model_cfg["lattice"]["length"])
    if model_cfg["kind"] == "heisenberg":
        kind = "spin"
        terms = build_heisenberg(lat, j1=model_cfg["j1"], j2=model_cfg["j2"])
    else:
        kind = "electron"
        terms = build_hubbard(lat, t=model_cfg["t"], u=model_cfg["u"])
    phys, _ = site_basis(kind)
    total = tuple(model_cfg["total_charge"])
    h = terms_to_mpo(terms, kind, lat.n_sites,
                     compress_cutoff=model_cfg["mpo_cutoff"])
    return kind, terms, h, phys, total


def _schedule_from_config(cfg) -> SweepSchedule:
    return SweepSchedule(tuple(
        SweepStage(max_bond=st["max_bond"], num_sweeps=st["sweeps"],
                   svd_cutoff=st["svd_cutoff"],
                   davidson_tol=st["davidson_tol"],
                   davidson_max_iter=st["davidson_max_iter"])
        for st in cfg["schedule"]))


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.backend:
        cfg["backend"] = args.backend
    if args.threads:
        set_num_threads(args.threads)
    report_fh = open(args.report, "w") if args.report else None
    try:
        _emit({"event": "config", "config": cfg,
               "kernel": kernel_backend()}, report_fh)
        kind, terms, h, phys, total = build_model(cfg["model"])
        n = h.n
        psi = random_mps(phys, n, total, cfg["init"]["max_bond"],
                         seed=cfg["init"]["seed"])

        def on_report(rep):
            event = {"event": "half_sweep", **rep.as_dict()}
            if not args.timings:
                del event["seconds"]
            _emit(event, report_fh)

        result = run_dmrg(psi, h, _schedule_from_config(cfg),
                          backend=cfg["backend"], callback=on_report,
                          checkpoint_path=args.checkpoint)
        final = {"event": "result", "energy": result.energy,
                 "max_bond_dim": max(result.psi.bond_dims()),
                 "total_flops": result.total_flops}
        if args.verify:
            from .oracle import ground_state_energy
            exact = ground_state_energy(kind, terms, n, sector=total)
            final["exact_energy"] = exact
            final["abs_error"] = abs(result.energy - exact)
            _emit(final, report_fh)
            if final["abs_error"] > args.verify_tol * max(1.0, abs(exact)):
                print(f"verification failed: |E - E_exact| = "
                      f"{final['abs_error']:.3e}", file=sys.stderr)
                return 3
        else:
            _emit(final, report_fh)
        return 0
    finally:
        if report_fh is not None:
            report_fh.close()


def cmd_verify_oracle(args) -> int:
    cfg = load_config(args.config)
    kind, terms, h, phys, total = build_model(cfg["model"])
    from .oracle import ground_state_energy, sector_basis
    dim = sector_basis(kind, h.n, total).size
    energy = ground_state_energy(kind, terms, h.n, sector=total)
    _emit({"event": "oracle", "energy": energy, "sector_dim": int(dim),
           "total_charge": list(total), "n_sites": h.n})
    return 0


def cmd_cost_model(args) -> int:
    reports = cost_table(ms=args.m, q=args.q, r=args.r, k=args.k, d=args.d,
                         n_sites=args.n_sites, procs_list=args.procs)
    if args.csv:
        print(reports[0].CSV_HEADER)
        for rep in reports:
            print(rep.csv_row())
    else:
        for rep in reports:
            _emit({"event": "cost", **dataclasses.asdict(rep)})
    return 0


def cmd_bench(args) -> int:
    from .netops import (apply_effective_h, build_left_env, build_right_env,
                         left_edge, right_edge, two_site_tensor)
    cfg = load_config(args.config)
    if args.threads:
        set_num_threads(args.threads)
    kind, terms, h, phys, total = build_model(cfg["model"])
    n = h.n
    j = (n - 1) // 2
    for backend in (args.backend,) if args.backend else BACKENDS:
        psi = random_mps(phys, n, total, cfg["init"]["max_bond"],
                         seed=cfg["init"]["seed"])
        from .dmrg import _BACKEND_FORMAT, _convert_sites
        fmt = _BACKEND_FORMAT[backend]
        _convert_sites(psi, fmt)
        hsites = [w.convert(fmt) for w in h.sites]
        left = left_edge(psi, h, fmt=fmt)
        for i in range(j):
            left = build_left_env(left, psi.sites[i], hsites[i])
        right = right_edge(psi, h, fmt=fmt)
        for i in range(n - 1, j + 1, -1):
            right = build_right_env(right, psi.sites[i], hsites[i])
        theta = two_site_tensor(psi, j)
        apply_effective_h(left, right, hsites[j], hsites[j + 1], theta)  # warm-up
        t0 = time.perf_counter()
        for _ in range(args.reps):
            apply_effective_h(left, right, hsites[j], hsites[j + 1], theta)
        dt = (time.perf_counter() - t0) / args.reps
        _emit({"event": "bench", "backend": backend, "kernel": kernel_backend(),
               "bond": int(max(psi.bond_dims())), "seconds_per_apply": dt})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blockdmrg",
                                description="blocked two-site DMRG")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="ground-state optimization from a YAML config")
    run.add_argument("config")
    run.add_argument("--backend", choices=BACKENDS, default=None,
                     help="override the config's contraction backend")
    run.add_argument("--threads", type=int, default=0)
    run.add_argument("--report", default=None, help="also write events to this file")
    run.add_argument("--checkpoint", default=None)
    run.add_argument("--timings", action="store_true",
                     help="include wall-clock seconds in events")
    run.add_argument("--verify", action="store_true",
                     help="compare against exact diagonalization")
    run.add_argument("--verify-tol", type=float, default=1e-6)
    run.set_defaults(func=cmd_run)

    vo = sub.add_parser("verify-oracle", help="exact energy for a config's model")
    vo.add_argument("config")
    vo.set_defaults(func=cmd_verify_oracle)

    cm = sub.add_parser("cost-model", help="analytic backend cost table")
    cm.add_argument("--m", type=int, nargs="+", required=True)
    cm.add_argument("--q", type=int, default=4)
    cm.add_argument("--r", type=float, default=0.6)
    cm.add_argument("--k", type=int, default=5)
    cm.add_argument("--d", type=int, default=2)
    cm.add_argument("--n-sites", type=int, default=32)
    cm.add_argument("--procs", type=int, nargs="+", default=[1])
    cm.add_argument("--csv", action="store_true")
    cm.set_defaults(func=cmd_cost_model)

    be = sub.add_parser("bench", help="time effective-H application per backend")
    be.add_argument("config")
    be.add_argument("--backend", choices=BACKENDS, default=None)
    be.add_argument("--threads", type=int, default=0)
    be.add_argument("--reps", type=int, default=3)
    be.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BlockStructureError, ResourceLimitError, ValueError, KeyError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
