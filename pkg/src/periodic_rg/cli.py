"""Command-line front end: ``periodic-rg {validate,compute-mas,simulate,tradeoff}``.

Exit codes: 0 ok, 2 validation or input error, 3 non-termination,
4 governor infeasibility.
"""

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import mas as mas_mod
from . import polytope as poly
from . import simulator, svgplot, tradeoff
from .errors import (InfeasibleGovernorState, NotFinitelyDetermined, PolytopeError,
                     SchemaError, ValidationError)
from .model import PlantWithInput, augment_fixed_input, augment_periodic_input, validate
from .sysfile import load_system

log = logging.getLogger("periodic_rg")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NONTERMINATION = 3
EXIT_INFEASIBLE = 4

CONFIG_SCHEMA = "scenario/1"
DEFAULT_SWEEPS = [
    {"formulation": "f1", "N": 3, "n": 1, "m_min": 1, "m_max": 58},
    {"formulation": "f1", "N": 3, "n": 4, "m_min": 4, "m_max": 28},
]


@dataclass
class ScenarioConfig:
    system: str
    epsilon: Optional[float] = None
    formulation: str = "f1"
    mode: str = "partial"
    reference: simulator.ReferenceSignal = field(default_factory=simulator.ReferenceSignal.pulse)
    horizon: int = simulator.DEFAULT_HORIZON
    x0: Optional[List[float]] = None
    v_init: float = 0.0
    out_dir: str = "out"
    seed: int = 0
    check_samples: int = 200
    max_steps: int = mas_mod.MAX_STEPS
    sweeps: list = field(default_factory=lambda: [dict(s) for s in DEFAULT_SWEEPS])


_CONFIG_KEYS = {"schema", "system", "epsilon", "formulation", "mode", "reference", "horizon",
                "x0", "v_init", "out_dir", "seed", "check_samples", "max_steps", "sweeps"}
_SWEEP_KEYS = {"formulation", "N", "n", "m_min", "m_max"}


def _want(cond, path, msg):
    if not cond:
        raise SchemaError(path, msg)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_config(doc, base_dir="."):
    _want(isinstance(doc, dict), "", "top level must be an object")
    unknown = sorted(set(doc) - _CONFIG_KEYS)
    _want(not unknown, unknown[0] if unknown else "", "unknown field")
    _want(doc.get("schema") == CONFIG_SCHEMA, "schema", f"expected {CONFIG_SCHEMA!r}")
    _want(isinstance(doc.get("system"), str), "system", "expected a path string")
    path = doc["system"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    _want(os.path.exists(path), "system", f"file not found: {path}")
    cfg = ScenarioConfig(system=path)
    if "epsilon" in doc:
        _want(_is_num(doc["epsilon"]) and 0 < doc["epsilon"] < 1, "epsilon", "must lie in (0, 1)")
        cfg.epsilon = float(doc["epsilon"])
    if "formulation" in doc:
        _want(doc["formulation"] in ("none", "f1", "f2"), "formulation", "expected none, f1 or f2")
        cfg.formulation = doc["formulation"]
    if "mode" in doc:
        _want(doc["mode"] in ("complete", "partial"), "mode", "expected complete or partial")
        cfg.mode = doc["mode"]
    if "reference" in doc:
        ref = doc["reference"]
        _want(isinstance(ref, dict), "reference", "expected an object")
        extra = sorted(set(ref) - {"kind", "levels", "switch_times"})
        _want(not extra, f"reference.{extra[0]}" if extra else "", "unknown field")
        levels = ref.get("levels")
        _want(isinstance(levels, list) and all(_is_num(v) for v in levels), "reference.levels", "expected a list of numbers")
        times = ref.get("switch_times", [])
        _want(isinstance(times, list) and all(_is_int(v) for v in times), "reference.switch_times", "expected a list of integers")
        try:
            cfg.reference = simulator.ReferenceSignal(ref.get("kind", "piecewise"), levels, times)
        except ValueError as exc:
            raise SchemaError("reference", str(exc)) from exc
    for key in ("horizon", "seed", "check_samples", "max_steps"):
        if key in doc:
            _want(_is_int(doc[key]) and doc[key] >= 0, key, "expected a non-negative integer")
            setattr(cfg, key, doc[key])
    if "x0" in doc:
        _want(isinstance(doc["x0"], list) and all(_is_num(v) for v in doc["x0"]), "x0", "expected a list of numbers")
        cfg.x0 = [float(v) for v in doc["x0"]]
    if "v_init" in doc:
        _want(_is_num(doc["v_init"]), "v_init", "expected a number")
        cfg.v_init = float(doc["v_init"])
    if "out_dir" in doc:
        _want(isinstance(doc["out_dir"], str), "out_dir", "expected a string")
        cfg.out_dir = doc["out_dir"]
    if "sweeps" in doc:
        _want(isinstance(doc["sweeps"], list), "sweeps", "expected a list")
        for i, sw in enumerate(doc["sweeps"]):
            _want(isinstance(sw, dict), f"sweeps[{i}]", "expected an object")
            extra = sorted(set(sw) - _SWEEP_KEYS)
            _want(not extra, f"sweeps[{i}].{extra[0]}" if extra else "", "unknown field")
            for key in ("N", "n", "m_min", "m_max"):
                _want(_is_int(sw.get(key)) and sw[key] >= 0, f"sweeps[{i}].{key}", "expected a non-negative integer")
            _want(sw.get("formulation", "f1") in ("f1", "f2"), f"sweeps[{i}].formulation", "expected f1 or f2")
            _want(sw["m_min"] <= sw["m_max"], f"sweeps[{i}].m_max", "must be >= m_min")
        cfg.sweeps = doc["sweeps"]
    return cfg


def load_config(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc}") from exc
    return parse_config(doc, os.path.dirname(os.path.abspath(path)))


def _resolve_epsilon(cfg):
    if cfg.epsilon is not None:
        return cfg.epsilon
    with open(cfg.system) as fh:
        eps = json.load(fh).get("epsilon")
    return mas_mod.DEFAULT_EPSILON if eps is None else eps


def governed_system(obj, formulation):
    """The autonomous system whose admissible sets the chosen governor needs."""
    if isinstance(obj, PlantWithInput):
        if formulation == "f1":
            return augment_fixed_input(obj)
        if formulation == "f2":
            return augment_periodic_input(obj)
        return obj.unforced()
    return obj


def _write(out_dir, name, text):
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _validated(obj, formulation):
    system = governed_system(obj, formulation)
    report = validate(system)
    if not report.ok:
        raise ValidationError(report)
    return system


def cmd_validate(cfg, args):
    obj = load_system(cfg.system)
    system = governed_system(obj, cfg.formulation)
    report = validate(system)
    print(f"period N={system.period}, n={system.n}, p={system.p}, d={system.d}, q={system.q}")
    print("characteristic multipliers: " + ", ".join(f"{z:.6g} (|.|={abs(z):.6g})" for z in report.multipliers))
    print(f"stable: {report.stable}; observable: {report.observable}")
    for aid, msg in report.assumption_failures:
        print(f"FAIL {aid}: {msg}")
    if not report.ok:
        raise ValidationError(report)
    print("A1-A4 satisfied")
    return EXIT_OK


def _clip_box(P, scale=3.0):
    lo, hi = poly.bounding_box(P)
    centre, half = (lo + hi) / 2, (hi - lo) / 2 * scale
    return poly.HPolytope.box(centre - half, centre + half)


def _slot_figure(mas, system, k, store):
    """Slot-k polygon; for k >= 1 overlay the mapped slot-0 set and the fresh half-spaces."""
    Pk = store.slot_polytope(k)
    layers = []
    if k >= 1:
        box = _clip_box(Pk)
        blocks, T = mas_mod.slot_blocks(system, k)
        mapped = poly.HPolytope(mas.h0 @ T, mas.rhs0).intersect(box)
        fresh_rows = np.vstack(blocks)
        fresh = poly.HPolytope(fresh_rows, np.ones(fresh_rows.shape[0])).intersect(box)
        layers.append((poly.vertices_2d(mapped), "red", "red", 0.25))
        layers.append((poly.vertices_2d(fresh), "green", "green", 0.2))
    verts = poly.vertices_2d(Pk)
    layers.append((verts, "black", "black", 0.35))
    return verts, svgplot.polygons(layers, title=f"slot {k}")


def _sampled_check(system, store, count, rng):
    """Sampled forward cyclic relation: x in slot k set => C_k x in Y_k and A_k x in slot k+1 set."""
    bad = 0
    N = system.period
    for k in range(N):
        pts = poly.sample(store.slot_polytope(k), count, rng)
        nxt = store.slot_polytope((k + 1) % N)
        for x in pts:
            y_ok = np.all(system.s_mats[k] @ system.c_mats[k] @ x <= 1 + 1e-9)
            if not (y_ok and poly.contains(nxt, system.a_mats[k] @ x, 1e-9)):
                bad += 1
    return bad


def cmd_compute_mas(cfg, args):
    obj = load_system(cfg.system)
    system = _validated(obj, cfg.formulation)
    eps = _resolve_epsilon(cfg)
    mas = mas_mod.compute_omega0(system, eps, max_steps=cfg.max_steps)
    stores = {mode: mas_mod.build_storage(mas, system, mode, parallel=args.parallel)
              for mode in (mas_mod.COMPLETE, mas_mod.PARTIAL)}
    store = stores[cfg.mode]
    os.makedirs(cfg.out_dir, exist_ok=True)
    for k in range(system.period):
        _write(cfg.out_dir, f"slot_{k}.csv", poly.to_csv(store.slot_polytope(k)))
    rng = np.random.default_rng(cfg.seed)
    bad = _sampled_check(system, store, cfg.check_samples, rng) if cfg.check_samples else 0
    lines = [f"m = {mas.m}", f"admissibility index j* = {mas.admissibility_index}",
             f"epsilon = {mas.epsilon:g}", f"steady-state rows = {mas.steady_rows}",
             f"storage mode = {cfg.mode}",
             f"bytes32 complete = {stores[mas_mod.COMPLETE].bytes32}",
             f"bytes32 partial = {stores[mas_mod.PARTIAL].bytes32}",
             f"sampled cyclic-relation failures = {bad} ({cfg.check_samples} points per slot, seed {cfg.seed})"]
    summary = "\n".join(lines) + "\n"
    _write(cfg.out_dir, "summary.txt", summary)
    if system.n == 2:
        for k in range(system.period):
            verts, svg = _slot_figure(mas, system, k, store)
            _write(cfg.out_dir, f"slot_{k}_vertices.csv", poly.vertices_csv(verts))
            _write(cfg.out_dir, f"slot_{k}.svg", svg)
    print(summary, end="")
    return EXIT_OK


def cmd_simulate(cfg, args):
    obj = load_system(cfg.system)
    if not isinstance(obj, PlantWithInput):
        raise SchemaError("system", "simulation needs a plant file (with field b)")
    plant_report = validate(obj.unforced())
    if not plant_report.ok:
        raise ValidationError(plant_report)
    x0 = np.zeros(obj.n) if cfg.x0 is None else np.array(cfg.x0)
    if x0.size != obj.n:
        raise SchemaError("x0", f"expected {obj.n} entries")
    os.makedirs(cfg.out_dir, exist_ok=True)

    storage = None
    if cfg.formulation != "none":
        system = _validated(obj, cfg.formulation)
        mas = mas_mod.compute_omega0(system, _resolve_epsilon(cfg), max_steps=cfg.max_steps)
        storage = mas_mod.build_storage(mas, system, cfg.mode, parallel=args.parallel)

    def run(kind):
        return simulator.simulate(obj, kind, storage, cfg.reference, cfg.horizon, x0, cfg.v_init)

    kinds = ["none"] if cfg.formulation == "none" else [cfg.formulation, "none"]
    try:
        if args.parallel and len(kinds) > 1:
            with ThreadPoolExecutor() as pool:
                traces = dict(zip(kinds, pool.map(run, kinds)))
        else:
            traces = {k: run(k) for k in kinds}
    except simulator.SimulationAborted as exc:
        _write(cfg.out_dir, "trace_partial.csv", simulator.trace_csv(exc.trace))
        raise

    primary = traces[kinds[0]]
    _write(cfg.out_dir, "trace.csv", simulator.trace_csv(primary))
    report = simulator.audit(primary)
    text = f"formulation: {cfg.formulation}\n" + report.text()
    if cfg.formulation != "none":
        _write(cfg.out_dir, "trace_ungoverned.csv", simulator.trace_csv(traces["none"]))
        text += "\nungoverned baseline:\n" + simulator.audit(traces["none"]).text()
    _write(cfg.out_dir, "audit.txt", text)
    _write(cfg.out_dir, "trace.svg", simulator.trace_svg(
        primary, traces.get("none") if cfg.formulation != "none" else None,
        title=f"reference governor: {cfg.formulation}"))
    print(text, end="")
    return EXIT_OK


def cmd_tradeoff(cfg, args):
    os.makedirs(cfg.out_dir, exist_ok=True)
    tables = []
    for sw in cfg.sweeps:
        f = sw.get("formulation", "f1")
        rows = tradeoff.sweep(sw["N"], sw["n"], range(sw["m_min"], sw["m_max"] + 1), f)
        tables.append(((f, sw["N"], sw["n"]), rows))
    _write(cfg.out_dir, "sweep.csv", tradeoff.sweep_csv(tables))
    lines = []
    for (f, N, n), rows in tables:
        if len(rows) >= 2:
            slope, _, resid = tradeoff.affine_fit(rows)
            lines.append(f"sweep {f} N={N} n={n}: {slope:.6g} bytes saved per extra op (affine residual {resid:.3g})")
    obj = load_system(cfg.system)
    if isinstance(obj, PlantWithInput) and cfg.formulation in ("f1", "f2"):
        system = _validated(obj, cfg.formulation)
        mas = mas_mod.compute_omega0(system, _resolve_epsilon(cfg), max_steps=cfg.max_steps)
        comp = mas_mod.build_storage(mas, system, mas_mod.COMPLETE, parallel=args.parallel)
        part = mas_mod.build_storage(mas, system, mas_mod.PARTIAL)
        lines.append("")
        lines.append(tradeoff.measure(comp, part, cfg.formulation).text().rstrip())
    text = "\n".join(lines) + "\n"
    _write(cfg.out_dir, "report.txt", text)
    print(text, end="")
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "compute-mas": cmd_compute_mas,
            "simulate": cmd_simulate, "tradeoff": cmd_tradeoff}


def build_parser():
    parser = argparse.ArgumentParser(prog="periodic-rg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="scenario JSON file")
        src.add_argument("--system", help="system JSON file (defaults for everything else)")
        p.add_argument("--out", help="output directory (overrides config out_dir)")
        p.add_argument("--mode", choices=["complete", "partial"])
        p.add_argument("--formulation", choices=["none", "f1", "f2"])
        p.add_argument("--epsilon", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--parallel", action="store_true", help="expand slots / run scenarios concurrently")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            cfg = load_config(args.config)
        else:
            if not os.path.exists(args.system):
                raise SchemaError("--system", f"file not found: {args.system}")
            cfg = ScenarioConfig(system=args.system)
        for key in ("mode", "formulation", "seed", "epsilon"):
            if getattr(args, key) is not None:
                setattr(cfg, key, getattr(args, key))
        if args.out:
            cfg.out_dir = args.out
        return COMMANDS[args.command](cfg, args)
    except (SchemaError, ValidationError, PolytopeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NotFinitelyDetermined as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONTERMINATION
    except InfeasibleGovernorState as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
