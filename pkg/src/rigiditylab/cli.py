"""
Command-line front end.

    rigiditylab run scenario.json
    rigiditylab cohomology scenario.json --rank-tol 1e-8
    rigiditylab gap sweep --max-spin 20 --csv gaps.csv
    rigiditylab torus scenario.json --weight-bound 1000 --alpha 1

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
import warnings

import numpy as np
from numpy.linalg import LinAlgError

from . import __version__
from .cochain import (
    DEFAULT_RANK_TOL,
    CochainComplex,
    build_d0,
    build_splitting,
    cohomology_dims,
    matrix_to_json,
    sigma_min_nonzero,
)
from .fpgroup import free_group
from .gaps import (
    FIXED_TOL,
    averaging_lower_bound,
    averaging_trials,
    angle_of,
    dolgopyat_sweep,
    torus_gap_scan,
)
from .nets import DEFAULT_PROBES, net_growth_experiment, rotation_generators
from .rigidity import (
    LOG_CUTOFF,
    ActionTuple,
    NumericalFailure,
    commutant_basis,
    deformation_family,
    integer_homomorphism,
    perturb_action,
    weil_newton,
)
from .scenario import (
    DEFAULT_ROTATIONS,
    Scenario,
    ScenarioError,
    _list,
    read_complex,
    read_matrix,
    read_module,
    read_number,
    read_int,
    read_presentation,
    read_rep,
    read_rotations,
    read_word,
    scenario_from_dict,
)
from .tame import block_operator, fit_log_envelope, fit_tame_constants, multiplier_operator, tame_degree_probe
from .unirep import check_rep, op_norm

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

CSV_HEADERS = {
    "gap-sweep": ("j", "lambda", "delta_lo", "delta_hi"),
    "net": ("n", "ball", "eps"),
    "tame-fit": ("lambda", "sigma"),
}


class Result:
    """Task output: JSON payload, optional table rows, warnings."""

    def __init__(self, payload: dict, rows=None, warnings_=None):
        self.payload = payload
        self.rows = rows
        self.warnings = list(warnings_ or [])


def _pres_rep(sc: Scenario):
    pres = read_presentation(sc.data.get("presentation"), "$.presentation")
    rep = read_rep(sc.data.get("representation"), "$.representation", pres.k)
    return pres, rep


def _rank_tol(sc):
    return read_number(sc.params, "rank_tol", "$.params", DEFAULT_RANK_TOL)


def task_check(sc: Scenario, threads: int) -> Result:
    pres, rep = _pres_rep(sc)
    tol = read_number(sc.params, "tol", "$.params", 1e-10)
    chk = check_rep(pres, rep, tol)
    return Result({"check": chk.to_json(), "dim": rep.dim, "tolerances": {"tol": tol}})


def task_cohomology(sc: Scenario, threads: int) -> Result:
    pres, rep = _pres_rep(sc)
    rt = _rank_tol(sc)
    cx = CochainComplex.build(pres, rep)
    rep_ = cohomology_dims(cx, rt)
    return Result(
        {"cohomology": rep_.to_json(), "complex_defect": cx.complex_defect(), "tolerances": {"rank_tol": rt, "rep_check": 1e-8}},
        warnings_=rep_.warnings,
    )


def task_split(sc: Scenario, threads: int) -> Result:
    pres, rep = _pres_rep(sc)
    rt = _rank_tol(sc)
    cx = CochainComplex.build(pres, rep)
    dims = cohomology_dims(cx, rt)
    split = build_splitting(cx, rt)
    emit = bool(sc.param("emit_matrices", False))
    out = split.to_json(include_matrices=emit)
    out["h1"] = dims.h1
    out["harmonic_norm"] = op_norm(split.harmonic)
    if emit:
        out["d0"] = matrix_to_json(cx.d0)
        out["d1"] = matrix_to_json(cx.d1)
    return Result({"split": out, "tolerances": {"rank_tol": rt}}, warnings_=dims.warnings)


def _module_sigmas(module, rank_tol):
    """(lambda, sigma_min of d0, trivial) per component; d0 needs no relators."""
    pts = []
    for comp in module:
        d0 = build_d0(free_group(comp.rep.k), comp.rep)
        pts.append((comp.eigenvalue, sigma_min_nonzero(d0, rank_tol), comp.trivial))
    return pts


def task_tame_fit(sc: Scenario, threads: int) -> Result:
    rt = _rank_tol(sc)
    if "points" in sc.params:
        pts = []
        for i, p in enumerate(_list(sc.params["points"], "$.params.points")):
            p = _list(p, f"$.params.points[{i}]")
            if len(p) != 2:
                raise ScenarioError(f"$.params.points[{i}]", "points are [lambda, sigma] pairs")
            pts.append((read_complex(p[0], f"$.params.points[{i}][0]").real, read_complex(p[1], f"$.params.points[{i}][1]").real))
        source = "points"
    else:
        module = read_module(sc.data.get("module"), "$.module")
        pts = _module_sigmas(module, rt)
        source = "module"
    fit = fit_tame_constants(pts)
    out = {"source": source, "fit": fit.to_json(), "holds": fit.holds(), "tolerances": {"rank_tol": rt}}
    try:
        out["log_envelope"] = fit_log_envelope(pts)
    except ValueError:
        out["log_envelope"] = None
    rows = [(p[0], p[1]) for p in pts if not (len(p) > 2 and p[2])]
    return Result(out, rows=rows)


def task_tame_probe(sc: Scenario, threads: int) -> Result:
    module = read_module(sc.data.get("module"), "$.module")
    name = sc.params.get("operator", "identity")
    if name == "identity":
        op, ib, ob = (lambda v: v), 1, 1
    elif name == "laplacian":
        op, ib, ob = multiplier_operator(module, lambda l: 1.0 + l), 1, 1
    elif name == "d0":
        blocks = [build_d0(free_group(c.rep.k), c.rep) for c in module]
        op, ib, ob = block_operator(blocks), 1, module.components[0].rep.k
    else:
        raise ScenarioError("$.params.operator", f"unknown operator {name!r}; expected identity, laplacian or d0")
    samples = read_int(sc.params, "samples", "$.params", 4, lo=1)
    r_max = read_int(sc.params, "r_max", "$.params", 8, lo=0)
    ks = [read_int({"k": k}, "k", f"$.params.k_range[{i}]", lo=0) for i, k in enumerate(_list(sc.params.get("k_range", [0, 1, 2, 3]), "$.params.k_range"))]
    if not ks:
        raise ScenarioError("$.params.k_range", "need at least one k")
    probe = tame_degree_probe(op, module, samples=samples, k_range=ks, r_max=r_max, seed=sc.seed, in_block=ib, out_block=ob)
    msgs = [] if probe.tame else [f"not tame in window 0..{r_max}"]
    return Result({"operator": name, "probe": probe.to_json(), "tolerances": {"slope_tol": 0.25}}, warnings_=msgs)


def task_gap_sweep(sc: Scenario, threads: int) -> Result:
    rots = read_rotations(sc.params.get("rotations", DEFAULT_ROTATIONS), "$.params.rotations")
    max_spin = read_number(sc.params, "max_spin", "$.params", 20)
    if max_spin < 0.5:
        raise ScenarioError("$.params.max_spin", "must be at least 1/2")
    gap_tol = read_number(sc.params, "tol", "$.params", 1e-12)
    if len(rots) < 2:
        raise ScenarioError("$.params.rotations", "need at least two rotations")
    sweep = dolgopyat_sweep(rots, max_spin, gap_tol=gap_tol, threads=threads)
    msgs = [f"no gap at spin {j}" for j in sweep.failures]
    out = sweep.to_json()
    out["tolerances"] = {"fixed_tol": FIXED_TOL, "gap_tol": gap_tol}
    return Result(out, rows=[(str(j), l, lo, hi) for j, l, lo, hi in sweep.rows()], warnings_=msgs)


def task_net(sc: Scenario, threads: int) -> Result:
    rots = read_rotations(sc.params.get("rotations", DEFAULT_ROTATIONS), "$.params.rotations")
    radius = read_int(sc.params, "radius", "$.params", 8, lo=0)
    probes = read_int(sc.params, "probe_size", "$.params", DEFAULT_PROBES, lo=1)
    growth = net_growth_experiment(rotation_generators(rots), radius, probe_size=probes, seed=sc.seed)
    out = growth.to_json()
    out["tolerances"] = {"probe_bias": growth.probe_mesh, "dedup_tol": 1e-9}
    rows = [(r.radius, r.ball_size, r.epsilon) for r in growth.reports]
    return Result(out, rows=rows)


def task_averaging(sc: Scenario, threads: int) -> Result:
    tol = {"fixed_tol": FIXED_TOL, "rank_tol": 1e-10, "slack": 1e-8}
    if "instances" in sc.params:
        n = read_int(sc.params, "instances", "$.params", lo=1)
        max_dim = read_int(sc.params, "max_dim", "$.params", 6, lo=1)
        max_words = read_int(sc.params, "max_words", "$.params", 4, lo=1)
        trials = averaging_trials(n, sc.seed, max_dim, max_words)
        bad = [t for t in trials if not t.certificate.passed]
        out = {
            "instances": n,
            "failures": len(bad),
            "counterexamples": [
                {"index": t.index, "representation": {"kind": "matrices", "matrices": [matrix_to_json(m) for m in t.rep.generator_matrices]}, **t.certificate.to_json()}
                for t in bad
            ],
            "tolerances": tol,
        }
        msgs = [f"{len(bad)} of {n} instances violate sigma_min >= eta"] if bad else []
        return Result(out, warnings_=msgs)
    rep = read_rep(sc.data.get("representation"), "$.representation")
    words = [read_word(w, f"$.params.words[{i}]", rep.k) for i, w in enumerate(_list(sc.params.get("words"), "$.params.words"))]
    if not words:
        raise ScenarioError("$.params.words", "need at least one word")
    cert = averaging_lower_bound(rep, words)
    msgs = [] if cert.passed else ["sigma_min below the pairwise-gap bound"]
    return Result({"certificate": cert.to_json(), "tolerances": tol}, warnings_=msgs)


def task_torus(sc: Scenario, threads: int) -> Result:
    if "theta" in sc.params:
        theta = [read_number({"x": x}, "x", f"$.params.theta[{i}]") for i, x in enumerate(_list(sc.params["theta"], "$.params.theta"))]
    elif "z" in sc.params:
        zs = sc.params["z"]
        if not isinstance(zs, list) or (len(zs) == 2 and not isinstance(zs[0], list)):
            zs = [zs]
        theta = []
        for i, z in enumerate(zs):
            z = read_complex(z, f"$.params.z[{i}]")
            if z == 0:
                raise ScenarioError(f"$.params.z[{i}]", "must be nonzero")
            theta.append(angle_of(z))
    else:
        raise ScenarioError("$.params", "need theta or z")
    if not theta:
        raise ScenarioError("$.params.theta", "need at least one angle")
    L = read_int(sc.params, "weight_bound", "$.params", 1, lo=1)
    alpha = read_int(sc.params, "alpha", "$.params", 0, lo=0)
    excl = read_number(sc.params, "tol", "$.params", 1e-12)
    if len(theta) > 1 and (2 * L + 1) ** len(theta) > 5e7:
        raise ScenarioError("$.params.weight_bound", "scan too large")
    rep = torus_gap_scan(theta, L, alpha, excl)
    msgs = ["every weight in the box acts trivially"] if rep.scanned == rep.excluded else []
    out = rep.to_json()
    out["tolerances"] = {"exclusion_tol": excl}
    return Result(out, warnings_=msgs)


def _solve_opts(sc):
    return dict(
        max_iter=read_int(sc.params, "max_iter", "$.params", 20, lo=0),
        tol=read_number(sc.params, "tol", "$.params", 1e-10),
        rank_tol=_rank_tol(sc),
        cutoff=read_number(sc.params, "cutoff", "$.params", LOG_CUTOFF),
    )


def task_rigidity_solve(sc: Scenario, threads: int) -> Result:
    pres, rep = _pres_rep(sc)
    pi = ActionTuple.from_rep(rep)
    opts = _solve_opts(sc)
    if "target" in sc.params:
        target = ActionTuple.from_rep(read_rep(sc.params["target"], "$.params.target", pres.k))
        if target.dim != pi.dim:
            raise ScenarioError("$.params.target", "dimension differs from the representation")
        spec = {"target": "explicit"}
    else:
        pert = sc.params.get("perturbation", {"mode": "planted", "magnitude": 1e-2})
        mode = pert.get("mode", "planted") if isinstance(pert, dict) else None
        if mode not in ("planted", "raw", "centralizer"):
            raise ScenarioError("$.params.perturbation.mode", "expected planted, raw or centralizer")
        mag = read_number(pert, "magnitude", "$.params.perturbation", 1e-2)
        if mag < 0:
            raise ScenarioError("$.params.perturbation.magnitude", "must be nonnegative")
        target, _ = perturb_action(pi, mode, mag, sc.seed, pres)
        spec = {"mode": mode, "magnitude": mag}
    res = weil_newton(pres, pi, target, **opts)
    out = res.to_json(include_conjugator=bool(sc.param("emit_conjugator", False)))
    out["perturbation"] = spec
    out["tolerances"] = opts
    return Result({"solve": out}, warnings_=res.warnings)


def task_rigidity_deform(sc: Scenario, threads: int) -> Result:
    pres, rep = _pres_rep(sc)
    pi = ActionTuple.from_rep(rep)
    opts = _solve_opts(sc)
    if "direction" in sc.params:
        z0 = read_matrix(sc.params["direction"], "$.params.direction")
        if z0.shape[0] != pi.dim:
            raise ScenarioError("$.params.direction", "dimension differs from the representation")
    else:
        basis = commutant_basis(pi.mats)
        rng = np.random.default_rng(sc.seed)
        z0 = sum(c * b for c, b in zip(rng.standard_normal(len(basis)), basis))
        z0 = z0 / op_norm(z0)
    if "phi" in sc.params:
        phi = [read_int({"x": x}, "x", f"$.params.phi[{i}]") for i, x in enumerate(_list(sc.params["phi"], "$.params.phi"))]
    else:
        phi = integer_homomorphism(pres)
    if not any(phi):
        raise ScenarioError("$.params.phi", "the group has no nonzero homomorphism to the integers")
    fam = deformation_family(pres, pi, z0, phi)
    ts = [read_number({"t": t}, "t", f"$.params.t[{i}]") for i, t in enumerate(_list(sc.params.get("t", [1e-3, 1e-2]), "$.params.t"))]
    samples, msgs = [], []
    for t in ts:
        res = weil_newton(pres, pi, fam.at(t), **opts)
        item = res.to_json()
        item["t"] = t
        item["obstruction_over_t"] = res.obstruction / t if t else None
        samples.append(item)
        msgs.extend(f"t={t}: {m}" for m in res.warnings)
    out = {"weights": phi, "direction": matrix_to_json(z0), "samples": samples, "tolerances": opts}
    return Result({"deform": out}, warnings_=msgs)


TASKS = {
    "check": task_check,
    "cohomology": task_cohomology,
    "split": task_split,
    "tame-fit": task_tame_fit,
    "tame-probe": task_tame_probe,
    "gap-sweep": task_gap_sweep,
    "net": task_net,
    "averaging": task_averaging,
    "torus": task_torus,
    "rigidity-solve": task_rigidity_solve,
    "rigidity-deform": task_rigidity_deform,
}


def _jsonable(x):
    """numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def run_scenario(sc: Scenario, threads: int = 1, timing: bool = False) -> tuple[dict, Result]:
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = TASKS[sc.task](sc, threads)
    msgs = list(result.warnings)
    msgs.extend(str(w.message) for w in caught if str(w.message) not in msgs)
    report = {
        "task": sc.task,
        "version": __version__,
        "input_digest": sc.digest(),
        "seed": sc.seed,
        "results": result.payload,
        "warnings": msgs,
    }
    if timing:
        report["timing"] = {"seconds": time.perf_counter() - t0}
    return _jsonable(report), result


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


# argument handling

FLAG_PARAMS = {
    "seed": None,
    "tol": "tol",
    "rank_tol": "rank_tol",
    "max_spin": "max_spin",
    "radius": "radius",
    "weight_bound": "weight_bound",
    "alpha": "alpha",
    "probe_size": "probe_size",
}


def _common(p: argparse.ArgumentParser, scenario_required: bool):
    if scenario_required:
        p.add_argument("scenario", help="scenario JSON file ('-' for stdin)")
    else:
        p.add_argument("scenario", nargs="?", help="scenario JSON file ('-' for stdin); defaults apply when omitted")
    p.add_argument("--output", "-o", help="write the JSON report here instead of stdout")
    p.add_argument("--csv", help="write the task's table here")
    p.add_argument("--threads", type=int, help="worker threads (default: $RIGIDITYLAB_THREADS or 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--rank-tol", type=float)
    p.add_argument("--max-spin", type=float)
    p.add_argument("--radius", type=int)
    p.add_argument("--weight-bound", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--probe-size", type=int)
    p.add_argument("--timing", action="store_true", help="add wall-clock timing (breaks byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigiditylab", description="Cohomology, spectral gaps and local rigidity experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the task named in a scenario file")
    _common(p, True)
    p.set_defaults(task=None)

    for name, required in (("check", True), ("cohomology", True), ("split", True), ("net", False), ("averaging", True), ("torus", False)):
        p = sub.add_parser(name, help=f"{name} task")
        _common(p, required)
        p.set_defaults(task=name)

    for group, actions in (("tame", (("fit", True), ("probe", True))), ("gap", (("sweep", False),)), ("rigidity", (("solve", True), ("deform", True)))):
        g = sub.add_parser(group, help=f"{group} tasks")
        gs = g.add_subparsers(dest="action", required=True)
        for action, required in actions:
            p = gs.add_parser(action)
            _common(p, required)
            p.set_defaults(task=f"{group}-{action}")
    return parser


def _read_input(path: str | None) -> dict | None:
    if path is None:
        return None
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None


def _threads(args) -> int:
    if args.threads is not None:
        n = args.threads
    else:
        env = os.environ.get("RIGIDITYLAB_THREADS", "1")
        try:
            n = int(env)
        except ValueError:
            raise ScenarioError("RIGIDITYLAB_THREADS", f"not an integer: {env!r}") from None
    if n < 1:
        raise ScenarioError("--threads", "must be at least 1")
    return n


def prepare(args) -> Scenario:
    data = _read_input(args.scenario)
    if data is None:
        data = {"task": args.task}
    if not isinstance(data, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    data = dict(data)
    if args.task is not None:
        if "task" in data and data["task"] != args.task:
            raise ScenarioError("$.task", f"scenario is for {data['task']!r}, command is {args.task!r}")
        data["task"] = args.task
    params = dict(data.get("params", {})) if isinstance(data.get("params", {}), dict) else data.get("params")
    if isinstance(params, dict):
        for flag, key in FLAG_PARAMS.items():
            val = getattr(args, flag)
            if val is None:
                continue
            if key is None:
                data["seed"] = val
            else:
                params[key] = val
        if params:
            data["params"] = params
    data.setdefault("seed", 0)
    return scenario_from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = _threads(args)
        sc = prepare(args)
        report, result = run_scenario(sc, threads, args.timing)
        table = None
        if args.csv:
            if result.rows is None or sc.task not in CSV_HEADERS:
                report["warnings"].append(f"task {sc.task} has no tabular payload; CSV not written")
            else:
                table = format_csv(CSV_HEADERS[sc.task], result.rows)
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    except ScenarioError as exc:
        print(f"rigiditylab: invalid input at {exc.where}: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"rigiditylab: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, LinAlgError, FloatingPointError) as exc:
        print(f"rigiditylab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"rigiditylab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if table is not None:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(table)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
