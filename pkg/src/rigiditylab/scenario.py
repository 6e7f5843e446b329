"""
Scenario files: JSON documents naming a task, a presentation, representation
constructors and parameters.  Parsing turns them into library objects and
reports the first offending field on failure.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .fpgroup import Presentation
from .unirep import GradedModule, UnitaryRep, direct_sum, su2_irrep, torus_weight_rep

TASKS = (
    "check",
    "cohomology",
    "split",
    "tame-fit",
    "tame-probe",
    "gap-sweep",
    "net",
    "averaging",
    "torus",
    "rigidity-solve",
    "rigidity-deform",
)

# 1 rad about z and about x
DEFAULT_ROTATIONS = [{"axis": [0, 0, 1], "angle": 1.0}, {"axis": [1, 0, 0], "angle": 1.0}]


class ScenarioError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


@dataclass
class Scenario:
    task: str
    data: dict
    params: dict = field(default_factory=dict)
    seed: int = 0

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.data).encode()).hexdigest()

    def param(self, name: str, default=None):
        return self.params.get(name, default)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def load_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("$", f"malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None
    return scenario_from_dict(data)


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("$", "scenario must be a JSON object")
    task = data.get("task")
    if task not in TASKS:
        raise ScenarioError("$.task", f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("$.params", "must be an object")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ScenarioError("$.seed", "must be a nonnegative integer")
    return Scenario(task, data, params, seed)


# field readers


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ScenarioError(where, f"expected a number, got {type(x).__name__}")
    if not math.isfinite(x):
        raise ScenarioError(where, "must be finite")
    return float(x)


def _int(x, where: str, lo: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ScenarioError(where, f"expected an integer, got {type(x).__name__}")
    if lo is not None and x < lo:
        raise ScenarioError(where, f"must be at least {lo}")
    return x


def _list(x, where: str) -> list:
    if not isinstance(x, list):
        raise ScenarioError(where, f"expected an array, got {type(x).__name__}")
    return x


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise ScenarioError(where, "expected an object")
    if key not in obj:
        raise ScenarioError(f"{where}.{key}", "missing")
    return obj[key]


def read_number(obj: dict, key: str, where: str, default=None) -> float | None:
    if key not in obj:
        return default
    return _number(obj[key], f"{where}.{key}")


def read_int(obj: dict, key: str, where: str, default=None, lo: int | None = None) -> int | None:
    if key not in obj:
        return default
    return _int(obj[key], f"{where}.{key}", lo)


def read_word(x, where: str, k: int | None = None) -> tuple:
    out = []
    for i, a in enumerate(_list(x, where)):
        a = _int(a, f"{where}[{i}]")
        if a == 0:
            raise ScenarioError(f"{where}[{i}]", "letters are nonzero (1-based, negative for inverses)")
        if k is not None and abs(a) > k:
            raise ScenarioError(f"{where}[{i}]", f"generator {abs(a)} out of range 1..{k}")
        out.append(a)
    return tuple(out)


def read_complex(z, where: str) -> complex:
    if isinstance(z, list):
        if len(z) != 2:
            raise ScenarioError(where, "complex entries are [re, im] pairs")
        return complex(_number(z[0], f"{where}[0]"), _number(z[1], f"{where}[1]"))
    return complex(_number(z, where))


def read_matrix(x, where: str) -> np.ndarray:
    rows = _list(x, where)
    if not rows:
        raise ScenarioError(where, "empty matrix")
    out = []
    for i, row in enumerate(rows):
        row = _list(row, f"{where}[{i}]")
        out.append([read_complex(z, f"{where}[{i}][{j}]") for j, z in enumerate(row)])
    n = len(out)
    if any(len(r) != n for r in out):
        raise ScenarioError(where, "matrix must be square")
    return np.array(out, dtype=complex)


def read_presentation(obj, where: str = "$.presentation") -> Presentation:
    gens = _int(_require(obj, "generators", where), f"{where}.generators", lo=1)
    rels = _list(obj.get("relators", []), f"{where}.relators")
    words = tuple(read_word(w, f"{where}.relators[{i}]", gens) for i, w in enumerate(rels))
    return Presentation(gens, words)


def read_rotations(x, where: str) -> list[tuple]:
    out = []
    for i, rot in enumerate(_list(x, where)):
        w = f"{where}[{i}]"
        axis = [_number(a, f"{w}.axis[{n}]") for n, a in enumerate(_list(_require(rot, "axis", w), f"{w}.axis"))]
        if len(axis) != 3:
            raise ScenarioError(f"{w}.axis", "must have three entries")
        nrm = math.sqrt(sum(a * a for a in axis))
        if nrm == 0:
            raise ScenarioError(f"{w}.axis", "must be nonzero")
        out.append(([a / nrm for a in axis], _number(_require(rot, "angle", w), f"{w}.angle")))
    if not out:
        raise ScenarioError(where, "need at least one rotation")
    return out


def read_spin(x, where: str):
    from fractions import Fraction

    j = Fraction(_number(x, where)).limit_denominator(2)
    if j < 0 or abs(float(j) - float(x)) > 1e-12:
        raise ScenarioError(where, "spin must be a nonnegative multiple of 1/2")
    return j


def read_rep(obj, where: str = "$.representation", k: int | None = None) -> UnitaryRep:
    """Representation constructors, keyed by "kind".

    matrices: {"matrices": [M_1, ..., M_k]} with [re, im] entries
    su2:      {"spin": j, "rotations": [{"axis": [x, y, z], "angle": t}, ...]}
    torus:    {"theta": [[...] per generator], "weight": [l_1, ..., l_m]}
    sum:      {"summands": [rep, ...]}
    """
    kind = _require(obj, "kind", where)
    if kind == "matrices":
        mats = [read_matrix(m, f"{where}.matrices[{i}]") for i, m in enumerate(_list(_require(obj, "matrices", where), f"{where}.matrices"))]
        if not mats:
            raise ScenarioError(f"{where}.matrices", "need at least one matrix")
        if len({m.shape for m in mats}) != 1:
            raise ScenarioError(f"{where}.matrices", "matrices have different sizes")
        rep = UnitaryRep(tuple(mats))
    elif kind == "su2":
        spin = read_spin(_require(obj, "spin", where), f"{where}.spin")
        rep, _ = su2_irrep(spin, read_rotations(_require(obj, "rotations", where), f"{where}.rotations"))
    elif kind == "torus":
        thetas = _list(_require(obj, "theta", where), f"{where}.theta")
        weight = [_int(a, f"{where}.weight[{i}]") for i, a in enumerate(_list(_require(obj, "weight", where), f"{where}.weight"))]
        mats = []
        for i, th in enumerate(thetas):
            th = [_number(a, f"{where}.theta[{i}][{n}]") for n, a in enumerate(_list(th, f"{where}.theta[{i}]"))]
            if len(th) != len(weight):
                raise ScenarioError(f"{where}.theta[{i}]", f"length {len(th)} does not match the weight length {len(weight)}")
            mats.append(torus_weight_rep(th, weight)[0])
        if not mats:
            raise ScenarioError(f"{where}.theta", "need one angle vector per generator")
        rep = UnitaryRep(tuple(mats))
    elif kind == "sum":
        parts = [read_rep(s, f"{where}.summands[{i}]", k) for i, s in enumerate(_list(_require(obj, "summands", where), f"{where}.summands"))]
        if not parts:
            raise ScenarioError(f"{where}.summands", "need at least one summand")
        if len({p.k for p in parts}) != 1:
            raise ScenarioError(f"{where}.summands", "summands have different generator counts")
        rep = direct_sum(parts)
    else:
        raise ScenarioError(f"{where}.kind", f"unknown kind {kind!r}; expected matrices, su2, torus or sum")
    if k is not None and rep.k != k:
        raise ScenarioError(where, f"{rep.k} generator matrices for a presentation with {k} generators")
    return rep


def read_module(obj, where: str = "$.module") -> GradedModule:
    """Graded families.

    su2-family: {"max_spin": J, "rotations": [...], "include_trivial": true}
    components: {"components": [{"rep": rep, "lambda": x, "label": s}, ...]}
    """
    kind = _require(obj, "kind", where)
    if kind == "su2-family":
        rots = read_rotations(obj.get("rotations", DEFAULT_ROTATIONS), f"{where}.rotations")
        top = read_spin(_require(obj, "max_spin", where), f"{where}.max_spin")
        inc = obj.get("include_trivial", True)
        if not isinstance(inc, bool):
            raise ScenarioError(f"{where}.include_trivial", "must be a boolean")
        return GradedModule.su2_family(rots, top, include_trivial=inc)
    if kind == "components":
        comps = []
        for i, c in enumerate(_list(_require(obj, "components", where), f"{where}.components")):
            w = f"{where}.components[{i}]"
            rep = read_rep(_require(c, "rep", w), f"{w}.rep")
            lam = _number(_require(c, "lambda", w), f"{w}.lambda")
            comps.append((rep, lam, str(c.get("label", ""))))
        if not comps:
            raise ScenarioError(f"{where}.components", "need at least one component")
        try:
            return GradedModule(comps)
        except ValueError as exc:
            raise ScenarioError(where, str(exc)) from None
    raise ScenarioError(f"{where}.kind", f"unknown kind {kind!r}; expected su2-family or components")
