"""Scenario files and the reports produced by running them.

A scenario is a TOML document naming a task, the group and subgroup family it concerns, the
task's parameters and where artifacts go. Running it writes the artifacts next to a
``report.json``; only the ``elapsed_seconds`` field differs between two runs of one scenario.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .amenability import (FiniteGraph, cayley_ball_graph, folner_search, fundamental_class, grid_graph, node_key,
                          path_graph, read_edge_list, segment_graph, uf_boundary_solve)
from .certificates import (CertParams, Convention, VerificationReport, load_certificate, save_certificate,
                           verify)
from .coset_space import CosetSpace, SubgroupSpec, build_coset_space
from .errors import RelCertError, ScenarioError
from .groups import GroupSpec, parse_group_spec
from .logging import PipelineLogger
from .lp.instance import LPInstance
from .lp.lp_export import export_lp
from .lp.lp_search import (OptimumCurve, build_mean_lp, build_relA_lp, certificate_from_solution, optimum_curve)
from .lp.simplex import solve_lp, solve_lp_float
from .pipeline import transfer_pipeline
from .services import helpers
from .services.configuration_manager import ConfigurationManager

_logger = PipelineLogger("scenario").get_logger()

TASKS: Dict[str, List[str]] = {
    "rel-a-search": ["group", "window", "S"],
    "rel-amenability": ["group"],
    "folner": ["graph", "delta", "cap"],
    "uf-test": ["graph", "R", "K"],
    "transfer-pipeline": ["group", "n", "window"],
    "verify-file": ["certificate", "space"],
}


@dataclass
class Scenario:
    task: str
    params: Dict[str, Any]
    group: Optional[str] = None
    family: Optional[List[List[str]]] = None
    seed: int = 0
    output_dir: Path = Path(".")
    base_dir: Path = Path(".")

    def __post_init__(self):
        if self.task not in TASKS:
            raise ScenarioError(f"Unknown task {self.task!r}. Must be one of: {', '.join(TASKS)}")
        available = dict(self.params, group=self.group)
        for name in TASKS[self.task]:
            if available.get(name) is None:
                raise ScenarioError(f"Scenario for task {self.task} is missing the field {name!r}")

    def spec(self) -> GroupSpec:
        return parse_group_spec(self.group)

    def subgroups(self, spec: GroupSpec) -> List[SubgroupSpec]:
        family = self.family if self.family is not None else [[]]
        return [SubgroupSpec.from_words(spec, f"H{i + 1}", words) for i, words in enumerate(family)]

    def resolve(self, name: str) -> Path:
        path = Path(self.params[name])
        return path if path.is_absolute() else self.base_dir / path

    def to_dict(self) -> Dict[str, Any]:
        return {"task": self.task, "group": self.group, "family": self.family, "seed": self.seed,
                "params": {key: _plain(value) for key, value in sorted(self.params.items())}}


def _plain(value):
    if isinstance(value, Fraction):
        return helpers.fraction_to_str(value)
    if isinstance(value, list):
        return [_plain(v) for v in value]
    return value


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"Scenario file {path} does not exist")
    except tomllib.TOMLDecodeError as error:
        raise ScenarioError(f"Scenario file {path} is not valid TOML: {error}")
    if "task" not in data:
        raise ScenarioError(f"Scenario {path} is missing the field 'task'")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError(f"[params] in {path} must be a table")
    output = data.get("output", {})
    output_dir = Path(output.get("dir", f"{path.stem}-out"))
    if not output_dir.is_absolute():
        output_dir = path.parent / output_dir
    return Scenario(task=data["task"], params=params, group=data.get("group"), family=data.get("family"),
                    seed=int(data.get("seed", 0)), output_dir=output_dir, base_dir=path.parent)


@dataclass
class Report:
    scenario: Dict[str, Any]
    level: str
    verdict: Dict[str, Any]
    artifacts: Dict[str, str] = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"scenario": self.scenario, "level": self.level, "verdict": self.verdict,
                "artifacts": self.artifacts, "elapsed_seconds": self.elapsed_seconds}

    def save(self, path: Union[str, Path]):
        helpers.save_json(self.to_dict(), path)


def _rational(value) -> Fraction:
    try:
        return helpers.parse_rational(value)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"Expected a rational number, got {value!r}")


def build_graph(sc: Scenario) -> FiniteGraph:
    p = sc.params
    kind = p["graph"]
    radius = int(p.get("radius", 0))
    halo = int(p.get("halo", 2))
    if kind == "grid":
        return grid_graph(radius, halo, bool(p.get("king", True)))
    if kind == "path":
        return path_graph(radius, halo)
    if kind == "segment":
        return segment_graph(int(p.get("length", 1)), halo)
    if kind == "cayley":
        if sc.group is None:
            raise ScenarioError("A Cayley graph scenario needs the field 'group'")
        return cayley_ball_graph(sc.spec(), radius, halo)
    if kind == "edges":
        window = p.get("window_vertices")
        return read_edge_list(sc.resolve("edges"), window)
    raise ScenarioError(f"Unknown graph {kind!r}. Must be one of: grid, path, segment, cayley, edges")


def _coset_space(sc: Scenario, depth: int) -> CosetSpace:
    spec = sc.spec()
    return build_coset_space(spec, sc.subgroups(spec), depth, sc.params.get("resolver", "auto"))


def _rel_a_search(sc: Scenario) -> Report:
    p = sc.params
    window, S, R = int(p["window"]), int(p["S"]), int(p.get("R", 1))
    cs = _coset_space(sc, int(p.get("depth", window + S)))
    inst = build_relA_lp(cs, window, S, R)
    if p.get("solver", "exact") == "float":
        solution = solve_lp_float(inst)
        return Report(sc.to_dict(), "evidence", {"status": solution.status, "optimum": repr(solution.optimum)})

    solution = solve_lp(inst)
    verdict: Dict[str, Any] = {"status": solution.status, "pivots": solution.pivots}
    if not solution.is_optimal:
        return Report(sc.to_dict(), "evidence", verdict)
    verdict["optimum"] = helpers.fraction_to_str(solution.optimum)
    epsilon = _rational(p["epsilon"]) if "epsilon" in p else solution.optimum + Fraction(1, 100)
    cert = certificate_from_solution(inst, solution, cs)
    params = CertParams(R, epsilon, S, window)
    report = verify(cert, cs, params)
    verdict["verification"] = report.to_dict()
    save_certificate(cert, sc.output_dir / "certificate.json", params)
    cs.save(sc.output_dir / "coset_space.json")
    return Report(sc.to_dict(), "certified" if report.passed else "evidence", verdict,
                  {"certificate": "certificate.json", "coset_space": "coset_space.json"})


def _radii(sc: Scenario) -> List[int]:
    p = sc.params
    radii = p.get("support_radii", [p["support_radius"]] if "support_radius" in p else None)
    if not radii:
        raise ScenarioError("Scenario for task rel-amenability is missing the field 'support_radii'")
    return [int(r) for r in radii]


def _rel_amenability(sc: Scenario) -> Report:
    radii = _radii(sc)
    cs = _coset_space(sc, int(sc.params.get("depth", max(radii) + 1)))
    curve = optimum_curve(cs, radii, kind="mean")
    curve.save_csv(sc.output_dir / "mean_curve.csv")
    verdict = {"optima": {str(r): helpers.fraction_to_str(v) for r, _, v in curve.points}, "monotone": curve.monotone}
    return Report(sc.to_dict(), "evidence", verdict, {"curve": "mean_curve.csv"})


def _folner(sc: Scenario) -> Report:
    p = sc.params
    g = build_graph(sc)
    r = p.get("r", ConfigurationManager.get_setting("amenability", "default_r"))
    result = folner_search(g, r, _rational(p["delta"]), int(p["cap"]), exhaustive=bool(p.get("exhaustive", False)),
                           exhaustive_limit=p.get("exhaustive_limit"), rng_seed=sc.seed)
    verdict = {"status": result.status, "size": result.size, "evaluations": result.evaluations,
               "ratio": helpers.fraction_to_str(result.ratio) if result.ratio is not None else None,
               "graph": g.describe()}
    if result.ratio is not None:
        result.recount(g)
    helpers.save_json({"r": r, "ratio": verdict["ratio"], "graph": g.name,
                       "subset": [str(v) for v in sorted(result.subset, key=node_key)]},
                      sc.output_dir / "folner_set.json")
    return Report(sc.to_dict(), "certified" if result.found else "evidence", verdict, {"folner_set": "folner_set.json"})


def _uf_test(sc: Scenario) -> Report:
    p = sc.params
    g = build_graph(sc)
    result = uf_boundary_solve(g, fundamental_class(g), int(p["R"]), _rational(p["K"]), p.get("policy", "closed"))
    verdict = {"feasible": result.feasible, "interior": len(result.interior), "policy": result.policy,
               "R": result.R, "K": helpers.fraction_to_str(result.K)}
    artifacts = {}
    if result.witness is not None:
        cells = sorted(result.witness.coefficients.items(), key=lambda item: (node_key(item[0][0]), node_key(item[0][1])))
        helpers.save_json({"R": result.R, "K": verdict["K"], "policy": result.policy,
                           "cells": [[str(u), str(v), helpers.fraction_to_str(a)] for (u, v), a in cells]},
                          sc.output_dir / "uf_witness.json")
        artifacts["witness"] = "uf_witness.json"
    return Report(sc.to_dict(), "evidence", verdict, artifacts)


def _transfer_pipeline(sc: Scenario) -> Report:
    p = sc.params
    n, window, R = int(p["n"]), int(p["window"]), int(p.get("R", 1))
    pipeline = transfer_pipeline(sc.group, n, window, depth=p.get("depth"), R=R,
                                 epsilon=_rational(p["epsilon"]) if "epsilon" in p else None,
                                 stride=p.get("stride"), S=p.get("S"), family=sc.family)
    report: VerificationReport = pipeline.execute()
    induction = pipeline.result("induction")
    save_certificate(pipeline.result("certificate"), sc.output_dir / "certificate.json", pipeline.result("params"))
    pipeline.result("coset_space").save(sc.output_dir / "coset_space.json")
    verdict = {"verification": report.to_dict(), "n": n,
               "qi_constant": helpers.fraction_to_str(induction.qi_constant),
               "tree_support_radius": induction.support_radius}
    return Report(sc.to_dict(), "certified" if report.passed else "evidence", verdict,
                  {"certificate": "certificate.json", "coset_space": "coset_space.json"})


def verify_file(certificate_path: Union[str, Path], space_path: Union[str, Path], R: Optional[int] = None,
                epsilon=None, S: Optional[int] = None, window: Optional[int] = None,
                convention: Optional[str] = None) -> VerificationReport:
    """Verify a stored certificate against a stored coset space; missing parameters come from the certificate file."""
    cert, stored = load_certificate(certificate_path)
    cs = CosetSpace.load(space_path)
    values = stored.to_dict() if stored else {}
    overrides = {"R": R, "epsilon": epsilon, "S": S, "window": window}
    values.update({key: value for key, value in overrides.items() if value is not None})
    missing = [key for key in ("R", "epsilon", "S", "window") if key not in values]
    if missing:
        raise ScenarioError(f"No value for {', '.join(missing)}: give it explicitly or store it in the certificate")
    params = CertParams(int(values["R"]), _rational(values["epsilon"]), int(values["S"]), int(values["window"]))
    return verify(cert, cs, params, Convention(convention) if convention else None)


def _verify_file(sc: Scenario) -> Report:
    p = sc.params
    report = verify_file(sc.resolve("certificate"), sc.resolve("space"), p.get("R"), p.get("epsilon"), p.get("S"),
                         p.get("window"), p.get("convention"))
    return Report(sc.to_dict(), "certified" if report.passed else "evidence", {"verification": report.to_dict()})


_RUNNERS: Dict[str, Callable[[Scenario], Report]] = {
    "rel-a-search": _rel_a_search,
    "rel-amenability": _rel_amenability,
    "folner": _folner,
    "uf-test": _uf_test,
    "transfer-pipeline": _transfer_pipeline,
    "verify-file": _verify_file,
}


def run_scenario(scenario: Union[Scenario, str, Path]) -> Report:
    sc = scenario if isinstance(scenario, Scenario) else load_scenario(scenario)
    sc.output_dir.mkdir(parents=True, exist_ok=True)
    _logger.info(f"Running {sc.task} scenario into {sc.output_dir}")
    start = time.perf_counter()
    try:
        report = _RUNNERS[sc.task](sc)
    except KeyError as error:
        raise ScenarioError(f"Scenario for task {sc.task} is missing the field {error}")
    except (TypeError, ValueError) as error:
        if isinstance(error, RelCertError):
            raise
        raise ScenarioError(f"Invalid scenario parameter: {error}") from error
    report.elapsed_seconds = round(time.perf_counter() - start, 3)
    report.save(sc.output_dir / "report.json")
    return report


def scenario_curve(sc: Scenario, solver: Optional[Callable[[LPInstance], Any]] = None) -> OptimumCurve:
    """The optimum curve of a rel-a-search scenario (over ``windows``) or a rel-amenability one."""
    p = sc.params
    solver = solver or solve_lp
    if sc.task == "rel-a-search":
        windows = [int(w) for w in p.get("windows", [p["window"]])]
        offset = int(p.get("S_offset", int(p["S"]) - int(p["window"])))
        depth = int(p.get("depth", 2 * max(windows) + offset))
        curve = optimum_curve(_coset_space(sc, depth), windows, lambda w: w + offset, int(p.get("R", 1)),
                              kind="relA", solver=solver)
    elif sc.task == "rel-amenability":
        radii = _radii(sc)
        curve = optimum_curve(_coset_space(sc, int(p.get("depth", max(radii) + 1))), radii, kind="mean", solver=solver)
    else:
        raise ScenarioError(f"Task {sc.task} has no optimum curve")
    sc.output_dir.mkdir(parents=True, exist_ok=True)
    curve.save_csv(sc.output_dir / f"{curve.kind}_curve.csv")
    return curve


def scenario_lp(sc: Scenario) -> LPInstance:
    p = sc.params
    if sc.task == "rel-a-search":
        window, S = int(p["window"]), int(p["S"])
        return build_relA_lp(_coset_space(sc, int(p.get("depth", window + S))), window, S, int(p.get("R", 1)))
    if sc.task == "rel-amenability":
        radius = max(_radii(sc))
        return build_mean_lp(_coset_space(sc, int(p.get("depth", radius + 1))), radius)
    raise ScenarioError(f"Task {sc.task} has no linear program")


def export_scenario_lp(sc: Scenario, path: Optional[Union[str, Path]] = None) -> Path:
    inst = scenario_lp(sc)
    if path is None:
        sc.output_dir.mkdir(parents=True, exist_ok=True)
        path = sc.output_dir / f"{inst.metadata['kind']}.lp"
    export_lp(inst, path)
    return Path(path)
