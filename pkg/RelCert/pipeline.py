from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Any, Callable, Dict, Optional, Sequence
import networkx as nx

from .bass_serre import BassSerreTree
from .certificates import CertParams, Convention, ProbCertificate, verify
from .coset_space import CosetSpace, SubgroupSpec, build_coset_space, rho
from .groups import identity, parse_group_spec
from .logging import PipelineLogger
from .services import helpers
from .services.configuration_manager import ConfigurationManager
from .transfer import (CosetSpaceAction, InductionResult, check_induction_identity, induce_from_space,
                       pushforward_to_cosets, tree_certificates)

class Context:
    def __init__(self, initial_context: Optional[Dict[str, Any]] = None):
        self.context = initial_context or {}

    def add(self, key: str, value: Any):
        self.context[key] = value

    def get(self, key: str):
        return self.context.get(key)

    def require(self, key: str):
        if key not in self.context:
            raise KeyError(f"Key {key} not in context.")
        return self.context[key]

    def remove(self, key: str):
        del self.context[key]

    def clear(self):
        self.context.clear()

    def update(self, key: str, new_value: Any):
        if key in self.context:
            self.context[key] = new_value
        else:
            raise KeyError(f"Key {key} not in context.")

class Step(ABC):
    _logger = PipelineLogger("pipeline").get_logger()

    def __init__(self, input_key: str | None = None, output_key: str | None = None):
        self.input_key = input_key
        self.output_key = output_key

    def get_input_key(self):
        self.input_key = self.input_key or helpers.generate_random_string()
        return self.input_key

    def get_output_key(self):
        self.output_key = self.output_key or helpers.generate_random_string()
        return self.output_key

    @abstractmethod
    def execute(self, context: Context) -> Any:
        pass

    def _emit(self, context: Context, result: Any) -> Any:
        context.add(self.get_output_key(), result)
        self._logger.info(f"{type(self).__name__} -> {self.get_output_key()}")
        return result

class CosetSpaceStep(Step):
    def __init__(self, group: str, family: Sequence[Sequence[str]], depth: int, resolver: str = "auto",
                 input_key: str | None = None, output_key: str | None = "coset_space"):
        super().__init__(input_key, output_key)
        self.group = group
        self.family = family
        self.depth = depth
        self.resolver = resolver

    def execute(self, context: Context) -> CosetSpace:
        spec = parse_group_spec(self.group)
        family = [SubgroupSpec.from_words(spec, f"H{i + 1}", words) for i, words in enumerate(self.family)]
        return self._emit(context, build_coset_space(spec, family, self.depth, self.resolver))

class BassSerreStep(Step):
    def __init__(self, period: Sequence[str] | None = None, input_key: str | None = None,
                 output_key: str | None = "tree"):
        super().__init__(input_key, output_key)
        self.period = period

    def execute(self, context: Context) -> BassSerreTree:
        period = self.period or ConfigurationManager.get_setting("transfer", "ray_period")
        return self._emit(context, BassSerreTree(context.require(self.get_input_key()), period))

class TreeCertificatesStep(Step):
    def __init__(self, n: int, stride: int | None = None, input_key: str | None = None,
                 output_key: str | None = "family"):
        super().__init__(input_key, output_key)
        self.n = n
        self.stride = stride

    def execute(self, context: Context):
        stride = self.stride or ConfigurationManager.get_setting("transfer", "stride")
        tree: BassSerreTree = context.require(self.get_input_key())
        return self._emit(context, tree_certificates(None, tree.parent, self.n, stride))

class InduceStep(Step):
    """Induce from the tree; the identity of the construction is checked before handing the result on."""
    def __init__(self, window: int, tree_key: str = "tree", input_key: str | None = None,
                 output_key: str | None = "induction"):
        super().__init__(input_key, output_key)
        self.window = window
        self.tree_key = tree_key

    def execute(self, context: Context) -> InductionResult:
        tree: BassSerreTree = context.require(self.tree_key)
        family = context.require(self.get_input_key())
        action = CosetSpaceAction(tree.cs, tree.basepoint, tree.distance)
        result = induce_from_space(action, family, self.window)
        check_induction_identity(action, family, result.certificate)
        context.add("action", action)
        return self._emit(context, result)

class PushforwardStep(Step):
    """Push onto G/𝓗. The tree's vertices already are those cosets, so π is the identity there."""
    def __init__(self, target_key: str = "coset_space", R: int = 1, input_key: str | None = None,
                 output_key: str | None = "certificate"):
        super().__init__(input_key, output_key)
        self.target_key = target_key
        self.R = R

    def execute(self, context: Context) -> ProbCertificate:
        induction: InductionResult = context.require(self.get_input_key())
        target: CosetSpace = context.require(self.target_key)
        pushed = pushforward_to_cosets(induction.certificate, lambda v: v, context.require("action"), target, self.R)
        return self._emit(context, pushed)

class VerifyStep(Step):
    def __init__(self, R: int, epsilon, S: int | None = None, window: int | None = None,
                 space_key: str = "coset_space", input_key: str | None = None, output_key: str | None = "report"):
        super().__init__(input_key, output_key)
        self.R = R
        self.epsilon = epsilon
        self.S = S
        self.window = window
        self.space_key = space_key

    def execute(self, context: Context):
        cert: ProbCertificate = context.require(self.get_input_key())
        cs: CosetSpace = context.require(self.space_key)
        window = self.window if self.window is not None else max(x.length for x in cert.entries)
        S = self.S if self.S is not None else minimal_S(cert, cs)
        params = CertParams(self.R, self.epsilon, S, window)
        context.add("params", params)
        return self._emit(context, verify(cert, cs, params))

class ApplyStep(Step):
    def __init__(self, func: Callable[[Any], Any], input_key: str | None = None, output_key: str | None = None):
        super().__init__(input_key, output_key)
        self.func = func

    def execute(self, context: Context) -> Any:
        input_value = context.get(self.get_input_key())
        result = self.func(input_value)
        context.add(self.get_output_key(), result)
        return result

def minimal_S(cert: ProbCertificate, cs: CosetSpace) -> int:
    """One more than the largest support distance, in the certificate's own convention."""
    e = identity(cs.ambient)
    worst = 0
    for x in cert.window_elements():
        centre = x if cert.convention == Convention.REITER else e
        for point in cert.support(x):
            worst = max(worst, rho(cs, centre, point))
    return worst + 1

class Pipeline:
    def __init__(self):
        self.graph = nx.DiGraph()
        self.context = None
        self.previous_step = None

    def get_previous_step(self):
        return self.previous_step

    def add_step(self, step: Step):
        self.graph.add_node(step)
        if self.previous_step:
            self.graph.add_edge(self.previous_step, step)
        self.previous_step = step

    def execute(self, initial_context: Optional[Dict[str, Any]] = None):
        self.context = Context(initial_context)
        for step in nx.topological_sort(self.graph):
            self._execute_step(step)
        if self.previous_step:
            return self.context.get(self.previous_step.get_output_key())
        return None

    def _execute_step(self, step: Step):
        for pred in self.graph.predecessors(step):
            self.context.add(step.get_input_key(), self.context.get(pred.get_output_key()))
        step.execute(self.context)

    def result(self, key: str):
        return self.context.get(key) if self.context else None

class PipelineBuilder:
    def __init__(self):
        self.pipeline = Pipeline()

    def _add_step(self, step: Step):
        self.pipeline.add_step(step)
        return self

    def coset_space(self, group: str, family: Sequence[Sequence[str]], depth: int, resolver: str = "auto") -> 'PipelineBuilder':
        return self._add_step(CosetSpaceStep(group, family, depth, resolver))

    def bass_serre_tree(self, period: Sequence[str] | None = None) -> 'PipelineBuilder':
        return self._add_step(BassSerreStep(period))

    def tree_certificates(self, n: int, stride: int | None = None) -> 'PipelineBuilder':
        return self._add_step(TreeCertificatesStep(n, stride))

    def induce(self, window: int) -> 'PipelineBuilder':
        return self._add_step(InduceStep(window))

    def pushforward(self, R: int = 1) -> 'PipelineBuilder':
        return self._add_step(PushforwardStep(R=R))

    def verify(self, R: int, epsilon, S: int | None = None) -> 'PipelineBuilder':
        return self._add_step(VerifyStep(R, epsilon, S))

    def apply(self, func: Callable[[Any], Any], input_key: str | None = None, output_key: str | None = None) -> 'PipelineBuilder':
        return self._add_step(ApplyStep(func, input_key, output_key))

    def build(self) -> Pipeline:
        return self.pipeline

def transfer_pipeline(group: str, n: int, window: int, depth: int | None = None, R: int = 1,
                      epsilon=None, stride: int | None = None, S: int | None = None,
                      family: Sequence[Sequence[str]] | None = None) -> Pipeline:
    """Tree certificates, induction, pushforward and verification for a rank-2 free product."""
    if depth is None:
        depth = ConfigurationManager.get_setting("transfer", "depth")
    if family is None:
        spec = parse_group_spec(group)
        family = [[g.symbol] for g in spec.generators]
    if epsilon is None:
        epsilon = Fraction(2, n) + Fraction(1, 100)
    return (PipelineBuilder()
            .coset_space(group, family, depth)
            .bass_serre_tree()
            .tree_certificates(n, stride)
            .induce(window)
            .pushforward(R)
            .verify(R, epsilon, S)
            .build())
