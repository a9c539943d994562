"""End-to-end flow: cluster, route, choose modes, insert, refine."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from .clustering import ClusterHierarchy, dual_level_cluster
from .dp import (DEFAULT_DOMINANCE, DEFAULT_LIMIT, DPResult, Weights, bottom_up, moes_select,
                 top_down)
from .ingest import Instance
from .model import Assignment, ClockTree, InsertMode, TreeMetrics, ValidationError
from .refine import REFINE_ORDERS, RefineParams, cluster_roots, refine
from .routing import hierarchical_route
from .timing import evaluate_tree


@dataclass(frozen=True)
class RunConfig:
    hc: int = 3000
    lc: int = 30
    alpha: float = 1.0
    beta: float = 10.0
    gamma: float = 1.0
    p_skew: float = 23.0
    m_refine: int = 33
    fanout_threshold: Optional[int] = None   # None: use ``mode`` everywhere
    mode: InsertMode = InsertMode.FULL
    seed: int = 0
    limit: Optional[int] = DEFAULT_LIMIT
    dominance: str = DEFAULT_DOMINANCE
    refine_order: str = "fastest_first"
    refine_enabled: bool = True

    def __post_init__(self):
        if not self.hc >= self.lc >= 1:
            raise ValidationError("need hc >= lc >= 1")
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValidationError("weights must be >= 0")
        if self.fanout_threshold is not None and self.fanout_threshold < 0:
            raise ValidationError("fanout threshold must be >= 0")
        if self.refine_order not in REFINE_ORDERS:
            raise ValidationError(f"refine_order must be one of {REFINE_ORDERS}")
        RefineParams(self.p_skew, self.m_refine)

    @property
    def weights(self) -> Weights:
        return Weights(self.alpha, self.beta, self.gamma)

    @property
    def refine_params(self) -> RefineParams:
        return RefineParams(self.p_skew, self.m_refine)


@dataclass
class Routed:
    """Routing output shared by every run on one instance."""

    instance: Instance
    hierarchy: ClusterHierarchy
    tree: ClockTree

    @cached_property
    def cluster_roots(self) -> list[int]:
        return cluster_roots(self.tree, self.hierarchy)


def route_instance(instance: Instance, config: RunConfig = RunConfig()) -> Routed:
    hierarchy = dual_level_cluster(instance.sinks, config.hc, config.lc, seed=config.seed)
    tree = hierarchical_route(instance.sinks, instance.root_pos, hierarchy, instance.tech)
    return Routed(instance, hierarchy, tree)


def mode_config_from_fanout(tree: ClockTree, threshold: int) -> tuple[InsertMode, ...]:
    """Edges driving fewer than ``threshold`` sinks get Full, the rest Intra-side."""
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    return tuple(InsertMode.FULL if fo < threshold else InsertMode.INTRA_SIDE
                 for fo in tree.fanout)


def modes_for(tree: ClockTree, config: RunConfig) -> tuple[InsertMode, ...]:
    if config.fanout_threshold is not None:
        return mode_config_from_fanout(tree, config.fanout_threshold)
    return (config.mode,) * len(tree.edges)


@dataclass
class RunResult:
    tree: ClockTree              # routed tree, grown by refinement buffers if any
    assignment: Assignment
    metrics: TreeMetrics
    pre_refine: TreeMetrics
    dp: Optional[DPResult] = field(default=None, repr=False)


def insert_and_refine(routed: Routed, modes: tuple[InsertMode, ...], config: RunConfig,
                      warm: Optional[DPResult] = None) -> RunResult:
    """DP insertion under ``modes`` followed by conditional skew refinement."""
    tech = routed.instance.tech
    w = config.weights
    result = bottom_up(routed.tree, modes, tech, limit=config.limit, weights=w.as_tuple(),
                       dominance=config.dominance, warm=warm)
    best = moes_select(result.root_candidates(), *w.as_tuple())
    assignment = top_down(result, best)
    timing = evaluate_tree(routed.tree, assignment, tech)
    if config.refine_enabled:
        tree, assignment, metrics = refine(routed.tree, assignment, routed.hierarchy,
                                           config.refine_params, tech, config.refine_order,
                                           timing=timing, roots=routed.cluster_roots)
    else:
        tree, metrics = routed.tree, timing.metrics
    return RunResult(tree, assignment, metrics, timing.metrics, result)


def run(instance: Instance, config: RunConfig = RunConfig(),
        routed: Optional[Routed] = None) -> RunResult:
    routed = routed or route_instance(instance, config)
    return insert_and_refine(routed, modes_for(routed.tree, config), config)
