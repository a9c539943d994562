"""Double-side clock tree synthesis: routing, concurrent buffer and nTSV insertion,
skew refinement and design space exploration."""

from .model import (ClockTree, ConnectivityError, InfeasibleError, InsertMode, Pattern, Point,
                    Side, Sink, Technology, TreeMetrics, ValidationError)
from .timing import evaluate_tree, pattern_electrical
from .ingest import Instance, generate_benchmark, load_instance
from .pipeline import RunConfig, run

__all__ = ["ClockTree", "ConnectivityError", "InfeasibleError", "InsertMode", "Pattern", "Point",
           "Side", "Sink", "Technology", "TreeMetrics", "ValidationError", "evaluate_tree",
           "pattern_electrical", "Instance", "generate_benchmark", "load_instance", "RunConfig",
           "run"]
