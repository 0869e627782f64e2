"""Non-backtracking walks, their stationary measures, and comparison with simple random walk."""

__version__ = "0.1.0"

from .graphs import Graph, GraphError, Network, build_graph, generate
from .kernels import Kernel, KernelError, Measure, StateSpace
from .walks import knbrw_kernel, nbrw_kernel, pbrw_kernel, srw_kernel

__all__ = [
    "Graph", "GraphError", "Network", "build_graph", "generate",
    "Kernel", "KernelError", "Measure", "StateSpace",
    "knbrw_kernel", "nbrw_kernel", "pbrw_kernel", "srw_kernel",
    "__version__",
]
