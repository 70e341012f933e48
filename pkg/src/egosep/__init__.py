"""egosep: graph similarity as ego-network separability.

Two graphs are compared by sampling ego-graphs from each, summarizing every
ego-graph with a fixed battery of structural statistics, and training a
classifier to tell the two samples apart. Cross-validated AUC is the
distance: 0.5 means indistinguishable, 1.0 means perfectly separable.
"""

from .graph import AttributeRecord, Graph, load_graph, write_graph
from .synth import BlockPlan, SbmSpec, gen_college, gen_er, gen_sbm, gen_ws

__all__ = [
    "AttributeRecord",
    "Graph",
    "load_graph",
    "write_graph",
    "BlockPlan",
    "SbmSpec",
    "gen_college",
    "gen_er",
    "gen_sbm",
    "gen_ws",
]

__version__ = "0.1.0"
