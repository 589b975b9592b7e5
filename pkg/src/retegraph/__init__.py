"""retegraph: an incremental property-graph query engine.

Queries in an openCypher subset compile through a graph algebra to a flat
relational plan whose operators are maintained incrementally by a Rete-style
propagation network under graph updates.
"""

from .changeset import ChangeSet
from .graph import GraphDelta, PropertyGraph, load_graph
from .session import Session, SessionOptions
from .values import Bag, EdgeRef, Path, VertexRef

__version__ = "0.1.0"

__all__ = [
    "Bag",
    "ChangeSet",
    "EdgeRef",
    "GraphDelta",
    "Path",
    "PropertyGraph",
    "Session",
    "SessionOptions",
    "VertexRef",
    "load_graph",
    "__version__",
]
