"""
Exception hierarchy

Every failure raised by the pipeline derives from TreePackError. Input
validation errors also derive from ValueError so callers that only care
about bad arguments can catch those.
"""

from typing import Any, Dict, Optional


class TreePackError(Exception):
    """Base class for all pipeline errors"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


# Graph core

class GraphError(TreePackError, ValueError):
    """Invalid host graph specification (index out of range, duplicate edge)"""


class TreeStructureError(TreePackError, ValueError):
    """Parent array does not encode a single rooted tree"""

    def __init__(self, kind: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.kind = kind


class EmbeddingEdgeMissing(TreePackError, ValueError):
    """A mapped guest edge is absent from the host"""


class FormatError(TreePackError, ValueError):
    """Malformed graph, tree or JSON artifact"""


# Regularity and decomposition

class PartitionError(TreePackError, ValueError):
    """Cluster count incompatible with the exceptional-set bound"""


class DecompositionError(TreePackError, ValueError):
    """beta out of range, tree too small, or a decomposition that fails its own checks"""


# Assignment

class PreconditionViolated(TreePackError, ValueError):
    """An assignment instance breaks one of the clauses (a), (b), (c)"""

    def __init__(self, clause: str, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.clause = clause


class AssignmentFailed(TreePackError):
    """Greedy placement and the branch-and-bound fallback are both exhausted"""


# Embedder

class EmbedderError(TreePackError):
    """Staged embedder failure; `step` names the pipeline stage"""

    step = 'embed'

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None,
                 step: Optional[str] = None):
        super().__init__(message, details)
        if step is not None:
            self.step = step


class EmbedderPreconditionError(EmbedderError, ValueError):
    step = 'preconditions'


class PartitionFailed(EmbedderError):
    step = 'partition'


class MatchingFailed(EmbedderError):
    step = 'matching'


class SeedBoundExceeded(EmbedderError):
    step = 'decompose'


class PlacementExhausted(EmbedderError):
    step = 'place'


class NoLeafPair(TreePackError, ValueError):
    """No opposite-class leaf pair across two components of a forest"""


# Packer

class GuardViolated(TreePackError, ValueError):
    """Forest-packing hypotheses fail (guard inequality, sizes, degrees)"""


class ZoneOverflow(TreePackError):
    """Hubs of all trees do not fit in the reserved zones"""


class LedgerViolated(TreePackError):
    """Working host minimum degree dropped below the asserted bound"""


class ForestPackingFailed(TreePackError):
    """Engine failure while packing forest number `index`"""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"forest {index} failed to embed: {cause}",
                         {'index': index, 'cause': type(cause).__name__})
        self.index = index
        self.__cause__ = cause
