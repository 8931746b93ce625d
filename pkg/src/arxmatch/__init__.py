"""arxmatch: preprint-to-published record linkage.

Two-step matching (DOI join, then candidate retrieval + random-forest
classification over title/author/abstract similarity vectors) with an
editorial scope filter, merge-on-publication semantics, and deterministic
author-profile assignment.
"""

from ._kernels import BACKEND
from .corpus import CorpusStore, MatchDecision, PreprintRecord, PublishedRecord
from .similarity import FeatureVector, feature_vector, lex_compare

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CorpusStore",
    "FeatureVector",
    "MatchDecision",
    "PreprintRecord",
    "PublishedRecord",
    "__version__",
    "feature_vector",
    "lex_compare",
]
