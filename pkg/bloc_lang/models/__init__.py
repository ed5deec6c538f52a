"""
Data models for the BLOC toolkit.

This package contains Pydantic models for every data structure used by the
toolkit: posts and timelines, language parameters, BLOC documents, vectors,
Markov models, bot detection and coordination detection reports.
"""

from bloc_lang.models.botdetect import (
    Confusion,
    EvalReport,
    FeatureMatrix,
    FoldReport,
    Prediction,
    TreeEnsembleModel,
)
from bloc_lang.models.config import ClassifierConfig, CoordinationConfig, PathsConfig, RunConfig
from bloc_lang.models.coorddetect import (
    BehavioralProfile,
    ClusterReport,
    Community,
    CommunityPartition,
    KnnPoint,
    KnnReport,
    NativeAppList,
    SimilarityEdge,
    SimilarityMethod,
    SimilarityNetwork,
    WindowPoint,
)
from bloc_lang.models.document import BlocDocument
from bloc_lang.models.langmodel import TransitionModel
from bloc_lang.models.language import LanguageConfig, PauseFunction, Tokenization, TokenizationMethod
from bloc_lang.models.timeline import AccountTimeline, ActionKind, Dataset, Label, Post, SocialGraphContext
from bloc_lang.models.vectors import TfIdfVector, Vocabulary

__all__ = [
    # Timeline models
    "AccountTimeline",
    "ActionKind",
    "Dataset",
    "Label",
    "Post",
    "SocialGraphContext",
    # Language models
    "BlocDocument",
    "LanguageConfig",
    "PauseFunction",
    "Tokenization",
    "TokenizationMethod",
    "TransitionModel",
    # Vector models
    "TfIdfVector",
    "Vocabulary",
    # Bot detection
    "Confusion",
    "EvalReport",
    "FeatureMatrix",
    "FoldReport",
    "Prediction",
    "TreeEnsembleModel",
    # Coordination detection
    "BehavioralProfile",
    "ClusterReport",
    "Community",
    "CommunityPartition",
    "KnnPoint",
    "KnnReport",
    "NativeAppList",
    "SimilarityEdge",
    "SimilarityMethod",
    "SimilarityNetwork",
    "WindowPoint",
    # Configuration
    "ClassifierConfig",
    "CoordinationConfig",
    "PathsConfig",
    "RunConfig",
]
