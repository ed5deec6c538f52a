"""
Coordination detection models: similarity networks, communities, profiles and KNN reports.
"""

from collections.abc import Iterator
from datetime import datetime
from enum import Enum
from typing import Optional

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, RootModel, field_validator, model_validator

NATIVE_APPS: frozenset[str] = frozenset({
    "TweetDeck",
    "Twitter for Advertisers",
    "Twitter for Advertisers (legacy)",
    "Twitter for Android",
    "Twitter for iPad",
    "Twitter for iPhone",
    "Twitter for Mac",
    "Twitter Media Studio",
    "Twitter Web App",
    "Twitter Web Client",
})


class SimilarityMethod(str, Enum):
    BLOC = "bloc"
    HASHTAG5 = "hashtag5"
    ACTIVITY = "activity"
    CORETWEET = "coretweet"
    COMBINED = "combined"


BASELINE_METHODS: tuple[SimilarityMethod, ...] = (
    SimilarityMethod.HASHTAG5, SimilarityMethod.ACTIVITY, SimilarityMethod.CORETWEET,
)


class NativeAppList(RootModel[frozenset[str]]):
    """Client applications treated as manually operated."""

    root: frozenset[str] = NATIVE_APPS

    def __contains__(self, item: object) -> bool:
        return item in self.root

    def __iter__(self) -> Iterator[str]:  # type: ignore[override]
        return iter(sorted(self.root))

    def __len__(self) -> int:
        return len(self.root)


class SimilarityEdge(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: str
    b: str
    weight: float = Field(ge=0.0, le=1.0)


class SimilarityNetwork(BaseModel):
    """Undirected account network whose edges meet the similarity threshold; no singletons."""

    model_config = ConfigDict(frozen=True)

    nodes: tuple[str, ...] = ()
    edges: tuple[SimilarityEdge, ...] = ()
    threshold: float = Field(default=0.98, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check_edges(self) -> "SimilarityNetwork":
        node_set = set(self.nodes)
        touched: set[str] = set()
        for edge in self.edges:
            if edge.a == edge.b:
                raise ValueError(f"self-loop on {edge.a}")
            if edge.weight < self.threshold:
                raise ValueError(f"edge {edge.a}-{edge.b} below threshold {self.threshold}")
            if edge.a not in node_set or edge.b not in node_set:
                raise ValueError(f"edge {edge.a}-{edge.b} references an unknown node")
            touched.update((edge.a, edge.b))
        if touched != node_set:
            raise ValueError("network contains singleton nodes")
        return self

    def __len__(self) -> int:
        return len(self.nodes)

    def to_graph(self) -> nx.Graph:
        """Build a weighted networkx graph with nodes inserted in sorted order."""
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_weighted_edges_from((edge.a, edge.b, edge.weight) for edge in self.edges)
        return graph


class Community(BaseModel):
    members: tuple[str, ...]
    mean_entropy: Optional[float] = None
    mean_automation: Optional[float] = None

    @field_validator("members")
    @classmethod
    def _nonempty(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        if not value:
            raise ValueError("a community needs at least one member")
        return tuple(sorted(value))

    def __len__(self) -> int:
        return len(self.members)


class CommunityPartition(BaseModel):
    """Louvain communities of a network together with their modularity."""

    communities: list[Community]
    modularity: float
    resolution: float = 1.0

    def __iter__(self) -> Iterator[Community]:  # type: ignore[override]
        return iter(self.communities)

    def __len__(self) -> int:
        return len(self.communities)

    def __getitem__(self, index: int) -> Community:
        return self.communities[index]

    def membership(self) -> dict[str, int]:
        """Map each account to the index of its community."""
        return {member: index for index, community in enumerate(self.communities) for member in community.members}


class BehavioralProfile(BaseModel):
    account_id: str
    entropy: Optional[float] = None
    automation: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    post_count: int = Field(ge=0)


class ClusterReport(BaseModel):
    """Behavioral clusters for one time range."""

    start: Optional[datetime] = None
    end: Optional[datetime] = None
    accounts: int
    threshold: float
    network: SimilarityNetwork
    partition: Optional[CommunityPartition] = None


class KnnPoint(BaseModel):
    k: int
    precision: float
    recall: float
    f1: float


class KnnReport(BaseModel):
    """Leave-one-out KNN driver detection over k values."""

    method: SimilarityMethod
    drivers: int
    controls: int
    per_k: list[KnnPoint]

    @property
    def best(self) -> Optional[KnnPoint]:
        """Point with the highest F1, the smallest k on ties."""
        if not self.per_k:
            return None
        return max(self.per_k, key=lambda point: (point.f1, -point.k))

    @property
    def best_f1(self) -> float:
        best = self.best
        return best.f1 if best else 0.0


class WindowPoint(BaseModel):
    weeks: int
    drivers: int
    controls: int
    report: KnnReport

    @property
    def f1(self) -> float:
        return self.report.best_f1
