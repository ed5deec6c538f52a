import logging
import math
from collections import Counter
from collections.abc import Collection, Iterable, Mapping, Sequence
from datetime import datetime, timedelta, timezone
from typing import Optional, Union

import networkx as nx
import numpy as np

from bloc_lang.api.base import BlocApiBase, validate_positive_int, validate_probability
from bloc_lang.api.encoder import encode_dataset
from bloc_lang.api.langmodel import symbol_entropy
from bloc_lang.api.timeline import month_ranges, slice_dataset, time_span
from bloc_lang.api.tokenizer import TermMultiset
from bloc_lang.api.vectorspace import account_terms, cosine, similarity_matrix, vectorize
from bloc_lang.exceptions import InvariantError, ValidationError
from bloc_lang.models.botdetect import Confusion
from bloc_lang.models.coorddetect import (
    BASELINE_METHODS,
    NATIVE_APPS,
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
from bloc_lang.models.language import LanguageConfig
from bloc_lang.models.timeline import AccountTimeline, Dataset, Label
from bloc_lang.models.vectors import TfIdfVector

logger = logging.getLogger(__name__)

SimilarityPair = tuple[str, str, float]
VectorSet = Mapping[str, TfIdfVector]

HASHTAG_GRAM = 5
ACTIVITY_BUCKET_SECONDS = 30 * 60
LOUVAIN_THRESHOLD = 1e-7


def pairwise_similarity(vectors: Union[VectorSet, Sequence[TfIdfVector]]) -> list[SimilarityPair]:
    """
    Cosine similarity of every unordered pair of accounts.

    :param vectors: Vectors over one vocabulary, as a sequence or keyed by account id
    :return: ``(a, b, cosine)`` with ``a < b``, sorted by ``(a, b)``
    :raises VocabularyMismatchError: If the vectors use different vocabularies
    """
    ordered = sorted(vectors.values() if isinstance(vectors, Mapping) else vectors, key=lambda v: v.account_id)
    matrix = similarity_matrix(ordered)
    rows, columns = np.triu_indices(len(ordered), k=1)
    return [
        (ordered[i].account_id, ordered[j].account_id, float(matrix[i, j]))
        for i, j in zip(rows.tolist(), columns.tolist())
    ]


def threshold_network(pairs: Iterable[SimilarityPair], threshold: float = 0.98) -> SimilarityNetwork:
    """
    Keep the pairs whose similarity reaches ``threshold`` and drop isolated accounts.

    :raises ValidationError: If the threshold is outside [0, 1]
    """
    validate_probability("threshold", threshold)
    edges = [
        SimilarityEdge(a=a, b=b, weight=min(1.0, max(0.0, weight)))
        for a, b, weight in pairs
        if a != b and weight >= threshold
    ]
    nodes = sorted({edge.a for edge in edges} | {edge.b for edge in edges})
    logger.debug(f"Similarity network at {threshold}: {len(nodes)} nodes, {len(edges)} edges")
    return SimilarityNetwork(nodes=tuple(nodes), edges=tuple(edges), threshold=threshold)


def _network_graph(network: SimilarityNetwork) -> nx.Graph:
    if len(network) == 0:
        raise ValidationError("Louvain requires a nonempty network")
    graph = network.to_graph()
    if graph.size(weight="weight") <= 0:
        raise ValidationError("Louvain requires a network with positive total edge weight")
    return graph


def _partition(graph: nx.Graph, communities: Iterable[Collection[str]], resolution: float) -> CommunityPartition:
    groups = [sorted(community) for community in communities]
    assigned = [member for group in groups for member in group]
    if len(assigned) != len(set(assigned)) or set(assigned) != set(graph.nodes):
        raise InvariantError("Louvain communities do not partition the network")
    groups.sort(key=lambda members: (-len(members), members[0]))
    quality = nx.community.modularity(graph, groups, weight="weight", resolution=resolution)
    return CommunityPartition(
        communities=[Community(members=tuple(members)) for members in groups],
        modularity=float(quality),
        resolution=resolution,
    )


def louvain(
        network: SimilarityNetwork,
        resolution: float = 1.0,
        seed: int = 0,
        restarts: int = 3,
        threshold: float = LOUVAIN_THRESHOLD,
) -> CommunityPartition:
    """
    Find communities by Louvain modularity maximization.

    Each run alternates local node moves and graph aggregation until the modularity
    gain drops below ``threshold``. Runs use seeds ``seed, seed + 1, ...`` and the
    partition with the highest modularity is kept, the earliest on ties.

    :param network: Weighted similarity network
    :param resolution: Modularity resolution; 1.0 is standard modularity
    :param seed: Seed of the node visiting order
    :param restarts: Number of seeded runs
    :return: Communities ordered by decreasing size, then by first member
    :raises ValidationError: If the network is empty
    """
    validate_positive_int("restarts", restarts)
    graph = _network_graph(network)
    best: Optional[CommunityPartition] = None
    for run in range(restarts):
        communities = nx.community.louvain_communities(
            graph, weight="weight", resolution=resolution, threshold=threshold, seed=seed + run,
        )
        candidate = _partition(graph, communities, resolution)
        logger.debug(f"Louvain run {run}: {len(candidate)} communities, Q={candidate.modularity:.6f}")
        if best is None or candidate.modularity > best.modularity:
            best = candidate
    assert best is not None
    return best


def louvain_levels(
        network: SimilarityNetwork,
        resolution: float = 1.0,
        seed: int = 0,
        threshold: float = LOUVAIN_THRESHOLD,
) -> list[CommunityPartition]:
    """Partitions after each aggregation level of one seeded Louvain run, coarsest last."""
    graph = _network_graph(network)
    return [
        _partition(graph, level, resolution)
        for level in nx.community.louvain_partitions(
            graph, weight="weight", resolution=resolution, threshold=threshold, seed=seed,
        )
    ]


def profile(
        timeline: AccountTimeline,
        doc: BlocDocument,
        native: Union[NativeAppList, Collection[str]] = NATIVE_APPS,
) -> BehavioralProfile:
    """
    Behavioral entropy and automation score of one account.

    Automation is the share of posts published through non-native applications among
    posts whose source is known; it is absent when no post has a known source.
    Entropy is absent for an empty action string.
    """
    known = [post.source_app for post in timeline.posts if post.source_app is not None]
    automation = sum(1 for source in known if source not in native) / len(known) if known else None
    return BehavioralProfile(
        account_id=timeline.account_id,
        entropy=symbol_entropy(doc.action) if doc.action else None,
        automation=automation,
        post_count=len(timeline),
    )


def _hashtag_terms(timeline: AccountTimeline) -> TermMultiset:
    tags = [tag for post in timeline.posts for tag in post.hashtags]
    return Counter(tuple(tags[i:i + HASHTAG_GRAM]) for i in range(len(tags) - HASHTAG_GRAM + 1))


def _activity_terms(timeline: AccountTimeline) -> TermMultiset:
    return Counter((str(post.epoch_seconds // ACTIVITY_BUCKET_SECONDS),) for post in timeline.posts)


def _coretweet_terms(timeline: AccountTimeline) -> TermMultiset:
    return Counter((post.reshared_post_id,) for post in timeline.posts if post.reshared_post_id is not None)


_BASELINE_TERMS = {
    SimilarityMethod.HASHTAG5: _hashtag_terms,
    SimilarityMethod.ACTIVITY: _activity_terms,
    SimilarityMethod.CORETWEET: _coretweet_terms,
}


def baseline_terms(dataset: Dataset, method: Union[SimilarityMethod, str]) -> dict[str, TermMultiset]:
    """
    Term multisets of a baseline similarity method.

    * ``hashtag5``: 5-grams over the account's chronological hashtag sequence
    * ``activity``: epoch-aligned 30-minute buckets the account posted in
    * ``coretweet``: ids of the posts the account reshared

    :raises ValidationError: For an unknown or non-baseline method
    """
    try:
        resolved = SimilarityMethod(method)
    except ValueError as exc:
        raise ValidationError(f"Unknown similarity method {method!r}") from exc
    if resolved not in _BASELINE_TERMS:
        valid = ", ".join(m.value for m in BASELINE_METHODS)
        raise ValidationError(f"'{resolved.value}' is not a baseline method. Must be one of: {valid}")
    extract = _BASELINE_TERMS[resolved]
    return {timeline.account_id: extract(timeline) for timeline in dataset.iter_timelines()}


def baseline_vectors(dataset: Dataset, method: Union[SimilarityMethod, str]) -> dict[str, TfIdfVector]:
    """TF-IDF vectors of a baseline method over a vocabulary fit on the whole dataset."""
    return vectorize(baseline_terms(dataset, method))


def bloc_vectors(dataset: Dataset, cfg: Optional[LanguageConfig] = None) -> dict[str, TfIdfVector]:
    """TF-IDF vectors of BLOC words; defaults to the behavioral clustering language."""
    return vectorize(account_terms(dataset, cfg or LanguageConfig.behavioral_clusters()))


def method_vectors(
        dataset: Dataset,
        method: Union[SimilarityMethod, str],
        cfg: Optional[LanguageConfig] = None,
) -> dict[SimilarityMethod, dict[str, TfIdfVector]]:
    """Vector sets a method compares: one set, or all four for ``combined``."""
    resolved = _resolve_method(method)
    if resolved is SimilarityMethod.BLOC:
        return {resolved: bloc_vectors(dataset, cfg)}
    if resolved is SimilarityMethod.COMBINED:
        sets = {SimilarityMethod.BLOC: bloc_vectors(dataset, cfg)}
        sets.update({baseline: baseline_vectors(dataset, baseline) for baseline in BASELINE_METHODS})
        return sets
    return {resolved: baseline_vectors(dataset, resolved)}


def combined_similarity(a: str, b: str, vector_sets: Mapping[SimilarityMethod, VectorSet]) -> float:
    """
    Maximum cosine similarity of two accounts across several vector sets.

    A set in which either account has no vector contributes 0.
    """
    best = 0.0
    for vectors in vector_sets.values():
        if a in vectors and b in vectors:
            best = max(best, cosine(vectors[a], vectors[b]))
    return best


def _similarity(vector_sets: Mapping[SimilarityMethod, VectorSet], account_ids: Sequence[str]) -> np.ndarray:
    combined = np.zeros((len(account_ids), len(account_ids)))
    for vectors in vector_sets.values():
        combined = np.maximum(combined, similarity_matrix([vectors[account] for account in account_ids]))
    return combined


def _resolve_method(method: Union[SimilarityMethod, str]) -> SimilarityMethod:
    try:
        return SimilarityMethod(method)
    except ValueError as exc:
        valid = ", ".join(m.value for m in SimilarityMethod)
        raise ValidationError(f"Unknown similarity method {method!r}. Must be one of: {valid}") from exc


def _driver_labels(dataset: Dataset) -> dict[str, Label]:
    labels = {
        account: label for account, label in sorted((dataset.labels or {}).items())
        if label in (Label.DRIVER, Label.CONTROL)
    }
    drivers = sum(1 for label in labels.values() if label is Label.DRIVER)
    if drivers == 0 or drivers == len(labels):
        raise ValidationError("Driver detection needs both driver and control accounts")
    return labels


def knn_driver_eval(
        dataset: Dataset,
        method: Union[SimilarityMethod, str] = SimilarityMethod.BLOC,
        k_range: Iterable[int] = range(1, 11),
        cfg: Optional[LanguageConfig] = None,
) -> KnnReport:
    """
    Leave-one-out k-nearest-neighbor driver detection.

    Every labeled account is classified by the majority label of its ``k`` most
    similar other labeled accounts. Neighbors with equal similarity keep sorted
    account order, and a tied vote goes to control. Drivers are the positive class.

    :param dataset: Dataset with driver/control labels
    :param method: Similarity method
    :param k_range: Neighborhood sizes; sizes above ``n - 1`` are skipped with a warning
    :param cfg: Language parameters for BLOC vectors
    :raises ValidationError: If a class is missing or the method is unknown
    """
    resolved = _resolve_method(method)
    labels = _driver_labels(dataset)
    labeled = slice_dataset(dataset, accounts=labels)
    account_ids = [account for account in labels if account in labeled]
    labels = {account: labels[account] for account in account_ids}
    truth = np.array([labels[account] is Label.DRIVER for account in account_ids])

    similarity = _similarity(method_vectors(labeled, resolved, cfg), account_ids)
    np.fill_diagonal(similarity, -np.inf)
    # Row i lists the other accounts from most to least similar; the account itself sorts last.
    neighbors = np.argsort(-similarity, axis=1, kind="stable")[:, :-1]

    per_k: list[KnnPoint] = []
    for k in k_range:
        validate_positive_int("k", k)
        if k > len(account_ids) - 1:
            logger.warning(f"Skipping k={k}: only {len(account_ids)} labeled accounts")
            continue
        votes = truth[neighbors[:, :k]].sum(axis=1)
        predicted = votes * 2 > k
        confusion = Confusion(
            tp=int((predicted & truth).sum()),
            fp=int((predicted & ~truth).sum()),
            fn=int((~predicted & truth).sum()),
            tn=int((~predicted & ~truth).sum()),
        )
        per_k.append(KnnPoint(k=k, precision=confusion.precision, recall=confusion.recall, f1=confusion.f1))

    report = KnnReport(
        method=resolved,
        drivers=int(truth.sum()),
        controls=int((~truth).sum()),
        per_k=per_k,
    )
    logger.info(f"KNN driver detection with {resolved.value}: best f1={report.best_f1:.3f}")
    return report


def windowed_eval(
        dataset: Dataset,
        method: Union[SimilarityMethod, str] = SimilarityMethod.BLOC,
        window_weeks: int = 2,
        max_windows: Optional[int] = None,
        k_range: Iterable[int] = range(1, 11),
        cfg: Optional[LanguageConfig] = None,
) -> list[WindowPoint]:
    """
    Driver detection on cumulative prefixes of the data.

    Prefixes start at the earliest driver post and grow by ``window_weeks`` weeks;
    the last prefix runs to the latest post. Vectors are rebuilt from the posts
    inside each prefix, and only accounts active in it are classified. Prefixes
    lacking drivers or controls are skipped with a warning.

    :param max_windows: Stop after this many prefixes
    :raises ValidationError: If there are no drivers or the data spans less than one window
    """
    validate_positive_int("window_weeks", window_weeks)
    if max_windows is not None:
        validate_positive_int("max_windows", max_windows)
    resolved = _resolve_method(method)
    labels = _driver_labels(dataset)
    starts = [
        dataset.timelines[account].first_timestamp for account, label in labels.items()
        if label is Label.DRIVER and dataset.timelines[account].first_timestamp is not None
    ]
    span = time_span(dataset)
    if not starts or span is None:
        raise ValidationError("Windowed evaluation needs driver posts")
    start, end = min(starts), span[1]
    window = timedelta(weeks=window_weeks)
    if end - start < window:
        raise ValidationError(f"Data spans {end - start}, less than one {window_weeks}-week window")

    windows = math.ceil((end - start) / window)
    if max_windows is not None:
        windows = min(windows, max_windows)
    k_values = list(k_range)

    series: list[WindowPoint] = []
    for index in range(1, windows + 1):
        cutoff = start + index * window
        prefix = slice_dataset(dataset, start=start, end=cutoff if cutoff < end else None)
        active = (prefix.labels or {}).values()
        drivers = sum(1 for label in active if label is Label.DRIVER)
        controls = sum(1 for label in active if label is Label.CONTROL)
        weeks = index * window_weeks
        if drivers == 0 or controls == 0:
            logger.warning(f"Skipping week {weeks}: {drivers} active drivers, {controls} active controls")
            continue
        report = knn_driver_eval(prefix, resolved, k_values, cfg)
        series.append(WindowPoint(weeks=weeks, drivers=drivers, controls=controls, report=report))
    return series


def f1_at_week(series: Sequence[WindowPoint], weeks: int) -> Optional[float]:
    """Best F1 of the latest evaluated prefix ending at or before ``weeks``."""
    eligible = [point for point in series if point.weeks <= weeks]
    return max(eligible, key=lambda point: point.weeks).f1 if eligible else None


def most_active_accounts(
        dataset: Dataset,
        limit: int = 1000,
        totals: Optional[Mapping[str, int]] = None,
) -> list[str]:
    """
    Accounts ranked by the number of distinct UTC days they posted on.

    Ties are broken by total posts, then by account id.

    :param totals: Post counts over the full collection period, used for the tie-break
        when ``dataset`` is a time slice; defaults to the counts within ``dataset``
    """
    validate_positive_int("limit", limit)

    def activity(timeline: AccountTimeline) -> tuple[int, int, str]:
        days = {post.timestamp.astimezone(timezone.utc).date() for post in timeline.posts}
        posts = len(timeline) if totals is None else totals.get(timeline.account_id, len(timeline))
        return -len(days), -posts, timeline.account_id

    ranked = sorted((t for t in dataset.iter_timelines() if len(t)), key=activity)
    return [timeline.account_id for timeline in ranked[:limit]]


def _mean(values: Iterable[Optional[float]]) -> Optional[float]:
    known = [value for value in values if value is not None]
    return sum(known) / len(known) if known else None


def _annotate(partition: CommunityPartition, profiles: Mapping[str, BehavioralProfile]) -> CommunityPartition:
    communities = [
        community.model_copy(update={
            "mean_entropy": _mean(profiles[member].entropy for member in community.members),
            "mean_automation": _mean(profiles[member].automation for member in community.members),
        })
        for community in partition
    ]
    return partition.model_copy(update={"communities": communities})


def behavioral_clusters(
        dataset: Dataset,
        cfg: Optional[LanguageConfig] = None,
        threshold: float = 0.98,
        resolution: float = 1.0,
        top_accounts: Optional[int] = 1000,
        native: Collection[str] = NATIVE_APPS,
        seed: int = 0,
        restarts: int = 3,
        monthly: bool = False,
) -> list[ClusterReport]:
    """
    Group accounts with near-identical behavior.

    The most active accounts are vectorized, linked when their cosine similarity
    reaches ``threshold`` and partitioned with Louvain; every community reports the
    mean entropy and automation of its members.

    :param monthly: Run once per calendar month instead of once over the whole dataset
    :return: One report per time range; ranges without a network have no partition
    """
    language = cfg or LanguageConfig.behavioral_clusters()
    ranges: list[tuple[Optional[datetime], Optional[datetime]]]
    ranges = list(month_ranges(dataset)) if monthly else [(None, None)]

    totals = {timeline.account_id: len(timeline) for timeline in dataset.iter_timelines()}
    reports: list[ClusterReport] = []
    for start, end in ranges:
        sliced = slice_dataset(dataset, start=start, end=end)
        if top_accounts is not None:
            sliced = slice_dataset(sliced, accounts=most_active_accounts(sliced, top_accounts, totals))

        network = SimilarityNetwork(threshold=threshold)
        partition = None
        if len(sliced) >= 2:
            network = threshold_network(pairwise_similarity(bloc_vectors(sliced, language)), threshold)
        if any(edge.weight > 0 for edge in network.edges):
            documents = encode_dataset(sliced, language)
            profiles = {
                account: profile(sliced.timelines[account], documents[account], native) for account in network.nodes
            }
            partition = _annotate(louvain(network, resolution, seed, restarts), profiles)

        reports.append(ClusterReport(
            start=start,
            end=end,
            accounts=len(sliced),
            threshold=threshold,
            network=network,
            partition=partition,
        ))
        logger.info(f"Clustered {len(sliced)} accounts: {len(network.edges)} edges, "
                    f"{len(partition) if partition is not None else 0} communities")
    return reports


class Coordination(BlocApiBase):
    """
    Coordination API: behavioral clusters and driver detection.

    Accessed via ``client.coordination``. Language parameters default to the
    behavioral clustering preset when the run configuration sets none.
    """

    def clusters(self, dataset: Dataset, monthly: bool = False) -> list[ClusterReport]:
        settings = self.config.coordination
        return behavioral_clusters(
            dataset,
            cfg=self.language(LanguageConfig.behavioral_clusters()),
            threshold=settings.threshold,
            resolution=settings.resolution,
            top_accounts=settings.top_accounts,
            native=settings.native_apps,
            seed=self.config.seed,
            restarts=settings.louvain_restarts,
            monthly=monthly,
        )

    def evaluate(self, dataset: Dataset, method: Optional[Union[SimilarityMethod, str]] = None) -> KnnReport:
        settings = self.config.coordination
        return knn_driver_eval(
            dataset,
            method=method or settings.method,
            k_range=range(1, settings.k_max + 1),
            cfg=self.language(LanguageConfig.behavioral_clusters()),
        )

    def windows(self, dataset: Dataset, method: Optional[Union[SimilarityMethod, str]] = None) -> list[WindowPoint]:
        settings = self.config.coordination
        return windowed_eval(
            dataset,
            method=method or settings.method,
            window_weeks=settings.window_weeks,
            max_windows=settings.max_windows,
            k_range=range(1, settings.k_max + 1),
            cfg=self.language(LanguageConfig.behavioral_clusters()),
        )
