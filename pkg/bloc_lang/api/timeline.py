import csv
import json
import logging
from collections.abc import Iterable, Iterator
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import ValidationError as PydanticValidationError

from bloc_lang.api.base import BlocApiBase, validate_non_empty_string
from bloc_lang.exceptions import DataError, ValidationError
from bloc_lang.models.alphabet import Relation
from bloc_lang.models.timeline import AccountTimeline, Dataset, Label, Post, SocialGraphContext

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Error entries reported in a DataError message; the full list is in ``details``.
_REPORTED_ERRORS = 5


def resolve_relation(actor: str, target: Optional[str], graph: SocialGraphContext) -> Relation:
    """
    Classify the account an actor interacts with.

    :param actor: Acting account id
    :param target: Account being replied to, reshared, mentioned or quoted
    :param graph: Outgoing follow sets
    :return: ``self`` when target is the actor, ``friend`` when the actor follows the
        target, ``non_friend`` otherwise (including an absent target or graph entry)
    """
    if target is not None and target == actor:
        return Relation.SELF
    if target is not None and target in graph.friends(actor):
        return Relation.FRIEND
    return Relation.NON_FRIEND


def build_dataset(
        posts: Iterable[Post],
        graph: Optional[SocialGraphContext] = None,
        labels: Optional[dict[str, Label]] = None,
) -> Dataset:
    """
    Group posts into sorted, deduplicated account timelines.

    Duplicate post ids within an account keep their first occurrence. Posts with
    equal timestamps keep their input order.

    :raises DataError: If a label references an account without posts
    """
    by_account: dict[str, list[Post]] = {}
    seen: dict[str, set[str]] = {}
    for post in posts:
        account_seen = seen.setdefault(post.author_id, set())
        if post.post_id in account_seen:
            logger.warning(f"Duplicate post_id {post.post_id} for account {post.author_id}; keeping first occurrence")
            continue
        account_seen.add(post.post_id)
        by_account.setdefault(post.author_id, []).append(post)

    timelines = {
        account_id: AccountTimeline(
            account_id=account_id,
            posts=tuple(sorted(account_posts, key=lambda post: post.timestamp)),
        )
        for account_id, account_posts in sorted(by_account.items())
    }

    if labels:
        unknown = sorted(set(labels) - set(timelines))
        if unknown:
            raise DataError(
                f"label references unknown account: {', '.join(unknown[:_REPORTED_ERRORS])}",
                details={"unknown_accounts": unknown},
            )

    return Dataset(timelines=timelines, graph=graph or SocialGraphContext(), labels=labels)


def read_posts(path: PathLike) -> list[Post]:
    """
    Parse a JSON Lines post file.

    :param path: File with one post object per line; blank lines are ignored
    :return: Posts in file order
    :raises DataError: If the file is unreadable or any line violates the schema; the
        error details list every offending line number
    """
    file_path = Path(path)
    posts: list[Post] = []
    errors: list[dict[str, Any]] = []

    try:
        with file_path.open(encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    errors.append({"line": line_number, "error": f"malformed JSON: {exc.msg}"})
                    continue
                try:
                    posts.append(Post.model_validate(record))
                except PydanticValidationError as exc:
                    errors.append({"line": line_number, "error": _summarize(exc)})
    except UnicodeDecodeError as exc:
        raise DataError(
            f"Post file {file_path} is not valid UTF-8: {exc.reason} at byte {exc.start}",
            details={"path": str(file_path)},
        ) from exc
    except OSError as exc:
        raise DataError(f"Cannot read post file {file_path}: {exc}", details={"path": str(file_path)}) from exc

    if errors:
        shown = "; ".join(f"line {entry['line']}: {entry['error']}" for entry in errors[:_REPORTED_ERRORS])
        raise DataError(f"{len(errors)} invalid record(s) in {file_path}: {shown}", details={"errors": errors})

    logger.debug(f"Read {len(posts)} posts from {file_path}")
    return posts


def load_graph(path: PathLike) -> SocialGraphContext:
    """
    Load a friend graph: a JSON object mapping account id to the accounts it follows.

    :raises DataError: If the file is unreadable or not of that shape
    """
    file_path = Path(path)
    try:
        payload = json.loads(file_path.read_text(encoding="utf-8"))
    except UnicodeDecodeError as exc:
        raise DataError(
            f"Graph file {file_path} is not valid UTF-8: {exc.reason} at byte {exc.start}",
            details={"path": str(file_path)},
        ) from exc
    except OSError as exc:
        raise DataError(f"Cannot read graph file {file_path}: {exc}", details={"path": str(file_path)}) from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"Malformed graph file {file_path}: {exc.msg} (line {exc.lineno})") from exc

    if not isinstance(payload, dict) or not all(
        isinstance(friends, list) and all(isinstance(friend, str) for friend in friends)
        for friends in payload.values()
    ):
        raise DataError(f"Graph file {file_path} must map account ids to lists of account ids")

    return SocialGraphContext(friends_of={account: frozenset(friends) for account, friends in payload.items()})


def load_labels(path: PathLike) -> dict[str, Label]:
    """
    Load ``account_id,label`` rows; a header row is optional.

    :raises DataError: If the file is unreadable or a row is malformed
    """
    file_path = Path(path)
    labels: dict[str, Label] = {}
    valid = ", ".join(label.value for label in Label)
    try:
        with file_path.open(encoding="utf-8", newline="") as handle:
            for line_number, row in enumerate(csv.reader(handle), start=1):
                if not row or not "".join(row).strip():
                    continue
                if line_number == 1 and [cell.strip() for cell in row] == ["account_id", "label"]:
                    continue
                if len(row) != 2:
                    raise DataError(f"{file_path} line {line_number}: expected 'account_id,label'")
                account_id, raw_label = (cell.strip() for cell in row)
                try:
                    labels[account_id] = Label(raw_label.lower())
                except ValueError as exc:
                    raise DataError(
                        f"{file_path} line {line_number}: unknown label '{raw_label}'. Must be one of: {valid}"
                    ) from exc
    except UnicodeDecodeError as exc:
        raise DataError(
            f"Labels file {file_path} is not valid UTF-8: {exc.reason} at byte {exc.start}",
            details={"path": str(file_path)},
        ) from exc
    except csv.Error as exc:
        raise DataError(f"Malformed labels file {file_path}: {exc}", details={"path": str(file_path)}) from exc
    except OSError as exc:
        raise DataError(f"Cannot read labels file {file_path}: {exc}", details={"path": str(file_path)}) from exc
    return labels


def load_dataset(
        path: PathLike,
        graph_path: Optional[PathLike] = None,
        labels_path: Optional[PathLike] = None,
) -> Dataset:
    """
    Load posts, an optional friend graph and optional labels into a Dataset.

    :param path: JSON Lines post file
    :param graph_path: Optional JSON friend graph
    :param labels_path: Optional CSV of account labels
    :return: Dataset with sorted, deduplicated timelines
    :raises DataError: For unreadable files, malformed lines, or labels of unknown accounts
    """
    posts = read_posts(path)
    graph = load_graph(graph_path) if graph_path is not None else None
    labels = load_labels(labels_path) if labels_path is not None else None
    dataset = build_dataset(posts, graph=graph, labels=labels)
    logger.info(f"Loaded {len(posts)} posts for {len(dataset)} accounts from {path}")
    return dataset


def slice_dataset(
        dataset: Dataset,
        start: Optional[datetime] = None,
        end: Optional[datetime] = None,
        accounts: Optional[Iterable[str]] = None,
) -> Dataset:
    """
    Restrict a dataset to posts in ``[start, end)`` and, optionally, to some accounts.

    Accounts left without posts are dropped, together with their labels.
    """
    keep = set(accounts) if accounts is not None else None
    timelines: dict[str, AccountTimeline] = {}
    for timeline in dataset.iter_timelines():
        if keep is not None and timeline.account_id not in keep:
            continue
        posts = tuple(
            post for post in timeline.posts
            if (start is None or post.timestamp >= start) and (end is None or post.timestamp < end)
        )
        if posts:
            timelines[timeline.account_id] = AccountTimeline(account_id=timeline.account_id, posts=posts)

    labels = None
    if dataset.labels is not None:
        labels = {account: label for account, label in dataset.labels.items() if account in timelines}
    return Dataset(timelines=timelines, graph=dataset.graph, labels=labels)


def time_span(dataset: Dataset) -> Optional[tuple[datetime, datetime]]:
    """Earliest and latest post timestamps, or None for a dataset without posts."""
    firsts = [t.first_timestamp for t in dataset.timelines.values() if t.first_timestamp is not None]
    lasts = [t.last_timestamp for t in dataset.timelines.values() if t.last_timestamp is not None]
    if not firsts:
        return None
    return min(firsts), max(lasts)


def month_ranges(dataset: Dataset) -> Iterator[tuple[datetime, datetime]]:
    """Yield ``[start, end)`` calendar-month ranges (UTC) covering every post."""
    span = time_span(dataset)
    if span is None:
        return
    first, last = (moment.astimezone(timezone.utc) for moment in span)
    start = datetime(first.year, first.month, 1, tzinfo=timezone.utc)
    while start <= last:
        end = datetime(start.year + 1, 1, 1, tzinfo=timezone.utc) if start.month == 12 else \
            datetime(start.year, start.month + 1, 1, tzinfo=timezone.utc)
        yield start, end
        start = end


def _summarize(exc: PydanticValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error.get("loc", ())) or "record"
        parts.append(f"{location}: {error.get('msg', 'invalid')}")
    return "; ".join(parts)


class Timeline(BlocApiBase):
    """
    Timeline API: loading datasets and resolving account relations.

    Accessed via ``client.timeline``.
    """

    def load(
            self,
            path: Optional[PathLike] = None,
            graph_path: Optional[PathLike] = None,
            labels_path: Optional[PathLike] = None,
    ) -> Dataset:
        """
        Load a dataset, falling back to the paths of the run configuration.

        :raises ValidationError: If no post file is given or configured
        :raises DataError: For invalid input files
        """
        paths = self.config.paths
        data = path if path is not None else paths.data
        if data is None:
            raise ValidationError("No post file given; pass a path or set 'data' in the configuration")
        return load_dataset(
            data,
            graph_path=graph_path if graph_path is not None else paths.graph,
            labels_path=labels_path if labels_path is not None else paths.labels,
        )

    @staticmethod
    def relation(actor: str, target: Optional[str], graph: SocialGraphContext) -> Relation:
        """
        Classify the account ``actor`` interacts with.

        :raises ValidationError: If ``actor`` is empty
        """
        validate_non_empty_string("actor", actor)
        return resolve_relation(actor, target, graph)
