"""
Timeline models: posts, account timelines, the social graph context and datasets.
"""

from collections.abc import Iterator
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, field_validator, model_validator


class ActionKind(str, Enum):
    ORIGINAL = "original"
    REPLY = "reply"
    RESHARE = "reshare"


class Label(str, Enum):
    BOT = "bot"
    HUMAN = "human"
    DRIVER = "driver"
    CONTROL = "control"


class Post(BaseModel):
    """
    A single social media message.

    Field aliases follow the JSON Lines post schema (``id``, ``created_at``, ``kind``);
    the Python names may be used as well.
    """

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    post_id: str = Field(alias="id", min_length=1)
    author_id: str = Field(min_length=1)
    timestamp: datetime = Field(alias="created_at")
    action_kind: ActionKind = Field(alias="kind")
    target_author_id: Optional[str] = None
    mentions: tuple[str, ...] = ()
    hashtags: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()
    media_count: NonNegativeInt = 0
    has_text: bool = False
    quoted_author_id: Optional[str] = None
    reshared_post_id: Optional[str] = None
    source_app: Optional[str] = None

    @field_validator("timestamp")
    @classmethod
    def _assume_utc(cls, value: datetime) -> datetime:
        # Naive timestamps are read as UTC; second resolution.
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return value.replace(microsecond=0)

    @field_validator("hashtags")
    @classmethod
    def _normalize_hashtags(cls, value: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(tag.lstrip("#").lower() for tag in value)

    @model_validator(mode="after")
    def _require_target(self) -> "Post":
        if self.action_kind is not ActionKind.ORIGINAL and not self.target_author_id:
            raise ValueError(f"{self.action_kind.value} post {self.post_id} requires target_author_id")
        return self

    @property
    def epoch_seconds(self) -> int:
        return int(self.timestamp.timestamp())


class SocialGraphContext(BaseModel):
    """Outgoing follow sets: ``friends_of[a]`` holds the accounts ``a`` follows."""

    model_config = ConfigDict(frozen=True)

    friends_of: dict[str, frozenset[str]] = Field(default_factory=dict)

    def friends(self, account_id: str) -> frozenset[str]:
        """Return the friend set of an account, empty when the account is absent."""
        return self.friends_of.get(account_id, frozenset())


class AccountTimeline(BaseModel):
    """Posts of one account, ascending by timestamp, with unique post ids."""

    model_config = ConfigDict(frozen=True)

    account_id: str = Field(min_length=1)
    posts: tuple[Post, ...] = ()

    @model_validator(mode="after")
    def _check_order(self) -> "AccountTimeline":
        seen: set[str] = set()
        previous: Optional[datetime] = None
        for post in self.posts:
            if post.post_id in seen:
                raise ValueError(f"duplicate post_id {post.post_id} in timeline of {self.account_id}")
            seen.add(post.post_id)
            if previous is not None and post.timestamp < previous:
                raise ValueError(f"timeline of {self.account_id} is not sorted by timestamp")
            previous = post.timestamp
        return self

    def __len__(self) -> int:
        return len(self.posts)

    @property
    def first_timestamp(self) -> Optional[datetime]:
        return self.posts[0].timestamp if self.posts else None

    @property
    def last_timestamp(self) -> Optional[datetime]:
        return self.posts[-1].timestamp if self.posts else None


class Dataset(BaseModel):
    """Account timelines keyed by account id, plus the graph context and optional labels."""

    model_config = ConfigDict(frozen=True)

    timelines: dict[str, AccountTimeline] = Field(default_factory=dict)
    graph: SocialGraphContext = Field(default_factory=SocialGraphContext)
    labels: Optional[dict[str, Label]] = None

    @model_validator(mode="before")
    @classmethod
    def _index_timelines(cls, data: Any) -> Any:
        # Accept a list of timelines as well as a mapping.
        if isinstance(data, dict) and isinstance(data.get("timelines"), (list, tuple)):
            data = dict(data)
            data["timelines"] = {
                (timeline.account_id if isinstance(timeline, AccountTimeline) else timeline["account_id"]): timeline
                for timeline in data["timelines"]
            }
        return data

    @model_validator(mode="after")
    def _check_labels(self) -> "Dataset":
        if self.labels:
            unknown = sorted(set(self.labels) - set(self.timelines))
            if unknown:
                raise ValueError(f"label references unknown account: {', '.join(unknown)}")
        return self

    def __len__(self) -> int:
        return len(self.timelines)

    def iter_timelines(self) -> Iterator[AccountTimeline]:
        """Iterate timelines in sorted account order."""
        return iter(self.timelines[account_id] for account_id in self.account_ids())

    def __contains__(self, item: object) -> bool:
        return item in self.timelines

    def account_ids(self) -> list[str]:
        """Return account ids in sorted order."""
        return sorted(self.timelines)

    def labeled_account_ids(self) -> list[str]:
        """Return the sorted ids of labeled accounts."""
        return sorted(self.labels) if self.labels else []

    def label_of(self, account_id: str) -> Optional[Label]:
        return self.labels.get(account_id) if self.labels else None
