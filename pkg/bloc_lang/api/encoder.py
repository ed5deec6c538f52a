import logging
from datetime import timedelta
from typing import Optional, Union

from bloc_lang.api.base import BlocApiBase
from bloc_lang.api.timeline import resolve_relation
from bloc_lang.exceptions import ValidationError
from bloc_lang.models import alphabet
from bloc_lang.models.alphabet import Relation, Word
from bloc_lang.models.document import BlocDocument
from bloc_lang.models.language import LanguageConfig, PauseFunction
from bloc_lang.models.timeline import AccountTimeline, ActionKind, Dataset, Post, SocialGraphContext

logger = logging.getLogger(__name__)

HOUR = 3600
DAY = 24 * HOUR
WEEK = 7 * DAY
MONTH = 30 * DAY
YEAR = 365 * DAY

# Upper bounds (exclusive) of the f2 pause symbols.
_LOG_PAUSE_BOUNDS: tuple[tuple[int, str], ...] = (
    (HOUR, alphabet.PAUSE_HOUR),
    (DAY, alphabet.PAUSE_DAY),
    (WEEK, alphabet.PAUSE_WEEK),
    (MONTH, alphabet.PAUSE_MONTH),
    (YEAR, alphabet.PAUSE_YEAR),
)

_REPLY_SYMBOLS = {
    Relation.SELF: alphabet.REPLY_SELF,
    Relation.FRIEND: alphabet.REPLY_FRIEND,
    Relation.NON_FRIEND: alphabet.REPLY_NON_FRIEND,
}
_RESHARE_SYMBOLS = {
    Relation.SELF: alphabet.RESHARE_SELF,
    Relation.FRIEND: alphabet.RESHARE_FRIEND,
    Relation.NON_FRIEND: alphabet.RESHARE_NON_FRIEND,
}


def action_symbol(post: Post, graph: SocialGraphContext) -> str:
    """
    Map a post to its action symbol.

    Originals are ``T``; replies are ``P``/``p``/``π`` and reshares ``R``/``r``/``ρ``
    for a friend, non-friend or own target respectively. A reply or reshare aimed at
    the author itself is always ``π``/``ρ``, whatever the graph says.
    """
    if post.action_kind is ActionKind.ORIGINAL:
        return alphabet.POST
    relation = resolve_relation(post.author_id, post.target_author_id, graph)
    if post.action_kind is ActionKind.REPLY:
        return _REPLY_SYMBOLS[relation]
    return _RESHARE_SYMBOLS[relation]


def pause_symbol(delta: Union[timedelta, float], cfg: LanguageConfig) -> Optional[str]:
    """
    Map the gap between two consecutive actions to a pause symbol.

    :param delta: Gap as a timedelta or in seconds
    :param cfg: Language parameters (p1 threshold, p2 pause alphabet)
    :return: None for gaps below p1, otherwise ``.`` (f1) or one of ``t_h`` ... ``t_z`` (f2)
    :raises ValidationError: If the gap is negative
    """
    seconds = delta.total_seconds() if isinstance(delta, timedelta) else float(delta)
    if seconds < 0:
        raise ValidationError(f"Pause duration must be non-negative, got {seconds} s")
    if seconds < cfg.session_seconds:
        return None
    if cfg.p2 is PauseFunction.F1:
        return alphabet.SESSION_PAUSE
    for bound, symbol in _LOG_PAUSE_BOUNDS:
        if seconds < bound:
            return symbol
    return alphabet.PAUSE_LONGER


def content_symbols(post: Post, graph: SocialGraphContext) -> Word:
    """
    Map a post to its content word.

    Symbols are emitted in the fixed order E, H, M, m, q, φ, t, U with their
    multiplicity preserved (two images give ``EE``). The content alphabet has no
    self-mention symbol: an author mentioning itself counts as ``m``, even when the
    graph lists the author among its own friends.
    """
    friend_mentions = 0
    other_mentions = 0
    for mention in post.mentions:
        if resolve_relation(post.author_id, mention, graph) is Relation.FRIEND:
            friend_mentions += 1
        else:
            other_mentions += 1

    quotes_other = post.quoted_author_id is not None and post.quoted_author_id != post.author_id
    quotes_self = post.quoted_author_id is not None and post.quoted_author_id == post.author_id

    return (
        (alphabet.MEDIA,) * post.media_count
        + (alphabet.HASHTAG,) * len(post.hashtags)
        + (alphabet.MENTION_FRIEND,) * friend_mentions
        + (alphabet.MENTION_NON_FRIEND,) * other_mentions
        + ((alphabet.QUOTE_OTHER,) if quotes_other else ())
        + ((alphabet.QUOTE_SELF,) if quotes_self else ())
        + ((alphabet.TEXT,) if post.has_text else ())
        + (alphabet.LINK,) * len(post.urls)
    )


def encode(timeline: AccountTimeline, graph: SocialGraphContext, cfg: LanguageConfig) -> BlocDocument:
    """
    Encode an account timeline into BLOC action and content strings.

    Pause symbols are interleaved between actions whose gap reaches p1. With
    ``p3`` each session contributes one content word (the concatenation of its
    posts' words); otherwise every post contributes one word, possibly empty.

    :param timeline: Timeline sorted ascending by timestamp
    :param graph: Friend graph used to resolve relations
    :param cfg: Language parameters
    :return: BlocDocument; empty strings for an empty timeline
    """
    action: list[str] = []
    boundaries: list[int] = []
    post_words: list[Word] = []
    sessions: list[list[Word]] = []

    previous: Optional[Post] = None
    for post in timeline.posts:
        pause = None
        if previous is not None:
            pause = pause_symbol(post.timestamp - previous.timestamp, cfg)
        if pause is not None:
            boundaries.append(len(action))
            action.append(pause)
        if previous is None or pause is not None:
            sessions.append([])

        action.append(action_symbol(post, graph))
        word = content_symbols(post, graph)
        post_words.append(word)
        sessions[-1].append(word)
        previous = post

    if cfg.p3:
        content_words = tuple(tuple(symbol for word in session for symbol in word) for session in sessions)
    else:
        content_words = tuple(post_words)

    return BlocDocument(
        account_id=timeline.account_id,
        action=tuple(action),
        content_words=content_words,
        session_boundaries=tuple(boundaries),
    )


def encode_dataset(dataset: Dataset, cfg: LanguageConfig) -> dict[str, BlocDocument]:
    """Encode every timeline of a dataset, keyed by account id in sorted order."""
    documents = {timeline.account_id: encode(timeline, dataset.graph, cfg) for timeline in dataset.iter_timelines()}
    logger.debug(f"Encoded {len(documents)} accounts with p1={cfg.p1}, p2={cfg.p2.value}")
    return documents


class Encoder(BlocApiBase):
    """
    Encoder API: BLOC strings from timelines under the configured language.

    Accessed via ``client.encoder``.
    """

    def encode(self, timeline: AccountTimeline, graph: Optional[SocialGraphContext] = None) -> BlocDocument:
        return encode(timeline, graph or SocialGraphContext(), self.language())

    def encode_dataset(self, dataset: Dataset) -> dict[str, BlocDocument]:
        return encode_dataset(dataset, self.language())
