"""Group vocabulary, event histories and the reference access oracle.

The oracle works directly on the membership timeline and knows nothing about
keys or policies; every enforcement model is checked against it.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NewType, Optional

UserId = NewType("UserId", int)
GroupId = NewType("GroupId", int)
ContentId = NewType("ContentId", int)

NOBODY = UserId(0)
MAX_ID = 2**64 - 1


class GroupType(enum.Enum):
    G2 = "G2"
    G3 = "G3"
    G4 = "G4"

    @property
    def join_bs(self) -> bool:
        return self is GroupType.G2

    @property
    def leave_bs(self) -> bool:
        return self is GroupType.G3

    @classmethod
    def parse(cls, text: str) -> "GroupType":
        try:
            return cls(text.strip().upper())
        except ValueError:
            raise ValueError(f"unknown group type {text!r} (expected G2, G3 or G4)") from None


def secrecy_flags(gtype: GroupType) -> tuple[bool, bool]:
    """Return ``(join_bs, leave_bs)`` for a group type."""
    return gtype.join_bs, gtype.leave_bs


class AccessDecision(enum.Enum):
    PERMIT = "Permit"
    DENY = "Deny"

    def __bool__(self) -> bool:
        return self is AccessDecision.PERMIT


Permit = AccessDecision.PERMIT
Deny = AccessDecision.DENY


class EventKind(enum.Enum):
    CREATE = "CREATE"
    JOIN = "JOIN"
    LEAVE = "LEAVE"
    PUBLISH = "PUBLISH"


@dataclass(frozen=True)
class GroupEvent:
    seq: int
    kind: EventKind
    user: UserId
    content: Optional[ContentId] = None

    def __str__(self) -> str:
        args = f"{self.user}" if self.content is None else f"{self.user} {self.content}"
        return f"{self.seq} {self.kind.value} {args}"


class HistoryError(ValueError):
    pass


def _check_id(value: int, what: str) -> None:
    if not 0 < value <= MAX_ID:
        raise HistoryError(f"{what} {value} outside 1..2**64-1")


def check_events(events: Iterable[GroupEvent]) -> None:
    """Raise HistoryError at the first event whose precondition fails."""
    members: set[int] = set()
    published: set[int] = set()
    owner = None
    last_seq = None
    for i, ev in enumerate(events):
        if last_seq is not None and ev.seq <= last_seq:
            raise HistoryError(f"event {i}: seq {ev.seq} not increasing")
        last_seq = ev.seq
        _check_id(ev.user, "user id")
        if i == 0:
            if ev.kind is not EventKind.CREATE:
                raise HistoryError("first event must be CREATE")
            owner = ev.user
            members.add(ev.user)
            continue
        if ev.kind is EventKind.CREATE:
            raise HistoryError(f"event {i}: group already created")
        if ev.kind is EventKind.JOIN:
            if ev.user in members:
                raise HistoryError(f"event {i}: user {ev.user} already member")
            members.add(ev.user)
        elif ev.kind is EventKind.LEAVE:
            if ev.user == owner:
                raise HistoryError(f"event {i}: owner cannot leave")
            if ev.user not in members:
                raise HistoryError(f"event {i}: user {ev.user} not a member")
            members.discard(ev.user)
        elif ev.kind is EventKind.PUBLISH:
            if ev.content is None:
                raise HistoryError(f"event {i}: publish without content id")
            _check_id(ev.content, "content id")
            if ev.user not in members:
                raise HistoryError(f"event {i}: author {ev.user} not a member")
            if ev.content in published:
                raise HistoryError(f"event {i}: content {ev.content} published twice")
            published.add(ev.content)
    if last_seq is None:
        raise HistoryError("empty history")


@dataclass(frozen=True)
class GroupHistory:
    group: GroupId
    gtype: GroupType
    events: tuple[GroupEvent, ...]
    _publish_seq: dict = field(init=False, repr=False, compare=False)
    _spans: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        check_events(self.events)
        pubs = {ev.content: ev.seq for ev in self.events if ev.kind is EventKind.PUBLISH}
        object.__setattr__(self, "_publish_seq", pubs)
        spans: dict[UserId, list[list[Optional[int]]]] = {}
        for ev in self.events:
            if ev.kind in (EventKind.CREATE, EventKind.JOIN):
                spans.setdefault(ev.user, []).append([ev.seq, None])
            elif ev.kind is EventKind.LEAVE:
                spans[ev.user][-1][1] = ev.seq
        object.__setattr__(self, "_spans", {u: tuple(map(tuple, v)) for u, v in spans.items()})

    @property
    def owner(self) -> UserId:
        return self.events[0].user

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq

    def users(self) -> list[UserId]:
        seen = dict.fromkeys(ev.user for ev in self.events)
        return list(seen)

    def contents(self) -> list[ContentId]:
        return list(self._publish_seq)

    def publish_seq(self, c: ContentId) -> int:
        try:
            return self._publish_seq[c]
        except KeyError:
            raise KeyError("unknown content") from None

    def spans(self, u: UserId) -> tuple[tuple[int, Optional[int]], ...]:
        """Membership periods of ``u`` as ``(joined, left)``; ``left`` is None
        while still a member. ``u`` is a member at ``t`` iff ``joined <= t < left``."""
        return self._spans.get(u, ())

    def members_at(self, t: int) -> set[UserId]:
        if t > self.last_seq or t < self.events[0].seq:
            raise ValueError("time out of range")
        members: set[UserId] = set()
        for ev in self.events:
            if ev.seq > t:
                break
            if ev.kind in (EventKind.CREATE, EventKind.JOIN):
                members.add(ev.user)
            elif ev.kind is EventKind.LEAVE:
                members.discard(ev.user)
        return members


def is_member(history: GroupHistory, u: UserId, t: int) -> bool:
    if t > history.last_seq or t < history.events[0].seq:
        raise ValueError("time out of range")
    return any(a <= t and (b is None or t < b) for a, b in history.spans(u))


def oracle_access(history: GroupHistory, u: UserId, c: ContentId, t_query: int) -> AccessDecision:
    """Decide system-mediated access from the membership timeline alone.

    G4 grants access if ``u`` was a member at any time in ``[t_pub, t_query]``;
    G2 only if ``u`` was a member when ``c`` was published; G3 only if ``u`` is a
    member at ``t_query``.
    """
    t_pub = history.publish_seq(c)
    if t_query > history.last_seq:
        raise ValueError("time out of range")
    if t_pub > t_query:
        raise ValueError("content not yet published")
    gtype = history.gtype
    if gtype is GroupType.G2:
        ok = is_member(history, u, t_pub)
    elif gtype is GroupType.G3:
        ok = is_member(history, u, t_query)
    else:
        # some membership period overlaps [t_pub, t_query]
        ok = any(a <= t_query and (b is None or b > t_pub) for a, b in history.spans(u))
    return Permit if ok else Deny


# --- scenario files -------------------------------------------------------

class ScenarioError(ValueError):
    pass


_ARITY = {EventKind.CREATE: 1, EventKind.JOIN: 1, EventKind.LEAVE: 1, EventKind.PUBLISH: 2}


def parse_scenario(text: str) -> list[GroupEvent]:
    """Parse ``seq KIND args`` lines; ``#`` starts a comment."""
    events: list[GroupEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            seq = int(parts[0])
            kind = EventKind(parts[1].upper())
        except (IndexError, ValueError):
            raise ScenarioError(f"line {lineno}: expected 'seq KIND args', got {raw.strip()!r}") from None
        args = parts[2:]
        if len(args) != _ARITY[kind]:
            raise ScenarioError(f"line {lineno}: {kind.value} takes {_ARITY[kind]} argument(s)")
        try:
            ids = [int(a) for a in args]
        except ValueError:
            raise ScenarioError(f"line {lineno}: non-integer id in {raw.strip()!r}") from None
        ev = GroupEvent(seq, kind, UserId(ids[0]), ContentId(ids[1]) if len(ids) > 1 else None)
        try:
            check_events(events + [ev])
        except HistoryError as exc:
            msg = str(exc).split(": ", 1)[-1]
            raise ScenarioError(f"line {lineno}: {msg}") from None
        events.append(ev)
    if not events:
        raise ScenarioError("scenario is empty")
    return events


def load_scenario(path: str | Path, gtype: GroupType, group: GroupId = GroupId(1)) -> GroupHistory:
    return GroupHistory(group, gtype, tuple(parse_scenario(Path(path).read_text())))


def format_scenario(history: GroupHistory) -> str:
    return "".join(f"{ev}\n" for ev in history.events)


def random_history(
    rng: random.Random,
    gtype: GroupType,
    max_users: int = 30,
    max_contents: int = 30,
    n_events: Optional[int] = None,
    group: GroupId = GroupId(1),
) -> GroupHistory:
    """Random valid history; invalid candidate events are rejected and redrawn."""
    n_users = rng.randint(2, max_users)
    n_contents = rng.randint(1, max_contents)
    if n_events is None:
        n_events = rng.randint(n_users + n_contents, 2 * (n_users + n_contents))
    owner = UserId(1)
    users = [UserId(i) for i in range(1, n_users + 1)]
    events = [GroupEvent(0, EventKind.CREATE, owner)]
    members = {owner}
    next_content = 1
    seq = 0
    while len(events) < n_events:
        roll = rng.random()
        u = rng.choice(users)
        if roll < 0.45:
            kind = EventKind.JOIN
            if u in members:
                continue
        elif roll < 0.65:
            kind = EventKind.LEAVE
            if u not in members or u == owner:
                continue
        else:
            if next_content > n_contents:
                continue
            kind = EventKind.PUBLISH
            u = rng.choice(sorted(members))
        seq += 1
        if kind is EventKind.PUBLISH:
            events.append(GroupEvent(seq, kind, u, ContentId(next_content)))
            next_content += 1
        else:
            events.append(GroupEvent(seq, kind, u))
            if kind is EventKind.JOIN:
                members.add(u)
            else:
                members.discard(u)
    return GroupHistory(group, gtype, tuple(events))
