from __future__ import annotations

import itertools
import random
from typing import Optional

from ..core import AccessDecision, ContentId, Deny, GroupId, GroupType, Permit, UserId, NOBODY
from ..crypto import DEFAULT_PROFILE, CryptoCostParams, CryptoProvider, Ledgers, ModelProvider, OpLedger
from ..netsim import Network


class GroupError(ValueError):
    pass


class Env:
    """One simulation run: a provider, the network, ledgers and a seeded RNG."""

    def __init__(self, provider: Optional[CryptoProvider] = None,
                 params: CryptoCostParams = DEFAULT_PROFILE, seed: int = 0):
        self.provider = provider if provider is not None else ModelProvider()
        self.params = params
        self.net = Network()
        self.ledgers = Ledgers(params)
        self.seed = seed
        self.rng = random.Random(seed)
        self._group_ids = itertools.count(1)
        self._content_ids = itertools.count(1)
        self.groups: dict[GroupId, "EnforcedGroup"] = {}
        self._inbox: dict[UserId, list] = {}

    def ledger(self, u: UserId) -> OpLedger:
        return self.ledgers[u]

    def reset_ledgers(self) -> None:
        self.ledgers = Ledgers(self.params)
        self.net.reset_traffic()

    def register(self, group: "EnforcedGroup", group_id: Optional[GroupId]) -> GroupId:
        if group_id is None:
            group_id = GroupId(next(self._group_ids))
            while group_id in self.groups:
                group_id = GroupId(next(self._group_ids))
        elif group_id in self.groups:
            raise GroupError("group exists")
        self.groups[group_id] = group
        return group_id

    def post(self, u: UserId, blob, sender: UserId) -> None:
        """Mailbox delivery of a blob tagged with its ``group``."""
        self.net.mailbox_append(u, blob, sender)

    def fetch_mail(self, u: UserId, group: GroupId) -> list:
        """Drain ``u``'s mailbox and hand back the blobs addressed to ``group``.

        A mailbox is per user, not per group, so blobs for other groups are
        parked locally until those groups sync.
        """
        parked = self._inbox.setdefault(u, [])
        if self.net.mailbox_pending(u):
            parked.extend(self.net.mailbox_drain(u))
        mine = [b for b in parked if b.group == group]
        if mine:
            self._inbox[u] = [b for b in parked if b.group != group]
        return mine

    def new_content_id(self) -> ContentId:
        return ContentId(next(self._content_ids))


class EnforcedGroup:
    """Membership bookkeeping and precondition checks shared by the models.

    Subclasses implement ``_publish``, ``_join``, ``_leave``, ``_fast_join`` and
    ``access``. ``members`` keeps insertion order so replica sampling and
    per-member loops are deterministic.
    """

    model = ""

    def __init__(self, env: Env, owner: UserId, gtype: GroupType,
                 group_id: Optional[GroupId] = None):
        if owner == NOBODY:
            raise GroupError("user 0 is reserved")
        self.env = env
        self.owner = owner
        self.gtype = gtype
        self.members: dict[UserId, None] = {owner: None}
        self.group_id = env.register(self, group_id)

    @property
    def net(self) -> Network:
        return self.env.net

    @property
    def provider(self) -> CryptoProvider:
        return self.env.provider

    def ledger(self, u: UserId) -> OpLedger:
        return self.env.ledgers[u]

    def is_member(self, u: UserId) -> bool:
        return u in self.members

    def others(self) -> list[UserId]:
        return [m for m in self.members if m != self.owner]

    def _require_member(self, u: UserId) -> None:
        if u not in self.members:
            raise GroupError("not a member")

    def _require_joinable(self, u: UserId) -> None:
        if u == NOBODY:
            raise GroupError("user 0 is reserved")
        if u in self.members:
            raise GroupError("already member")

    def _require_leavable(self, u: UserId) -> None:
        if u == self.owner:
            raise GroupError("owner cannot leave")
        self._require_member(u)

    def _new_cid(self, cid: Optional[ContentId]) -> ContentId:
        cid = cid if cid is not None else self.env.new_content_id()
        if cid in self.contents:
            raise GroupError("content exists")
        return cid

    # public operations
    def publish(self, author: UserId, content: bytes, cid: Optional[ContentId] = None) -> ContentId:
        self._require_member(author)
        cid = self._new_cid(cid)
        self._publish(author, content, cid)
        return cid

    def join(self, u: UserId) -> None:
        self._require_joinable(u)
        self.members[u] = None
        self._join(u)

    def leave(self, u: UserId) -> None:
        self._require_leavable(u)
        del self.members[u]
        self._leave(u)

    def fast_join(self, u: UserId) -> None:
        """Add a member without any ledger or traffic charges (group construction)."""
        if self.contents:
            raise GroupError("fast_join is only for building a group before publication")
        self._require_joinable(u)
        self.members[u] = None
        self._fast_join(u)

    def sync(self, u: UserId) -> None:
        """Let ``u`` fetch and process pending notifications."""

    def decide(self, u: UserId, cid: ContentId) -> AccessDecision:
        return Permit if self.access(u, cid) is not None else Deny

    # hooks
    contents: dict

    def _publish(self, author: UserId, content: bytes, cid: ContentId) -> None:
        raise NotImplementedError

    def _join(self, u: UserId) -> None:
        raise NotImplementedError

    def _leave(self, u: UserId) -> None:
        raise NotImplementedError

    def _fast_join(self, u: UserId) -> None:
        raise NotImplementedError

    def access(self, u: UserId, cid: ContentId) -> Optional[bytes]:
        raise NotImplementedError
