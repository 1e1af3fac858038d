"""Allocation-based enforcement: contents stay in clear, guarded by one
identity-list rule each, and are replicated only on authorized members' peers.

No cryptographic operation is ever charged in this model.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from ..core import AccessDecision, ContentId, Deny, GroupType, Permit, UserId
from .base import Env, EnforcedGroup, GroupError

RULE_OVERHEAD_BYTES = 64
RULE_ID_BYTES = 16
DELTA_BYTES = 16
DEFAULT_REPLICAS = 2


@dataclass(frozen=True)
class PolicyRule:
    content: ContentId
    authorized: frozenset

    @property
    def size(self) -> int:
        return RULE_OVERHEAD_BYTES + RULE_ID_BYTES * len(self.authorized)

    def with_member(self, u: UserId) -> "PolicyRule":
        return PolicyRule(self.content, self.authorized | {u})

    def without_member(self, u: UserId) -> "PolicyRule":
        return PolicyRule(self.content, self.authorized - {u})

    def __str__(self) -> str:
        return f"{self.content}: {','.join(str(u) for u in sorted(self.authorized))}"


@dataclass(frozen=True)
class MemberDelta:
    """Member-list change notice on the group message list."""

    group: int
    user: UserId
    joined: bool

    @property
    def size(self) -> int:
        return DELTA_BYTES


class AllocationGroup(EnforcedGroup):
    model = "allocation"

    def __init__(self, env: Env, owner: UserId, gtype: GroupType, group_id=None,
                 replicas: int = DEFAULT_REPLICAS, **_):
        if replicas < 1:
            raise GroupError("replica count must be positive")
        super().__init__(env, owner, gtype, group_id)
        self.k = replicas
        self.rules: dict[ContentId, PolicyRule] = {}
        self.contents: dict[ContentId, tuple] = {}
        self._rule_rev: dict[ContentId, int] = {}
        self._cursors: dict[UserId, int] = {}
        self._member_set: Optional[frozenset] = None
        self._rng = random.Random(f"{env.seed}:{self.group_id}")

    def _rule_key(self, cid: ContentId) -> tuple:
        return ("rule", self.group_id, cid, self._rule_rev[cid])

    def _pick_replicas(self, pool, k: int) -> list[UserId]:
        pool = sorted(pool)
        return self._rng.sample(pool, min(k, len(pool)))

    def replicas(self, cid: ContentId) -> frozenset:
        return self.net.dht_ref(self.contents[cid]).replicas

    def _store_rule(self, rule: PolicyRule, sender: UserId) -> None:
        cid = rule.content
        if cid in self._rule_rev:
            self.net.dht_delete(self._rule_key(cid))
            self._rule_rev[cid] += 1
        else:
            self._rule_rev[cid] = 0
        self.rules[cid] = rule
        self.net.dht_put(self._rule_key(cid), rule, (), sender)

    def _notify(self, u: UserId, joined: bool) -> None:
        self.net.gml_append(self.group_id, MemberDelta(self.group_id, u, joined), self.owner)

    def _current_members(self) -> frozenset:
        # rules published between two membership changes share one set
        if self._member_set is None:
            self._member_set = frozenset(self.members)
        return self._member_set

    def _rewrite_rules(self, edit) -> None:
        """Apply ``edit`` to every rule's authorized set, computing each
        distinct set only once."""
        done: dict[int, frozenset] = {}
        for cid, rule in list(self.rules.items()):
            key = id(rule.authorized)
            if key not in done:
                done[key] = edit(rule.authorized)
            self._store_rule(PolicyRule(cid, done[key]), self.owner)

    def _publish(self, author, content, cid):
        rule = PolicyRule(cid, self._current_members())
        key = ("content", self.group_id, cid)
        self.net.dht_put(key, content, self._pick_replicas(rule.authorized, self.k), author)
        self.contents[cid] = key
        self._store_rule(rule, author)

    def _join(self, u):
        self._member_set = None
        self._notify(u, True)
        self._cursors[u] = self.net.gml_head(self.group_id)
        if not self.gtype.join_bs:
            self._rewrite_rules(lambda ids: ids | {u})

    def _fast_join(self, u):
        self._member_set = None
        self._cursors[u] = self.net.gml_head(self.group_id)

    def _leave(self, u):
        self._member_set = None
        self._notify(u, False)
        if not self.gtype.leave_bs:
            return
        self._rewrite_rules(lambda ids: ids - {u})
        for cid, rule in self.rules.items():
            held = self.replicas(cid)
            if u in held:
                kept = held - {u}
                extra = self._pick_replicas(rule.authorized - kept, 1)
                self.net.replicate(self.contents[cid], kept | set(extra), self.owner)

    def sync(self, u: UserId) -> None:
        if u in self._cursors:
            for seq, _ in self.net.gml_read_since(self.group_id, self._cursors[u], u):
                self._cursors[u] = seq

    def evaluate(self, u: UserId, cid: ContentId) -> AccessDecision:
        rule = self.rules.get(cid)
        if rule is None:
            raise GroupError("unknown content")
        return Permit if u in rule.authorized else Deny

    def decide(self, u: UserId, cid: ContentId) -> AccessDecision:
        return self.evaluate(u, cid)

    def access(self, u: UserId, cid: ContentId) -> Optional[bytes]:
        if not self.evaluate(u, cid):
            return None
        return self.net.dht_get(self.contents[cid], u)

    def export_rules(self) -> str:
        return "".join(f"{self.rules[cid]}\n" for cid in sorted(self.rules))
