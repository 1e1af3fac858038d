"""Pieces shared by the two key-based models: wire entries, member keyrings,
content storage under a group key and the backward-secrecy content re-key."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Optional

from ..core import ContentId, GroupType, UserId
from ..crypto import OpLedger, Sealed, SymKey, WrongKey
from .base import EnforcedGroup, Env, GroupError

ENTRY_HEADER_BYTES = 16  # node id 8 + version 8


@dataclass(frozen=True)
class KeyEntry:
    """One sealed key on the wire. ``under`` names the sealing key: a
    ``(key_id, version)`` ref or ``("pk", user)`` for an asymmetric seal."""

    node_id: int
    key_ref: tuple[int, int]
    under: tuple
    sealed: Sealed
    header: int = 0

    @property
    def size(self) -> int:
        return self.header + self.sealed.canonical_size


@dataclass(frozen=True)
class KeyBundle:
    group: int
    entries: tuple[KeyEntry, ...]

    @property
    def size(self) -> int:
        return sum(e.size for e in self.entries)


@dataclass(frozen=True)
class ContentRecord:
    cid: ContentId
    author: UserId
    blob_key: Hashable
    key_blob_key: Hashable
    sealing_ref: tuple[int, int]
    rev: int = 0


@dataclass
class Keyring:
    """Key material a principal holds for one group, plus unopened entries."""

    user: UserId
    keys: dict[tuple[int, int], SymKey] = field(default_factory=dict)
    pending: list[KeyEntry] = field(default_factory=list)
    gml_cursor: int = 0

    def add(self, key: SymKey) -> None:
        self.keys[key.ref] = key

    def absorb(self, entries: list[KeyEntry], env: Env, ledger: OpLedger) -> int:
        """Open every entry reachable from held keys; returns how many were opened."""
        provider = env.provider
        self.pending.extend(entries)
        opened = 0
        progress = True
        while progress and self.pending:
            progress = False
            still: list[KeyEntry] = []
            for e in self.pending:
                if e.key_ref in self.keys:
                    continue
                if e.under == ("pk", self.user):
                    pair = provider.keypair(self.user)
                    data = provider.open_asym(pair, e.sealed, ledger)
                    key = provider.key_from_bytes(data, *e.key_ref)
                elif e.under in self.keys:
                    key = provider.unwrap_key(self.keys[e.under], e.sealed, e.key_ref, ledger)
                else:
                    still.append(e)
                    continue
                self.add(key)
                opened += 1
                progress = True
            self.pending = still
        return opened


class KeyedGroup(EnforcedGroup):
    """Common machinery for groups whose contents are sealed under a group key."""

    def __init__(self, env: Env, owner: UserId, gtype: GroupType, group_id=None):
        super().__init__(env, owner, gtype, group_id)
        self.contents: dict[ContentId, ContentRecord] = {}
        self.rings: dict[UserId, Keyring] = {owner: Keyring(owner)}

    @property
    def group_key(self) -> SymKey:
        raise NotImplementedError

    def ring(self, u: UserId) -> Keyring:
        ring = self.rings.get(u)
        if ring is None:
            ring = self.rings[u] = Keyring(u)
        return ring

    def _start_cursor(self, ring: Keyring) -> None:
        # G4 joiners walk the backward key links from the start of the list;
        # the other types never need entries older than the join.
        if self.gtype is not GroupType.G4:
            ring.gml_cursor = max(ring.gml_cursor, self.net.gml_head(self.group_id))

    def join(self, u: UserId) -> None:
        if u in self.rings:
            # a returning member first catches up on entries from its earlier
            # membership, before the cursor jumps past them
            self._require_joinable(u)
            self.sync(u)
        super().join(u)

    def _mail(self, u: UserId, entries: list[KeyEntry]) -> None:
        self.env.post(u, KeyBundle(self.group_id, tuple(entries)), self.owner)

    def _broadcast(self, entries: list[KeyEntry]) -> int:
        return self.net.gml_append(self.group_id, KeyBundle(self.group_id, tuple(entries)), self.owner)

    def sync(self, u: UserId) -> None:
        if u == self.owner or u not in self.rings:
            return
        ring = self.rings[u]
        entries: list[KeyEntry] = []
        for bundle in self.env.fetch_mail(u, self.group_id):
            entries.extend(bundle.entries)
        for seq, bundle in self.net.gml_read_since(self.group_id, ring.gml_cursor, u):
            entries.extend(bundle.entries)
            ring.gml_cursor = seq
        # parked entries only become openable through keys in new entries
        if entries:
            ring.absorb(entries, self.env, self.ledger(u))

    def _current_key_for(self, author: UserId) -> SymKey:
        if author != self.owner:
            self.sync(author)
        key = self.rings[author].keys.get(self.group_key.ref)
        if key is None:
            raise GroupError("author does not hold the current group key")
        return key

    def _store_content(self, sender: UserId, cid: ContentId, author: UserId, content: Any,
                       group_key: SymKey, rev: int = 0) -> ContentRecord:
        provider, ledger = self.provider, self.ledger(sender)
        content_key = provider.gen_sym(ledger)
        sealed_content = provider.seal_sym(content_key, content, ledger)
        sealed_key = provider.wrap_key(group_key, content_key, ledger)
        blob_key = ("content", self.group_id, cid, rev)
        key_blob_key = ("ckey", self.group_id, cid, rev)
        self.net.dht_put(blob_key, sealed_content, (), sender)
        self.net.dht_put(key_blob_key, KeyEntry(0, content_key.ref, group_key.ref, sealed_key), (), sender)
        rec = ContentRecord(cid, author, blob_key, key_blob_key, group_key.ref, rev)
        self.contents[cid] = rec
        return rec

    def _publish(self, author, content, cid):
        self._store_content(author, cid, author, content, self._current_key_for(author))

    def _rekey_contents(self, new_group_key: SymKey) -> None:
        """Re-encrypt every published content under fresh content keys sealed
        with ``new_group_key``; old blobs are withdrawn from the DHT."""
        owner, provider = self.owner, self.provider
        ledger = self.ledger(owner)
        owner_keys = self.rings[owner].keys
        for cid, rec in list(self.contents.items()):
            key_entry = self.net.dht_get(rec.key_blob_key, owner)
            sealed_content = self.net.dht_get(rec.blob_key, owner)
            old_ck = provider.unwrap_key(owner_keys[key_entry.under], key_entry.sealed, key_entry.key_ref, ledger)
            plain = provider.open_sym(old_ck, sealed_content, ledger)
            self.net.dht_delete(rec.blob_key)
            self.net.dht_delete(rec.key_blob_key)
            self._store_content(owner, cid, rec.author, plain, new_group_key, rec.rev + 1)

    def access(self, u: UserId, cid: ContentId) -> Optional[bytes]:
        rec = self.contents.get(cid)
        if rec is None:
            raise GroupError("unknown content")
        self.sync(u)
        ring = self.rings.get(u)
        key_entry = self.net.dht_get(rec.key_blob_key, u)
        if ring is None or key_entry.under not in ring.keys:
            return None
        ledger = self.ledger(u)
        try:
            content_key = self.provider.unwrap_key(ring.keys[key_entry.under], key_entry.sealed,
                                                   key_entry.key_ref, ledger)
            return self.provider.open_sym(content_key, self.net.dht_get(rec.blob_key, u), ledger)
        except WrongKey:
            return None
