"""Encryption-based enforcement: one symmetric group key, refreshed and
re-distributed member by member under each member's public key."""
from __future__ import annotations

from ..core import GroupType, UserId
from ..crypto import SymKey
from .base import Env
from .keyed import KeyEntry, KeyedGroup


class EncryptionGroup(KeyedGroup):
    model = "encryption"

    def __init__(self, env: Env, owner: UserId, gtype: GroupType, group_id=None, **_):
        super().__init__(env, owner, gtype, group_id)
        self._group_key = self.provider.gen_sym(self.ledger(owner))
        self.rings[owner].add(self._group_key)

    @property
    def group_key(self) -> SymKey:
        return self._group_key

    def _refresh_group_key(self) -> tuple[SymKey, SymKey]:
        old = self._group_key
        new = self._group_key = self.provider.refresh(old, self.ledger(self.owner))
        self.rings[self.owner].add(new)
        return old, new

    def _join(self, u):
        provider, ledger = self.provider, self.ledger(self.owner)
        if self.gtype.join_bs:
            # existing members move to the new key through the old one
            old, new = self._refresh_group_key()
            self._broadcast([KeyEntry(0, new.ref, old.ref, provider.wrap_key(old, new, ledger))])
        key = self._group_key
        sealed = provider.seal_asym(u, provider.key_bytes(key), ledger)
        self._mail(u, [KeyEntry(0, key.ref, ("pk", u), sealed)])
        self._start_cursor(self.ring(u))

    def _fast_join(self, u):
        ring = self.ring(u)
        ring.add(self._group_key)
        self._start_cursor(ring)

    def _leave(self, u):
        provider, ledger = self.provider, self.ledger(self.owner)
        old, new = self._refresh_group_key()
        payload = provider.key_bytes(new)
        for m in self.others():
            self._mail(m, [KeyEntry(0, new.ref, ("pk", m), provider.seal_asym(m, payload, ledger))])
        if self.gtype is GroupType.G4:
            # backward link: later joiners can unwrap every older group key
            self._broadcast([KeyEntry(0, old.ref, new.ref, provider.wrap_key(new, old, ledger))])
        if self.gtype.leave_bs:
            self._rekey_contents(new)
