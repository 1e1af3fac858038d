"""In-memory DOSN substrate: DHT blob store, private mailboxes, group message lists.

Only payload traffic is charged: no routing hops, no DHT maintenance. Appends
to mailboxes and group message lists cost the sender a fixed envelope on top
of the payload; readers are charged payload bytes only.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable

from .core import GroupId, UserId

ENVELOPE_BYTES = 24  # sender id 8 + seq 8 + kind 8


def size_of(blob: Any) -> int:
    if isinstance(blob, (bytes, bytearray, memoryview)):
        return len(blob)
    return blob.size


class NetError(Exception):
    pass


@dataclass
class TrafficLedger:
    bytes_sent: int = 0
    bytes_received: int = 0
    messages_sent: int = 0
    messages_received: int = 0

    def sent(self, nbytes: int) -> None:
        self.bytes_sent += nbytes
        self.messages_sent += 1

    def received(self, nbytes: int) -> None:
        self.bytes_received += nbytes
        self.messages_received += 1


@dataclass
class BlobRef:
    key: Hashable
    size: int
    replicas: frozenset = field(default_factory=frozenset)


class Network:
    def __init__(self):
        self.traffic: defaultdict[UserId, TrafficLedger] = defaultdict(TrafficLedger)
        self._dht: dict[Hashable, tuple[Any, BlobRef]] = {}
        self._mailboxes: defaultdict[UserId, list[tuple[UserId, Any]]] = defaultdict(list)
        self._gml: defaultdict[GroupId, list[tuple[int, Any]]] = defaultdict(list)

    def reset_traffic(self) -> None:
        self.traffic = defaultdict(TrafficLedger)

    # DHT
    def dht_put(self, key: Hashable, blob: Any, replicas: Iterable[UserId], sender: UserId) -> BlobRef:
        if key in self._dht:
            raise NetError("key exists")
        ref = BlobRef(key, size_of(blob), frozenset(replicas))
        self._dht[key] = (blob, ref)
        self.traffic[sender].sent(ref.size)
        return ref

    def dht_get(self, key: Hashable, reader: UserId) -> Any:
        try:
            blob, ref = self._dht[key]
        except KeyError:
            raise NetError("not found") from None
        self.traffic[reader].received(ref.size)
        return blob

    def dht_ref(self, key: Hashable) -> BlobRef:
        try:
            return self._dht[key][1]
        except KeyError:
            raise NetError("not found") from None

    def dht_set_replicas(self, key: Hashable, replicas: Iterable[UserId]) -> BlobRef:
        blob, ref = self._dht[key]
        ref = BlobRef(ref.key, ref.size, frozenset(replicas))
        self._dht[key] = (blob, ref)
        return ref

    def replicate(self, key: Hashable, replicas: Iterable[UserId], sender: UserId) -> BlobRef:
        """Move a blob onto a new replica set; each new holder costs one transfer."""
        old = self.dht_ref(key)
        ref = self.dht_set_replicas(key, replicas)
        for holder in sorted(ref.replicas - old.replicas):
            self.traffic[sender].sent(ref.size)
            self.traffic[holder].received(ref.size)
        return ref

    def dht_delete(self, key: Hashable) -> None:
        self._dht.pop(key, None)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._dht

    # private mailboxes
    def mailbox_append(self, u: UserId, blob: Any, sender: UserId) -> None:
        self._mailboxes[u].append((sender, blob))
        self.traffic[sender].sent(size_of(blob) + ENVELOPE_BYTES)

    def mailbox_drain(self, u: UserId) -> list[Any]:
        entries = self._mailboxes.pop(u, [])
        ledger = self.traffic[u]
        for _, blob in entries:
            ledger.received(size_of(blob))
        return [blob for _, blob in entries]

    def mailbox_pending(self, u: UserId) -> int:
        return len(self._mailboxes.get(u, ()))

    # group message lists
    def gml_append(self, g: GroupId, blob: Any, sender: UserId) -> int:
        entries = self._gml[g]
        seq = entries[-1][0] + 1 if entries else 1
        entries.append((seq, blob))
        self.traffic[sender].sent(size_of(blob) + ENVELOPE_BYTES)
        return seq

    def gml_read_since(self, g: GroupId, from_seq: int, reader: UserId) -> list[tuple[int, Any]]:
        """Entries with ``seq > from_seq``, in seq order."""
        entries = self._gml.get(g, [])
        # seqs are 1..len, so the slice start is from_seq itself
        out = entries[max(from_seq, 0):]
        ledger = self.traffic[reader]
        for _, blob in out:
            ledger.received(size_of(blob))
        return list(out)

    def gml_head(self, g: GroupId) -> int:
        entries = self._gml.get(g)
        return entries[-1][0] if entries else 0
