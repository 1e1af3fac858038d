"""Key-tree enforcement: a degree-d tree of symmetric keys whose root is the
group key. Membership changes refresh only the keys on one leaf-to-root path."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..core import GroupType, UserId
from ..crypto import OpLedger, SymKey
from .base import Env, GroupError
from .keyed import ENTRY_HEADER_BYTES, KeyEntry, KeyedGroup


@dataclass(eq=False)
class TreeNode:
    key: SymKey
    parent: Optional["TreeNode"]
    slot: int
    depth: int
    path: tuple[int, ...]
    children: Optional[list] = None  # None marks a leaf
    member: Optional[UserId] = None

    @property
    def node_id(self) -> int:
        return self.key.key_id

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def live_children(self) -> list["TreeNode"]:
        return [c for c in self.children if c is not None]


@dataclass(frozen=True)
class Split:
    """A leaf pushed one level down under a new internal node."""

    displaced: UserId
    node: TreeNode


class KeyTree:
    """Leaf placement and removal; never rebalances.

    New leaves take the leftmost vacant slot of minimal depth. When no slot is
    vacant the shallowest, leftmost leaf is split: a new internal node takes
    its place with the old leaf as child 0 and the new leaf as child 1.
    Internal nodes left without children are pruned, except the root.
    """

    def __init__(self, degree: int, root_key: SymKey):
        if degree < 2:
            raise GroupError("degree must be at least 2")
        self.degree = degree
        self.root = TreeNode(root_key, None, 0, 0, (), [None] * degree)
        self.nodes: dict[int, TreeNode] = {self.root.node_id: self.root}
        self.leaves: dict[UserId, TreeNode] = {}
        self._slots: list[tuple] = []  # (depth, path, node_id, slot), validated lazily
        self._leaf_heap: list[tuple] = []  # (depth, path, user)
        for i in range(degree):
            self._push_slot(self.root, i)

    def __len__(self) -> int:
        return len(self.leaves)

    @property
    def height(self) -> int:
        return max((leaf.depth for leaf in self.leaves.values()), default=0)

    def _push_slot(self, node: TreeNode, i: int) -> None:
        heapq.heappush(self._slots, (node.depth + 1, node.path + (i,), node.node_id, i))

    def _push_leaf(self, leaf: TreeNode) -> None:
        heapq.heappush(self._leaf_heap, (leaf.depth, leaf.path, leaf.member))

    def _pop_slot(self) -> Optional[tuple[TreeNode, int]]:
        while self._slots:
            _, _, node_id, i = heapq.heappop(self._slots)
            node = self.nodes.get(node_id)
            if node is not None and node.children[i] is None:
                return node, i
        return None

    def _pop_leaf(self) -> TreeNode:
        while True:
            _, path, user = heapq.heappop(self._leaf_heap)
            leaf = self.leaves.get(user)
            if leaf is not None and leaf.path == path:
                return leaf

    def _attach(self, parent: TreeNode, i: int, node: TreeNode) -> None:
        node.parent, node.slot = parent, i
        node.depth, node.path = parent.depth + 1, parent.path + (i,)
        parent.children[i] = node

    def insert(self, u: UserId, leaf_key: SymKey,
               new_key: Callable[[], SymKey]) -> tuple[TreeNode, Optional[Split]]:
        if u in self.leaves:
            raise GroupError("already member")
        leaf = TreeNode(leaf_key, None, 0, 0, (), None, u)
        split = None
        free = self._pop_slot()
        if free is None:
            old = self._pop_leaf()
            parent, i = old.parent, old.slot
            inner = TreeNode(new_key(), None, 0, 0, (), [None] * self.degree)
            self._attach(parent, i, inner)
            self.nodes[inner.node_id] = inner
            self._attach(inner, 0, old)
            self._push_leaf(old)
            for j in range(2, self.degree):
                self._push_slot(inner, j)
            free = (inner, 1)
            split = Split(old.member, inner)
        self._attach(*free, leaf)
        self.leaves[u] = leaf
        self._push_leaf(leaf)
        return leaf, split

    def remove(self, u: UserId) -> TreeNode:
        """Detach ``u``'s leaf; returns the lowest surviving ancestor."""
        leaf = self.leaves.pop(u)
        parent = leaf.parent
        parent.children[leaf.slot] = None
        self._push_slot(parent, leaf.slot)
        while parent is not self.root and not parent.live_children():
            up = parent.parent
            up.children[parent.slot] = None
            del self.nodes[parent.node_id]
            self._push_slot(up, parent.slot)
            parent = up
        return parent

    @staticmethod
    def ancestors(node: TreeNode) -> list[TreeNode]:
        """Parent first, root last."""
        out = []
        node = node.parent
        while node is not None:
            out.append(node)
            node = node.parent
        return out

    def check(self) -> None:
        """Structural sanity, for tests."""
        seen = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                assert self.leaves[node.member] is node
                seen += 1
                continue
            assert len(node.children) == self.degree
            assert node is self.root or node.live_children()
            for i, c in enumerate(node.children):
                if c is not None:
                    assert c.parent is node and c.slot == i and c.depth == node.depth + 1
                    stack.append(c)
        assert seen == len(self.leaves)


def _entry(node: TreeNode, key: SymKey, under: tuple, sealed) -> KeyEntry:
    return KeyEntry(node.node_id, key.ref, under, sealed, ENTRY_HEADER_BYTES)


class LkhGroup(KeyedGroup):
    model = "lkh"

    def __init__(self, env: Env, owner: UserId, gtype: GroupType, group_id=None,
                 degree: int = 4, **_):
        if degree < 2:
            raise GroupError("degree must be at least 2")
        super().__init__(env, owner, gtype, group_id)
        root_key = self.provider.gen_sym(self.ledger(owner))
        self.tree = KeyTree(degree, root_key)
        self.rings[owner].add(root_key)

    @property
    def group_key(self) -> SymKey:
        return self.tree.root.key

    @property
    def degree(self) -> int:
        return self.tree.degree

    def _refresh(self, node: TreeNode, ledger: OpLedger) -> tuple[SymKey, SymKey]:
        old = node.key
        node.key = self.provider.refresh(old, ledger)
        if node is self.tree.root:
            self.rings[self.owner].add(node.key)
        return old, node.key

    def _place(self, u: UserId, ledger: Optional[OpLedger]) -> tuple[TreeNode, Optional[Split]]:
        gen = self.provider.gen_sym
        return self.tree.insert(u, gen(ledger), lambda: gen(ledger))

    def _join(self, u):
        provider, ledger = self.provider, self.ledger(self.owner)
        leaf, split = self._place(u, ledger)
        path = self.tree.ancestors(leaf)
        if self.gtype.join_bs:
            entries = []
            for node in path:
                if split is not None and node is split.node:
                    continue  # brand new, nobody holds it yet
                old, new = self._refresh(node, ledger)
                entries.append(_entry(node, new, old.ref, provider.wrap_key(old, new, ledger)))
            self._broadcast(entries)
        bundle = [_entry(leaf, leaf.key, ("pk", u), provider.seal_asym(u, provider.key_bytes(leaf.key), ledger))]
        bundle += [_entry(a, a.key, leaf.key.ref, provider.wrap_key(leaf.key, a.key, ledger)) for a in path]
        self._mail(u, bundle)
        if split is not None:
            moved = self.tree.leaves[split.displaced]
            node = split.node
            self._mail(split.displaced,
                       [_entry(node, node.key, moved.key.ref, provider.wrap_key(moved.key, node.key, ledger))])
        self._start_cursor(self.ring(u))

    def _fast_join(self, u):
        leaf, split = self._place(u, None)
        ring = self.ring(u)
        ring.add(leaf.key)
        for a in self.tree.ancestors(leaf):
            ring.add(a.key)
        if split is not None:
            self.ring(split.displaced).add(split.node.key)
        self._start_cursor(ring)

    def _leave(self, u):
        provider, ledger = self.provider, self.ledger(self.owner)
        old_root = self.tree.root.key
        node = self.tree.remove(u)
        entries = []
        while node is not None:
            _, new = self._refresh(node, ledger)
            for child in node.live_children():
                entries.append(_entry(node, new, child.key.ref, provider.wrap_key(child.key, new, ledger)))
            node = node.parent
        new_root = self.tree.root.key
        if self.gtype is GroupType.G4:
            # backward link, as in the single-key model
            entries.append(_entry(self.tree.root, old_root, new_root.ref,
                                  provider.wrap_key(new_root, old_root, ledger)))
        if entries:
            self._broadcast(entries)
        if self.gtype.leave_bs:
            self._rekey_contents(new_root)
