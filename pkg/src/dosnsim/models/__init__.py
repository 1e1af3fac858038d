from __future__ import annotations

from ..core import GroupType, UserId
from .allocation import AllocationGroup, PolicyRule
from .base import EnforcedGroup, Env, GroupError
from .encryption import EncryptionGroup
from .keyed import KeyedGroup
from .lkh import KeyTree, LkhGroup

MODELS: dict[str, type[EnforcedGroup]] = {
    EncryptionGroup.model: EncryptionGroup,
    LkhGroup.model: LkhGroup,
    AllocationGroup.model: AllocationGroup,
}


def create_group(model: str, env: Env, owner: UserId, gtype: GroupType, **options) -> EnforcedGroup:
    """Build a group of the named model; unknown options are ignored by models
    that do not use them (``degree`` for the key tree, ``replicas`` for allocation)."""
    try:
        cls = MODELS[model]
    except KeyError:
        raise GroupError(f"unknown model: {model}") from None
    return cls(env, owner, gtype, **options)


__all__ = [
    "AllocationGroup", "EncryptionGroup", "EnforcedGroup", "Env", "GroupError", "KeyTree",
    "KeyedGroup", "LkhGroup", "MODELS", "PolicyRule", "create_group",
]
