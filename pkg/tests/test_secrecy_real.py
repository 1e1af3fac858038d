import pytest

from dosnsim.core import GroupType
from dosnsim.crypto import RealProvider, WrongKey
from dosnsim.models import EncryptionGroup, Env, LkhGroup

from .helpers import attacker_keys, opens, secrecy_violations


@pytest.fixture(scope="module")
def provider():
    return RealProvider()


@pytest.mark.parametrize("model", ["encryption", "lkh"])
@pytest.mark.parametrize("gtype", list(GroupType))
def test_no_secrecy_breach(model, gtype, provider):
    assert secrecy_violations(model, gtype, provider) == []


@pytest.mark.parametrize("cls", [EncryptionGroup, LkhGroup])
def test_attack_is_not_vacuous(cls, provider):
    # a G4 leaver legitimately keeps pre-leave contents: the attacker must find that
    g = cls(Env(provider), 1, GroupType.G4)
    g.join(2)
    c = g.publish(1, b"shared")
    g.sync(2)
    g.leave(2)
    assert opens(g, attacker_keys(g, 2), c)


def test_real_wrong_key_is_cryptographic(provider):
    g = EncryptionGroup(Env(provider), 1, GroupType.G3)
    g.join(2)
    c = g.publish(1, b"x")
    rec = g.contents[c]
    blob = g.net.dht_get(rec.blob_key, 0)
    forged = provider.gen_sym(None)
    with pytest.raises(WrongKey):
        provider.open_sym(forged, blob, None)
    assert g.access(2, c) == b"x"
