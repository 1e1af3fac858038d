import pytest

from dosnsim.netsim import ENVELOPE_BYTES, NetError, Network


def test_dht_put_get():
    net = Network()
    ref = net.dht_put("k", b"abcd", [2, 3], sender=1)
    assert ref.size == 4 and ref.replicas == {2, 3}
    assert net.dht_get("k", reader=4) == b"abcd"
    assert net.traffic[1].bytes_sent == 4  # no envelope on DHT puts
    assert net.traffic[4].bytes_received == 4
    assert "k" in net
    with pytest.raises(NetError, match="key exists"):
        net.dht_put("k", b"x", [], sender=1)
    with pytest.raises(NetError, match="not found"):
        net.dht_get("missing", reader=1)
    net.dht_delete("k")
    assert "k" not in net


def test_mailbox_envelope_and_drain():
    net = Network()
    net.mailbox_append(5, b"x" * 10, sender=1)
    net.mailbox_append(5, b"y" * 3, sender=2)
    assert net.mailbox_pending(5) == 2
    assert net.traffic[1].bytes_sent == 10 + ENVELOPE_BYTES
    assert net.mailbox_drain(5) == [b"x" * 10, b"y" * 3]
    assert net.traffic[5].bytes_received == 13
    assert net.mailbox_drain(5) == []


def test_gml_sequence_numbers():
    net = Network()
    assert net.gml_head(1) == 0
    seqs = [net.gml_append(1, bytes([i]), sender=1) for i in range(4)]
    assert seqs == [1, 2, 3, 4]
    got = net.gml_read_since(1, 2, reader=9)
    assert [s for s, _ in got] == [3, 4]
    assert net.traffic[9].bytes_received == 2
    assert net.gml_read_since(1, 4, reader=9) == []
    assert net.gml_read_since(2, 0, reader=9) == []


def test_replicate_charges_new_holders_only():
    net = Network()
    net.dht_put("c", bytes(100), [2, 3], sender=1)
    net.reset_traffic()
    ref = net.replicate("c", [3, 4], sender=1)
    assert ref.replicas == {3, 4}
    assert net.traffic[1].bytes_sent == 100
    assert net.traffic[4].bytes_received == 100
    assert net.traffic[3].bytes_received == 0
