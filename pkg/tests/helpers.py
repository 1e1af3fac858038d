"""Shared test helpers."""
from dosnsim.core import EventKind, GroupHistory, GroupType
from dosnsim.models import Env, create_group

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    """Remember one acceptance verdict; the terminal summary lists them all."""
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")


def build(model, gtype, members=(), env=None, **options):
    """Owner 1 plus charged joins of ``members``."""
    env = env or Env()
    g = create_group(model, env, 1, gtype, **options)
    for u in members:
        g.join(u)
    return env, g


def apply_history(history: GroupHistory, model: str, env=None, **options):
    env = env or Env()
    g = None
    for ev in history.events:
        if ev.kind is EventKind.CREATE:
            g = create_group(model, env, ev.user, history.gtype, **options)
        elif ev.kind is EventKind.JOIN:
            g.join(ev.user)
        elif ev.kind is EventKind.LEAVE:
            g.leave(ev.user)
        else:
            g.publish(ev.user, b"content-%d" % ev.content, ev.content)
    return env, g


ALL_GTYPES = list(GroupType)
KEYED_MODELS = ["encryption", "lkh"]
ALL_MODELS = ["encryption", "lkh", "allocation"]


def attacker_keys(g, u):
    """Everything ``u`` can derive from its keyring, its private key and the
    whole public message list, trying every key on every entry regardless of
    labels, until nothing new opens."""
    from dosnsim.crypto import WrongKey

    prov = g.provider
    keys = {k.secret: k for k in g.ring(u).keys.values()}
    entries = [e for _, b in g.net.gml_read_since(g.group_id, 0, u) for e in b.entries]
    entries += g.ring(u).pending
    pair = prov.keypair(u)
    grew = True
    while grew:
        grew = False
        for e in entries:
            found = []
            if e.sealed.asym:
                try:
                    found.append(prov.key_from_bytes(prov.open_asym(pair, e.sealed, None), *e.key_ref))
                except WrongKey:
                    pass
            else:
                for k in list(keys.values()):
                    try:
                        found.append(prov.unwrap_key(k, e.sealed, e.key_ref, None))
                    except WrongKey:
                        continue
            for k in found:
                if k.secret not in keys:
                    keys[k.secret] = k
                    grew = True
    return list(keys.values())


def opens(g, keys, cid):
    """True if any key opens the stored content key or the content itself."""
    from dosnsim.crypto import WrongKey

    rec = g.contents[cid]
    entry = g.net.dht_get(rec.key_blob_key, 0)
    blob = g.net.dht_get(rec.blob_key, 0)
    for k in keys:
        for attempt in (lambda: g.provider.unwrap_key(k, entry.sealed, entry.key_ref, None),
                        lambda: g.provider.open_sym(k, blob, None)):
            try:
                attempt()
                return True
            except WrongKey:
                pass
    return False


def secrecy_violations(model, gtype, provider):
    """Run a small real-crypto group and list every secrecy breach found."""
    env = Env(provider)
    g = create_group(model, env, 1, gtype)
    for u in range(2, 7):
        g.join(u)
    for u in list(g.members):
        g.sync(u)
    pre = [g.publish(1, b"before-1"), g.publish(2, b"before-2")]
    leaver = 3
    g.sync(leaver)
    g.leave(leaver)
    post = [g.publish(1, b"after-1"), g.publish(4, b"after-2")]
    g.join(7)
    g.sync(7)
    post.append(g.publish(7, b"after-3"))
    bad = []
    leaver_keys = attacker_keys(g, leaver)
    for c in post:
        if opens(g, leaver_keys, c):
            bad.append(f"leaver opens post-leave content {c}")
    if gtype.leave_bs:
        for c in pre:
            if opens(g, leaver_keys, c):
                bad.append(f"leaver opens re-keyed content {c}")
    if gtype.join_bs:
        joiner_keys = attacker_keys(g, 7)
        for c in pre:
            if opens(g, joiner_keys, c):
                bad.append(f"joiner opens pre-join content {c}")
    # control: a continuing member still reads everything it should
    for c in pre + post:
        if g.access(5, c) is None:
            bad.append(f"member 5 lost content {c}")
    return bad
