"""Sweeps, category comparisons and scenario replay over the three models.

Every measured operation runs on a freshly built group: members are added
with the uncharged fast path, ``p`` contents are published, ledgers are reset,
and then one join, one leave (of that joiner) and one publish are measured in
turn. Times are the closed form of the cost profile over the counters.
"""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, TextIO

from .core import (ContentId, Deny, EventKind, GroupHistory, GroupType, Permit, UserId,
                   load_scenario, oracle_access)
from .crypto import DEFAULT_PROFILE, CryptoCostParams, ModelProvider, make_provider
from .models import MODELS, EnforcedGroup, Env, create_group

CSV_HEADER = ("model", "gtype", "op", "role", "n", "p", "time_s", "bytes_sent", "bytes_recv",
              "sym_enc", "sym_dec", "asym_enc", "asym_dec", "keygen")
SUMMARY_HEADER = ("category", "n", "p", "op", "gtype", "model", "time_s", "bytes",
                  "time_norm", "bytes_norm")
ALL_MODELS = tuple(MODELS)
OPS = ("join", "leave", "publish")
CATEGORIES = {"passive": 2000, "normal": 4000, "active": 8000}
CATEGORY_N = 4000
OWNER = UserId(1)


@dataclass(frozen=True)
class SweepConfig:
    models: tuple[str, ...] = ALL_MODELS
    gtypes: tuple[GroupType, ...] = (GroupType.G2, GroupType.G3, GroupType.G4)
    n_list: tuple[int, ...] = (10, 50, 100, 1000, 10000)
    p_list: tuple[int, ...] = (10, 50, 100)
    degree: int = 4
    content_size: int = 102400
    seed: int = 0
    profile: CryptoCostParams = DEFAULT_PROFILE
    replicas: int = 2

    def __post_init__(self):
        if not self.models:
            raise ValueError("no models selected")
        unknown = [m for m in self.models if m not in MODELS]
        if unknown:
            raise ValueError(f"unknown model(s): {', '.join(unknown)}")
        if not self.gtypes:
            raise ValueError("no group types selected")
        if min(self.n_list, default=0) < 1 or min(self.p_list, default=0) < 0 or not self.p_list:
            raise ValueError("n values must be >= 1 and p values >= 0")
        if self.content_size < 1:
            raise ValueError("content size must be positive")


@dataclass
class ResultRow:
    model: str
    gtype: str
    op: str
    role: str
    n: int
    p: int
    time_s: float
    bytes_sent: int
    bytes_recv: int
    sym_enc: int
    sym_dec: int
    asym_enc: int
    asym_dec: int
    keygen: int
    sym_bytes: int = field(default=0, compare=False)
    wall_s: float = field(default=0.0, compare=False)

    def key(self) -> tuple:
        return (self.model, self.gtype, self.op, self.role, self.n, self.p)

    def csv_fields(self) -> list[str]:
        return [self.model, self.gtype, self.op, self.role, str(self.n), str(self.p),
                repr(float(self.time_s)), str(self.bytes_sent), str(self.bytes_recv),
                str(self.sym_enc), str(self.sym_dec), str(self.asym_enc), str(self.asym_dec),
                str(self.keygen)]


def _row(env: Env, group: EnforcedGroup, op: str, role: str, u: UserId, n: int, p: int,
         wall: float = 0.0) -> ResultRow:
    ledger = env.ledger(u)
    traffic = env.net.traffic[u]
    return ResultRow(group.model, group.gtype.value, op, role, n, p, ledger.closed_form_time(),
                     traffic.bytes_sent, traffic.bytes_received, *ledger.counters(), wall)


def _worst_member(env: Env, group: EnforcedGroup, skip: set) -> Optional[UserId]:
    """Sync every other member; return the one with the highest cost."""
    worst, worst_key = None, None
    for m in group.others():
        if m in skip:
            continue
        group.sync(m)
        key = (env.ledger(m).closed_form_time(), env.net.traffic[m].bytes_received, -m)
        if worst_key is None or key > worst_key:
            worst, worst_key = m, key
    return worst


def build_group(model: str, gtype: GroupType, n: int, p: int, cfg: SweepConfig,
                content: Optional[bytes] = None) -> tuple[Env, EnforcedGroup]:
    """Owner plus ``n`` members, ``p`` contents by the owner, ledgers reset."""
    env = Env(ModelProvider(), cfg.profile, seed=cfg.seed)
    group = create_group(model, env, OWNER, gtype, degree=cfg.degree, replicas=cfg.replicas)
    for i in range(n):
        group.fast_join(UserId(OWNER + 1 + i))
    content = content if content is not None else bytes(cfg.content_size)
    for _ in range(p):
        group.publish(OWNER, content)
    env.reset_ledgers()
    return env, group


def measure_point(model: str, gtype: GroupType, n: int, p: int, cfg: SweepConfig) -> list[ResultRow]:
    content = bytes(cfg.content_size)
    env, group = build_group(model, gtype, n, p, cfg, content)
    rows = []
    joiner = UserId(OWNER + n + 1)

    t0 = time.perf_counter()
    group.join(joiner)
    wall = time.perf_counter() - t0
    group.sync(joiner)
    rows.append(_row(env, group, "join", "owner", OWNER, n, p, wall))
    rows.append(_row(env, group, "join", "joiner", joiner, n, p))
    member = _worst_member(env, group, {joiner})
    if member is not None:
        rows.append(_row(env, group, "join", "member", member, n, p))

    env.reset_ledgers()
    t0 = time.perf_counter()
    group.leave(joiner)
    wall = time.perf_counter() - t0
    rows.append(_row(env, group, "leave", "owner", OWNER, n, p, wall))
    rows.append(_row(env, group, "leave", "leaver", joiner, n, p))
    member = _worst_member(env, group, {joiner})
    if member is not None:
        rows.append(_row(env, group, "leave", "member", member, n, p))

    env.reset_ledgers()
    t0 = time.perf_counter()
    group.publish(OWNER, content)
    wall = time.perf_counter() - t0
    rows.append(_row(env, group, "publish", "owner", OWNER, n, p, wall))
    return rows


def run_sweep(cfg: SweepConfig) -> list[ResultRow]:
    rows = []
    for model in cfg.models:
        for gtype in cfg.gtypes:
            for n in cfg.n_list:
                for p in cfg.p_list:
                    rows.extend(measure_point(model, gtype, n, p, cfg))
    rows.sort(key=ResultRow.key)
    return rows


# --- category comparison ----------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    op: str
    gtype: str
    model: str
    time_s: float
    bytes: int
    time_norm: float
    bytes_norm: float


@dataclass
class ScenarioSummary:
    category: str
    n: int
    p: int
    rows: list[SummaryRow]

    def cell(self, op: str, gtype: str, model: str) -> SummaryRow:
        for r in self.rows:
            if (r.op, r.gtype, r.model) == (op, gtype, model):
                return r
        raise KeyError((op, gtype, model))


def min_max(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def run_category_comparison(category: str, cfg: Optional[SweepConfig] = None) -> ScenarioSummary:
    """Owner-side costs of every (op, group type) axis, min-max normalized
    across the models on each axis."""
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r} (expected {', '.join(CATEGORIES)})")
    cfg = cfg or SweepConfig()
    n, p = CATEGORY_N, CATEGORIES[category]
    raw: dict[tuple, ResultRow] = {}
    for model in cfg.models:
        for gtype in cfg.gtypes:
            for row in measure_point(model, gtype, n, p, cfg):
                if row.role == "owner":
                    raw[(row.op, row.gtype, model)] = row
    out = []
    for op in OPS:
        for gtype in cfg.gtypes:
            cells = [raw[(op, gtype.value, m)] for m in cfg.models]
            times = [c.time_s for c in cells]
            traffic = [c.bytes_sent + c.bytes_recv for c in cells]
            for m, t, b, tn, bn in zip(cfg.models, times, traffic, min_max(times), min_max(traffic)):
                out.append(SummaryRow(op, gtype.value, m, t, b, tn, bn))
    return ScenarioSummary(category, n, p, out)


# --- scenario replay --------------------------------------------------------

class OracleDivergence(AssertionError):
    def __init__(self, seq: int, user: UserId, content: ContentId, expected, got):
        super().__init__(f"seq {seq}: user {user} content {content}: oracle {expected.value}, "
                         f"model {got.value}")
        self.seq, self.user, self.content = seq, user, content
        self.expected, self.got = expected, got


def content_bytes(cid: ContentId) -> bytes:
    return b"content-%d" % cid


def replay(history: GroupHistory, model: str, *, real: bool = False, degree: int = 4,
           profile: CryptoCostParams = DEFAULT_PROFILE, seed: int = 0,
           check: str = "all", group_cls: Optional[type] = None) -> list[ResultRow]:
    """Apply ``history`` to a fresh group and compare access with the oracle.

    ``check`` is ``"all"`` (every user and content after every event),
    ``"end"`` (every pair after the last event) or ``"none"``. A permitted
    access must also return the published plaintext. Raises
    OracleDivergence on the first mismatch.
    """
    if check not in ("all", "end", "none"):
        raise ValueError("check must be 'all', 'end' or 'none'")
    env = Env(make_provider(real), profile, seed=seed)
    users = history.users()
    group: Optional[EnforcedGroup] = None
    rows = []
    for i, ev in enumerate(history.events):
        env.reset_ledgers()
        actor = ev.user
        if ev.kind is EventKind.CREATE:
            cls = group_cls or MODELS[model]
            group = cls(env, ev.user, history.gtype, history.group, degree=degree)
            actor = ev.user
        elif ev.kind is EventKind.JOIN:
            group.join(ev.user)
            actor = group.owner
        elif ev.kind is EventKind.LEAVE:
            group.leave(ev.user)
            actor = group.owner
        else:
            group.publish(ev.user, content_bytes(ev.content), ev.content)
        rows.append(_row(env, group, ev.kind.value.lower(), "owner" if actor == group.owner else "author",
                         actor, len(group.members) - 1, len(group.contents)))
        if check == "all" or (check == "end" and i == len(history.events) - 1):
            check_access(history, group, users, ev.seq)
    return rows


def check_access(history: GroupHistory, group: EnforcedGroup, users: Iterable[UserId], t: int) -> None:
    for c in list(group.contents):
        for u in users:
            expected = oracle_access(history, u, c, t)
            plain = group.access(u, c)
            got = Permit if plain is not None else Deny
            if got != expected:
                raise OracleDivergence(t, u, c, expected, got)
            if plain is not None and plain != content_bytes(c):
                raise OracleDivergence(t, u, c, expected, got)


def run_scenario(path: str | Path, model: str, gtype: GroupType, **options) -> list[ResultRow]:
    return replay(load_scenario(path, gtype), model, **options)


# --- output -----------------------------------------------------------------

def _open_out(path) -> tuple[TextIO, bool]:
    if hasattr(path, "write"):
        return path, False
    return open(path, "w", newline="", encoding="ascii"), True


def emit_csv(rows: Iterable[ResultRow], path) -> None:
    out, close = _open_out(path)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in sorted(rows, key=ResultRow.key):
            w.writerow(row.csv_fields())
    finally:
        if close:
            out.close()


def emit_summary(summary: ScenarioSummary, path) -> None:
    out, close = _open_out(path)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for r in summary.rows:
            w.writerow([summary.category, summary.n, summary.p, r.op, r.gtype, r.model,
                        repr(float(r.time_s)), r.bytes, repr(r.time_norm), repr(r.bytes_norm)])
    finally:
        if close:
            out.close()


def csv_text(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    emit_csv(rows, buf)
    return buf.getvalue()
