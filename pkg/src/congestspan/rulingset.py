"""Deterministic ruling sets, on the graph and on virtual cluster graphs.

The construction recursively splits the candidate ID range into t blocks,
solves the blocks in parallel, and merges them sequentially: each surviving
candidate of an earlier block floods a knock-out message to a fixed depth c,
and any still-alive candidate of a later block that hears it drops out. With
t chosen so that t**q covers the ID range, the recursion has at most q
levels, which yields a (c+1, c*q)-ruling set; the default c=2 gives (3, 2q).

Because the recursion tree is pure ID arithmetic on the globally known range,
every vertex can compute the whole merge timetable locally; the only traffic
is the knock-out flood itself, which runs in broadcast mode (one message
type, relayed with a decrementing hop counter by candidates and
non-candidates alike). On a virtual cluster graph each flood hop costs one
down-cast, one exchange round, and one up-cast within the cluster trees.

Empty blocks produce no flood and therefore consume no rounds; the
orchestrator can see they are empty, so skipping them needs no messages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from . import comm
from .clusters import ClusterSet, verify_cluster_tree
from .comm import Net, Orientation
from .exact import ceil_log2_int, nth_root_ceil
from .graph import Graph, bfs_on_adjacency
from .sim import NodeApi, NodeProgram, Message


class RulingError(ValueError):
    pass


@dataclass(frozen=True)
class RulingParams:
    """q bounds the recursion depth, c is the knock-out depth."""
    q: int
    c: int = 2

    def __post_init__(self):
        if self.q < 1 or self.c < 1:
            raise RulingError("need q >= 1 and c >= 1")

    @property
    def alpha(self) -> int:
        return self.c + 1

    @property
    def beta(self) -> int:
        return self.c * self.q


@dataclass(frozen=True)
class RulingSet:
    members: FrozenSet[int]
    target: FrozenSet[int]
    alpha: int
    beta: int
    rounds: int


@dataclass(frozen=True)
class RulingVerdict:
    ok: bool
    failure: Optional[str] = None
    detail: str = ""


def check_ruling(adjacency: Dict[int, Sequence[int]], members: Iterable[int],
                 target: Iterable[int], alpha: int,
                 beta: Optional[int] = None) -> RulingVerdict:
    """Brute-force verification: alpha-separation and beta-domination.

    adjacency may come from a Graph or a VirtualClusterGraph. beta=None skips
    the domination clause (used for precondition checks).
    """
    members = sorted(set(members))
    target = sorted(set(target))
    extra = [m for m in members if m not in set(target)]
    if extra:
        return RulingVerdict(False, "membership",
                             f"member {extra[0]} is outside the target set")
    dist_from_member: Dict[int, Dict[int, float]] = {}
    for m in members:
        dist_from_member[m] = bfs_on_adjacency(adjacency, m)
    for i, m in enumerate(members):
        for m2 in members[i + 1:]:
            d = dist_from_member[m].get(m2, math.inf)
            if d < alpha:
                return RulingVerdict(False, "separation",
                                     f"members {m} and {m2} at distance {d} < {alpha}")
    if beta is not None:
        for t in target:
            d = min((dist_from_member[m].get(t, math.inf) for m in members),
                    default=math.inf)
            if d > beta:
                return RulingVerdict(False, "domination",
                                     f"target {t} at distance {d} > {beta} from every member")
    return RulingVerdict(True)


# ---------------------------------------------------------------------------
# Block arithmetic for the ID-range recursion.

def _block_widths(width: int, t: int) -> List[int]:
    """Interval width per recursion level, from the full range down to 1."""
    widths = [width]
    while widths[-1] > 1:
        widths.append(-(-widths[-1] // t))
    return widths


def _child_block(ident: int, lo: int, widths: List[int], level: int) -> int:
    """Index of ident's level-(level+1) block within its level-level interval."""
    off = ident - lo
    return (off % widths[level]) // widths[level + 1]


# ---------------------------------------------------------------------------
# The knock-out flood over the (virtual) cluster structure.

class _KnockSend(NodeProgram):
    __slots__ = ("center", "scalar")

    def __init__(self, center: int, hops_left: int, own_pop: bool):
        self.center = center
        self.scalar = (hops_left << 1) | (1 if own_pop else 0)

    def on_start(self, api: NodeApi) -> None:
        api.broadcast(comm.TAG_KNOCK, (self.center,), self.scalar)
        api.halt()


class _KnockListen(NodeProgram):
    __slots__ = ("center", "own_pop", "heard")

    def __init__(self, center: int, own_pop: bool):
        self.center = center
        self.own_pop = own_pop
        self.heard: Optional[int] = None   # max hops-left received

    def on_round(self, api: NodeApi, inbox: Dict[int, Message]) -> None:
        for _, msg in inbox.items():
            if msg.tag != comm.TAG_KNOCK:
                continue
            if msg.ids[0] == self.center:
                continue
            if not (bool(msg.scalar & 1) or self.own_pop):
                continue
            h = msg.scalar >> 1
            if self.heard is None or h > self.heard:
                self.heard = h
        api.halt()


def _flood(net: Net, orient: Orientation, initiators: Sequence[int], depth: int,
           popular: Optional[Set[int]], label: str) -> Set[int]:
    """Flood a knock-out from the initiator clusters to the given virtual
    depth; returns every cluster (center) that heard it.

    With popular given, the flood travels only superedges with a popular
    side, matching the virtual cluster graph of the phase.
    """
    heard: Set[int] = set()
    relayed: Set[int] = set(initiators)
    frontier: List[Tuple[int, int]] = [(c, depth - 1) for c in sorted(initiators)]
    trivial = orient.max_depth() == 0
    wave = 0
    while frontier:
        wave += 1
        if not trivial:
            payload = {c: ((), h) for c, h in frontier}
            comm.downcast_single(net, orient, payload.keys(), comm.TAG_KNOCK_SEND,
                                 f"{label}.k{wave}.down", payload)
        send_progs: Dict[int, NodeProgram] = {}
        listen_progs: Dict[int, _KnockListen] = {}
        for c, h in frontier:
            pop = popular is None or c in popular
            for v in orient.members[c]:
                send_progs[v] = _KnockSend(c, h, pop)
        for v, c in orient.center_of.items():
            if v not in send_progs:
                listen_progs[v] = _KnockListen(
                    c, popular is None or c in popular)
        net.episode(f"{label}.k{wave}.x", {**send_progs, **listen_progs},
                    mode=comm.sim.BROADCAST)
        got: Dict[int, int] = {}
        if trivial:
            for v, prog in listen_progs.items():
                if prog.heard is not None:
                    got[v] = prog.heard
        else:
            vals = {v: (prog.heard,) for v, prog in listen_progs.items()
                    if prog.heard is not None}
            touched = sorted({orient.center_of[v] for v in vals})
            if touched:
                best = comm.upcast_best(net, orient, vals, f"{label}.k{wave}.up",
                                        prefer_max=True, width=0, centers=touched)
                got = {c: b[0] for c, b in best.items() if b is not None}
        heard.update(got)
        frontier = [(c, h - 1) for c, h in sorted(got.items())
                    if h >= 1 and c not in relayed]
        relayed.update(c for c, _ in frontier)
    return heard


def run_knockout_schedule(net: Net, orient: Orientation, candidates: Set[int],
                          params: RulingParams, id_range: Tuple[int, int],
                          popular: Optional[Set[int]] = None,
                          label: str = "rs") -> Set[int]:
    """Execute the full merge timetable; returns the surviving candidates."""
    lo, hi = id_range
    width = hi - lo + 1
    alive: Set[int] = set(candidates)
    if width <= 1 or len(alive) <= 1:
        return alive
    t = max(2, nth_root_ceil(width, params.q))
    widths = _block_widths(width, t)
    for level in range(len(widths) - 2, -1, -1):
        for block in range(t):
            senders = sorted(c for c in alive
                             if _child_block(c, lo, widths, level) == block)
            if not senders:
                continue
            heard = _flood(net, orient, senders, params.c, popular,
                           f"{label}.L{level}.b{block}")
            for c in heard:
                if c in alive and _child_block(c, lo, widths, level) > block:
                    alive.discard(c)
    return alive


# ---------------------------------------------------------------------------
# Public constructions.

def congest_ruling_set(g: Graph, a: Iterable[int], params: RulingParams,
                       net: Optional[Net] = None) -> RulingSet:
    """Ruling set for a set of vertices, executed through the simulator.

    The knock-out flood relays through every vertex, candidate or not, with a
    decrementing hop counter, all in broadcast mode.
    """
    target = frozenset(a)
    if not target:
        raise RulingError("candidate set is empty")
    unknown = target - set(g.vertices)
    if unknown:
        raise RulingError(f"candidates outside the graph: {sorted(unknown)[:4]}")
    net = net or Net(g)
    orient = Orientation(
        center_of={v: v for v in g.vertices},
        parent={v: None for v in g.vertices},
        children={v: () for v in g.vertices},
        depth={v: 0 for v in g.vertices},
        height={v: 0 for v in g.vertices},
        members={v: (v,) for v in g.vertices},
    )
    rounds0 = net.trace.rounds_total
    members = run_knockout_schedule(net, orient, set(target), params,
                                    g.id_range, popular=None, label="rs")
    return RulingSet(frozenset(members), target, params.alpha, params.beta,
                     net.trace.rounds_total - rounds0)


def aglp_ruling_set(g: Graph, a: Iterable[int], net: Optional[Net] = None) -> RulingSet:
    """The q = ceil(log2 n) instantiation: a (3, 2*ceil(log2 n))-ruling set."""
    q = max(1, ceil_log2_int(g.n))
    return congest_ruling_set(g, a, RulingParams(q=q, c=2), net=net)


def supergraph_ruling_set(g: Graph, p: ClusterSet, a: Iterable[int],
                          params: RulingParams, r_bound: int,
                          spanner_edges: Optional[Set] = None,
                          popular: Optional[Set[int]] = None,
                          net: Optional[Net] = None) -> RulingSet:
    """Ruling set over clusters, simulated on the host graph.

    Clusters are identified by their center IDs. Every cluster must carry a
    tree of depth at most r_bound inside spanner_edges (checked when the edge
    set is supplied); each virtual flood hop is simulated by tree casts.
    """
    target = frozenset(a)
    by_center = p.by_center()
    unknown = target - set(by_center)
    if unknown:
        raise RulingError(f"candidate clusters not in the partition: {sorted(unknown)[:4]}")
    if spanner_edges is not None:
        for c in p.clusters:
            verdict = verify_cluster_tree(c, spanner_edges, r_bound)
            if not verdict.ok:
                raise RulingError(
                    f"cluster {c.center} violates the tree precondition "
                    f"({verdict.failure}): {verdict.detail}")
    net = net or Net(g)
    orient = comm.orientation_from_parents({c.center: c.parent for c in p.clusters})
    rounds0 = net.trace.rounds_total
    members = run_knockout_schedule(net, orient, set(target), params,
                                    g.id_range, popular=popular, label="srs")
    return RulingSet(frozenset(members), target, params.alpha, params.beta,
                     net.trace.rounds_total - rounds0)
