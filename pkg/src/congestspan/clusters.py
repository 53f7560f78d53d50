"""Clusters, partitions, the virtual cluster graph, and superclustering.

Both spanner constructions work phase by phase on a collection of disjoint
clusters, each with a designated center and a spanning tree living inside the
spanner built so far. Popular clusters are merged into superclusters by a
bounded-depth BFS over the virtual cluster graph; the merge is executed
through the simulator (run_supercluster_bfs), while reference_supercluster is
a centralized implementation of the same tie-breaking used purely as a test
oracle.

Tie-breaking is deterministic everywhere: on simultaneous arrivals a cluster
joins the exploration with the smallest root-center ID, then the smallest
witness edge in canonical (min endpoint, max endpoint) order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from .graph import Edge, Graph, edge_key
from . import comm
from .comm import Net, Orientation


@dataclass(frozen=True)
class Cluster:
    """A cluster: center, members, and a tree over the members rooted at
    the center, stored as a parent map (None for the center)."""
    center: int
    members: FrozenSet[int]
    parent: Dict[int, Optional[int]]

    def depth_map(self) -> Dict[int, int]:
        depths: Dict[int, int] = {}
        for v in self.members:
            d, w, seen = 0, v, set()
            while self.parent.get(w) is not None:
                if w in seen:
                    raise ValueError(f"cycle in tree of cluster {self.center}")
                seen.add(w)
                w = self.parent[w]
                d += 1
            depths[v] = d
        return depths

    def radius(self) -> int:
        return max(self.depth_map().values(), default=0)

    def tree_edges(self) -> Set[Edge]:
        return {edge_key(v, p) for v, p in self.parent.items() if p is not None}

    def as_dict(self) -> dict:
        return {
            "center": self.center,
            "members": sorted(self.members),
            "tree_parents": {str(v): p for v, p in sorted(self.parent.items())},
        }


@dataclass(frozen=True)
class ClusterSet:
    """The phase input: pairwise-disjoint clusters."""
    clusters: Tuple[Cluster, ...]
    phase: int

    def __post_init__(self):
        seen: Set[int] = set()
        for c in self.clusters:
            if c.center not in c.members:
                raise ValueError(f"center {c.center} outside its member set")
            overlap = seen & c.members
            if overlap:
                raise ValueError(f"clusters overlap on {sorted(overlap)[:4]}")
            seen |= c.members

    def by_center(self) -> Dict[int, Cluster]:
        return {c.center: c for c in self.clusters}

    def member_center(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for c in self.clusters:
            for v in c.members:
                out[v] = c.center
        return out

    def covered(self) -> Set[int]:
        out: Set[int] = set()
        for c in self.clusters:
            out |= c.members
        return out

    def as_dict(self) -> dict:
        return {"phase": self.phase,
                "clusters": [c.as_dict() for c in self.clusters]}

    def __len__(self) -> int:
        return len(self.clusters)


def singleton_partition(g: Graph) -> ClusterSet:
    """One radius-0 cluster per vertex: the phase-0 input."""
    clusters = tuple(Cluster(v, frozenset([v]), {v: None}) for v in g.vertices)
    return ClusterSet(clusters, phase=0)


@dataclass(frozen=True)
class RadiusSequence:
    """Cluster-radius bounds per phase: values[i] bounds Rad(P_i)."""
    delta: int
    values: Tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    @staticmethod
    def closed_form(delta: int, i: int) -> int:
        return delta * sum((2 * delta + 1) ** j for j in range(i))


def radius_sequence(delta: int, ell: int) -> RadiusSequence:
    """R_0 = 0 and R_{i+1} = (2*delta+1)*R_i + delta, for i in [0, ell]."""
    if delta < 1 or ell < 0:
        raise ValueError("need delta >= 1 and ell >= 0")
    values = [0]
    for _ in range(ell):
        values.append((2 * delta + 1) * values[-1] + delta)
    return RadiusSequence(delta, tuple(values))


@dataclass(frozen=True)
class VirtualClusterGraph:
    """Supervertices are cluster centers; superedges connect each popular
    cluster to its neighboring clusters, with the lexicographically smallest
    connecting graph edge kept as witness."""
    supervertices: Tuple[int, ...]
    adjacency: Dict[int, Tuple[int, ...]]
    witness: Dict[Tuple[int, int], Edge]
    popular: FrozenSet[int]

    def edge_count(self) -> int:
        return len(self.witness)


def build_cluster_graph(p: ClusterSet, popular: Iterable[int], g: Graph) -> VirtualClusterGraph:
    """Superedges are exactly the adjacent cluster pairs with a popular side.

    Edges touching vertices outside the partition (dormant vertices) are
    ignored; they connect no current clusters.
    """
    popular_set = frozenset(popular)
    center_of = p.member_center()
    unknown = popular_set - set(c.center for c in p.clusters)
    if unknown:
        raise ValueError(f"popular clusters not in the partition: {sorted(unknown)}")
    adj: Dict[int, Set[int]] = {c.center: set() for c in p.clusters}
    witness: Dict[Tuple[int, int], Edge] = {}
    for u, v in g.edges():
        cu, cv = center_of.get(u), center_of.get(v)
        if cu is None or cv is None or cu == cv:
            continue
        if cu not in popular_set and cv not in popular_set:
            continue
        key = (cu, cv) if cu < cv else (cv, cu)
        e = edge_key(u, v)
        if key not in witness or e < witness[key]:
            witness[key] = e
        adj[cu].add(cv)
        adj[cv].add(cu)
    return VirtualClusterGraph(
        supervertices=tuple(c.center for c in p.clusters),
        adjacency={c: tuple(sorted(ns)) for c, ns in adj.items()},
        witness=witness,
        popular=popular_set,
    )


@dataclass(frozen=True)
class JoinInfo:
    root: int
    pred: Optional[int]
    witness: Optional[Edge]
    wave: int


@dataclass
class SuperclusterOutcome:
    joins: Dict[int, JoinInfo]      # center of joined cluster -> how it joined
    rounds: int = 0

    def witness_edges(self) -> List[Tuple[int, Edge]]:
        """(joining center, witness edge) for every non-root join."""
        return [(c, j.witness) for c, j in sorted(self.joins.items())
                if j.witness is not None]


def reference_supercluster(vg: VirtualClusterGraph, ruling: Iterable[int],
                           delta: int) -> SuperclusterOutcome:
    """Centralized BFS oracle for the superclustering step.

    Wave k joins every unjoined cluster adjacent to the wave-(k-1) frontier,
    choosing the minimal (root ID, witness edge) candidate.
    """
    roots = sorted(set(ruling))
    joins: Dict[int, JoinInfo] = {r: JoinInfo(r, None, None, 0) for r in roots}
    frontier = list(roots)
    for wave in range(1, delta + 1):
        if not frontier:
            break
        best: Dict[int, Tuple[int, Edge, int]] = {}
        for f in sorted(frontier):
            root = joins[f].root
            for t in vg.adjacency.get(f, ()):
                if t in joins:
                    continue
                key = (f, t) if f < t else (t, f)
                cand = (root, vg.witness[key], f)
                if t not in best or cand[:2] < best[t][:2]:
                    best[t] = cand
        frontier = []
        for t in sorted(best):
            root, wedge, pred = best[t]
            joins[t] = JoinInfo(root, pred, wedge, wave)
            frontier.append(t)
    return SuperclusterOutcome(joins=joins)


# ---------------------------------------------------------------------------
# Distributed superclustering through the simulator.

class _ExploreListen(comm.NodeProgram):
    """Member of an unjoined cluster listens for exploration arrivals.

    Keeps, per (root, smaller endpoint) pair, the smallest other endpoint,
    so the three-stage aggregation below can reconstruct the exact minimal
    (root, witness edge) candidate.
    """

    __slots__ = ("own_pop", "cands")

    def __init__(self, own_pop: bool):
        self.own_pop = own_pop
        self.cands: Dict[Tuple[int, int], int] = {}

    def on_round(self, api, inbox):
        me = api.vertex
        for sender, msg in inbox.items():
            if msg.tag != comm.TAG_EXPLORE:
                continue
            sender_pop = bool(msg.scalar & 1)
            if not (sender_pop or self.own_pop):
                continue
            root = msg.ids[0]
            m, mm = (sender, me) if sender < me else (me, sender)
            cur = self.cands.get((root, m))
            if cur is None or mm < cur:
                self.cands[(root, m)] = mm
        api.halt()


class _ExploreSend(comm.NodeProgram):
    """Frontier member broadcasts the exploration once."""

    __slots__ = ("root", "scalar")

    def __init__(self, root: int, hops_left: int, own_pop: bool):
        self.root = root
        self.scalar = (hops_left << 1) | (1 if own_pop else 0)

    def on_start(self, api):
        api.broadcast(comm.TAG_EXPLORE, (self.root,), self.scalar)
        api.halt()


def run_supercluster_bfs(net: Net, orient: Orientation, ruling: Set[int],
                         delta: int, popular: Set[int],
                         vgraph: Optional[VirtualClusterGraph] = None
                         ) -> SuperclusterOutcome:
    """Simulate the depth-delta exploration of the virtual cluster graph.

    ruling must be 3-separated in the virtual graph; passing vgraph enforces
    that as a hard error. Per wave: the frontier clusters stream the root ID
    down their trees, members broadcast one exploration message, reached
    clusters converge the minimal candidate in three aggregation stages
    (pair, then tie-breaking endpoint, then the winning edge back down), and
    the vertex holding the winning edge adds it to the spanner.
    """
    if vgraph is not None:
        _require_separated(vgraph, ruling)
    rounds0 = net.trace.rounds_total
    roots = sorted(ruling)
    joins: Dict[int, JoinInfo] = {r: JoinInfo(r, None, None, 0) for r in roots}
    member_center = orient.center_of
    frontier: List[Tuple[int, int]] = [(r, delta) for r in roots]  # (center, hops left)

    for wave in range(1, delta + 1):
        senders = [(c, h) for c, h in frontier if h >= 1]
        if not senders:
            break
        # stage 0: the frontier centers stream <root, hops> to their members
        payload = {c: ((joins[c].root,), h - 1) for c, h in senders}
        received = comm.downcast_single(net, orient, payload.keys(), comm.TAG_RELAY,
                                        f"w{wave}.relay", payload)
        # stage 1: frontier members broadcast the exploration
        senders_progs: Dict[int, comm.NodeProgram] = {}
        listen_progs: Dict[int, _ExploreListen] = {}
        for c, h in senders:
            pop = c in popular
            root = joins[c].root
            for v in orient.members[c]:
                senders_progs[v] = _ExploreSend(root, h - 1, pop)
        for v, c in member_center.items():
            if c not in joins and v not in senders_progs:
                listen_progs[v] = _ExploreListen(c in popular)
        net.episode(f"w{wave}.explore", {**senders_progs, **listen_progs},
                    mode=comm.sim.BROADCAST)

        # stage 2: three-stage minimal-candidate aggregation per reached cluster
        cands: Dict[int, Dict[Tuple[int, int], int]] = {}
        for v, prog in listen_progs.items():
            if prog.cands:
                cands.setdefault(member_center[v], {})
        reached = sorted(cands)
        if not reached:
            frontier = []
            continue
        vals1 = {v: min(p.cands) for v, p in listen_progs.items() if p.cands}
        best1 = comm.upcast_best(net, orient, vals1, f"w{wave}.min1",
                                 width=2, centers=reached)
        # ask the members for the matching smallest other endpoint
        down1 = {c: (best1[c], 0) for c in reached if best1[c] is not None}
        comm.downcast_single(net, orient, down1.keys(), comm.TAG_WIN1,
                             f"w{wave}.win1", down1)
        vals2: Dict[int, Tuple[int, ...]] = {}
        for v, prog in listen_progs.items():
            c = member_center[v]
            if c in down1:
                key = tuple(best1[c])
                mm = prog.cands.get((key[0], key[1]))
                if mm is not None:
                    vals2[v] = (mm,)
        best2 = comm.upcast_best(net, orient, vals2, f"w{wave}.min2",
                                 width=1, centers=sorted(down1))
        # announce the winning edge; the endpoint inside the cluster adds it
        down2 = {}
        for c in sorted(down1):
            root, m = best1[c]
            mm = best2[c][0]
            down2[c] = ((m, mm), 0)
        comm.downcast_single(net, orient, down2.keys(), comm.TAG_WIN2,
                             f"w{wave}.win2", down2)

        new_frontier: List[Tuple[int, int]] = []
        for c in sorted(down1):
            root, m = best1[c]
            mm = best2[c][0]
            wedge = edge_key(m, mm)
            inside = m if member_center.get(m) == c else mm
            outside = wedge[0] if wedge[1] == inside else wedge[1]
            pred = member_center[outside]
            joins[c] = JoinInfo(root, pred, wedge, wave)
            h = delta - wave
            new_frontier.append((c, h))
        frontier = new_frontier

    return SuperclusterOutcome(joins=joins, rounds=net.trace.rounds_total - rounds0)


def _require_separated(vgraph: VirtualClusterGraph, ruling: Set[int]) -> None:
    """Hard precondition: no two ruling clusters within virtual distance 2."""
    ruling = set(ruling)
    for c in sorted(ruling):
        near = set(vgraph.adjacency.get(c, ()))
        for mid in vgraph.adjacency.get(c, ()):
            near.update(vgraph.adjacency.get(mid, ()))
        close = (near & ruling) - {c}
        if close:
            raise ValueError(
                f"ruling clusters {c} and {min(close)} are not 3-separated "
                f"in the virtual cluster graph")


def stitch_superclusters(p: ClusterSet, outcome: SuperclusterOutcome,
                         tree_adj: Dict[int, List[int]]) -> List[Tuple[int, List[int], Dict[int, List[int]]]]:
    """Assemble raw (center, members, tree_adj) triples for the next phase.

    tree_adj is the global per-vertex tree adjacency, already extended with
    this phase's witness edges.
    """
    by_center = p.by_center()
    groups: Dict[int, List[int]] = {}
    for c, info in outcome.joins.items():
        groups.setdefault(info.root, []).append(c)
    raw = []
    for root in sorted(groups):
        members: List[int] = []
        for c in groups[root]:
            members.extend(by_center[c].members)
        members.sort()
        raw.append((root, members, {v: tree_adj[v] for v in members}))
    return raw


@dataclass(frozen=True)
class TreeVerdict:
    ok: bool
    failure: Optional[str] = None
    detail: str = ""


def verify_cluster_tree(c: Cluster, spanner_edges: Set[Edge], bound: int) -> TreeVerdict:
    """Check the per-cluster tree invariant against a spanner edge set.

    Verifies: the parent map spans exactly the members and is rooted at the
    center, every tree edge lies in the spanner, paths stay inside the member
    set, and the depth is at most bound.
    """
    if c.center not in c.members or c.parent.get(c.center, "x") is not None:
        return TreeVerdict(False, "root", f"center {c.center} is not the tree root")
    if set(c.parent) != set(c.members):
        return TreeVerdict(False, "span", "tree does not span exactly the members")
    for v, p in c.parent.items():
        if p is None:
            continue
        if p not in c.members:
            return TreeVerdict(False, "members-only",
                               f"parent {p} of {v} is outside the cluster")
        if edge_key(v, p) not in spanner_edges:
            return TreeVerdict(False, "tree-not-in-spanner",
                               f"tree edge ({v},{p}) missing from the spanner")
    try:
        depths = c.depth_map()
    except ValueError as exc:
        return TreeVerdict(False, "span", str(exc))
    worst = max(depths.values(), default=0)
    if worst > bound:
        deep = max(depths, key=lambda v: depths[v])
        return TreeVerdict(False, "depth",
                           f"vertex {deep} at depth {depths[deep]} > bound {bound}")
    return TreeVerdict(True)
