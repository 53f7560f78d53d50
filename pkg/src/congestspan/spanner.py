"""The shared phase loop both spanner constructions run on.

A build proceeds in ell+1 phases over a shrinking collection of clusters.
Each non-final phase: orient the cluster trees, exchange cluster IDs with
neighbors, detect popular clusters (variant-specific), pick a 3-separated
ruling set among them, grow superclusters around the ruling clusters by a
bounded-depth exploration of the virtual cluster graph, then interconnect
the clusters left behind (variant-specific). The final phase interconnects
everything that remains. Clusters that interconnect become dormant: their
vertices stay silent in all later exchanges, which makes "neighboring
cluster" always mean a cluster of the current phase.

Every edge enters the spanner with a charge record (vertex, kind, phase);
the verification layer audits the charging rules against these records.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Protocol, Set, Tuple

from . import comm, rulingset
from .clusters import (Cluster, ClusterSet, JoinInfo, SuperclusterOutcome,
                       VirtualClusterGraph, build_cluster_graph,
                       run_supercluster_bfs, stitch_superclusters)
from .comm import Net, Orientation
from .graph import Edge, Graph
from .rulingset import RulingParams

SUPER = "supercluster"
INTER = "interconnect"


class Charge(NamedTuple):
    edge: Edge
    vertex: int
    kind: str
    phase: int


class SpannerEdgeSet:
    """The growing spanner with its charge ledger."""

    def __init__(self, g: Graph):
        self._graph_edges = g.edge_set()
        self.edges: Set[Edge] = set()
        self.charges: List[Charge] = []

    def add(self, e: Edge, vertex: int, kind: str, phase: int) -> None:
        if e not in self._graph_edges:
            raise ValueError(f"edge {e} is not an edge of the host graph")
        self.edges.add(e)
        self.charges.append(Charge(e, vertex, kind, phase))

    def size(self) -> int:
        return len(self.edges)

    def charges_by_vertex(self) -> Dict[int, List[Charge]]:
        out: Dict[int, List[Charge]] = {}
        for ch in self.charges:
            out.setdefault(ch.vertex, []).append(ch)
        return out


@dataclass
class PhaseReport:
    phase: int
    num_clusters: int
    num_popular: int
    num_selected: int
    num_settled: int
    radius_bound: int
    radius_actual: int
    threshold: float
    edges_super: int
    edges_inter: int
    rounds: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PhaseSnapshot:
    """Everything the verifier needs to re-derive and audit one phase."""
    phase: int
    cluster_set: ClusterSet
    popular: FrozenSet[int]
    selected: FrozenSet[int]
    settled: FrozenSet[int]
    joins: Dict[int, JoinInfo]
    vgraph: Optional[VirtualClusterGraph]
    knowledge: Optional[Dict[int, Dict[int, int]]]
    spanner_edges_at_start: FrozenSet[Edge]
    radius_bound: int
    threshold_expo: Optional[Fraction]


@dataclass
class BuildResult:
    algorithm: str
    params: dict
    graph_meta: dict
    spanner: SpannerEdgeSet
    reports: List[PhaseReport]
    snapshots: List[PhaseSnapshot]
    partition: Dict[int, Tuple[int, int]]   # vertex -> (settle phase, cluster center)
    trace: comm.BuildTrace

    @property
    def rounds_total(self) -> int:
        return self.trace.rounds_total


class Variant(Protocol):
    name: str
    ell: int
    delta: int
    ruling_params: RulingParams
    radius_bounds: Tuple[int, ...]

    def threshold_expo(self, phase: int) -> Optional[Fraction]: ...

    def detect(self, net: Net, orient: Orientation,
               nbrmap: Dict[int, Dict[int, int]], phase: int,
               is_final: bool) -> Tuple[Set[int], Optional[Dict[int, Dict[int, int]]]]: ...

    def interconnect(self, net: Net, orient: Orientation,
                     nbrmap: Dict[int, Dict[int, int]], settled: Set[int],
                     knowledge: Optional[Dict[int, Dict[int, int]]],
                     phase: int, spanner: SpannerEdgeSet) -> None: ...


def trivial_result(g: Graph, algorithm: str, params: dict) -> BuildResult:
    """Single-vertex graphs need no phases and no edges."""
    v = g.vertices[0]
    return BuildResult(
        algorithm=algorithm, params=params, graph_meta=dict(g.meta),
        spanner=SpannerEdgeSet(g), reports=[], snapshots=[],
        partition={v: (0, v)}, trace=comm.BuildTrace())


def run_phases(g: Graph, variant: Variant, params: dict,
               net: Optional[Net] = None) -> BuildResult:
    if g.n == 1:
        return trivial_result(g, variant.name, params)
    net = net or Net(g)
    spanner = SpannerEdgeSet(g)
    tree_adj: Dict[int, List[int]] = {v: [] for v in g.vertices}
    raw: List[Tuple[int, List[int], Dict[int, List[int]]]] = [
        (v, [v], {v: []}) for v in g.vertices
    ]
    reports: List[PhaseReport] = []
    snapshots: List[PhaseSnapshot] = []
    partition: Dict[int, Tuple[int, int]] = {}

    for i in range(variant.ell + 1):
        rounds_mark = net.trace.rounds_total
        edges_mark = len(spanner.charges)
        is_final = i == variant.ell

        orient = comm.orient_clusters(net, raw, f"p{i}.orient")
        cluster_set = _materialize(orient, i)
        spanner_at_start = frozenset(spanner.edges)
        nbrmap = comm.exchange_cluster_ids(net, orient, f"p{i}.exchange")
        active = set(orient.members)

        popular, knowledge = variant.detect(net, orient, nbrmap, i, is_final)
        vgraph: Optional[VirtualClusterGraph] = None
        selected: Set[int] = set()
        outcome = SuperclusterOutcome(joins={})
        if not is_final and popular:
            vgraph = build_cluster_graph(cluster_set, popular, g)
            selected = rulingset.run_knockout_schedule(
                net, orient, set(popular), variant.ruling_params, g.id_range,
                popular=set(popular), label=f"p{i}.rs")
            outcome = run_supercluster_bfs(net, orient, selected,
                                           variant.delta, set(popular),
                                           vgraph=vgraph)
        joined = set(outcome.joins)
        settled = active - joined

        for c, wedge in outcome.witness_edges():
            spanner.add(wedge, vertex=c, kind=SUPER, phase=i)
            a, b = wedge
            tree_adj[a].append(b)
            tree_adj[b].append(a)

        variant.interconnect(net, orient, nbrmap, settled, knowledge, i, spanner)

        for c in sorted(settled):
            for v in orient.members[c]:
                partition[v] = (i, c)

        phase_charges = spanner.charges[edges_mark:]
        expo = variant.threshold_expo(i)
        reports.append(PhaseReport(
            phase=i,
            num_clusters=len(cluster_set),
            num_popular=len(popular),
            num_selected=len(selected),
            num_settled=len(settled),
            radius_bound=variant.radius_bounds[i],
            radius_actual=orient.max_depth(),
            threshold=float(g.n) ** float(expo) if expo is not None else 0.0,
            edges_super=sum(1 for ch in phase_charges if ch.kind == SUPER),
            edges_inter=sum(1 for ch in phase_charges if ch.kind == INTER),
            rounds=net.trace.rounds_total - rounds_mark,
        ))
        snapshots.append(PhaseSnapshot(
            phase=i,
            cluster_set=cluster_set,
            popular=frozenset(popular),
            selected=frozenset(selected),
            settled=frozenset(settled),
            joins=dict(outcome.joins),
            vgraph=vgraph,
            knowledge=knowledge,
            spanner_edges_at_start=spanner_at_start,
            radius_bound=variant.radius_bounds[i],
            threshold_expo=expo,
        ))

        raw = stitch_superclusters(cluster_set, outcome, tree_adj) if joined else []

    return BuildResult(
        algorithm=variant.name, params=params, graph_meta=dict(g.meta),
        spanner=spanner, reports=reports, snapshots=snapshots,
        partition=partition, trace=net.trace)


def _materialize(orient: Orientation, phase: int) -> ClusterSet:
    clusters = []
    for center in sorted(orient.members):
        members = orient.members[center]
        parent = {v: orient.parent[v] for v in members}
        clusters.append(Cluster(center, frozenset(members), parent))
    return ClusterSet(tuple(clusters), phase=phase)
