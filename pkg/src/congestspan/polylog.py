"""Polylogarithmic-round spanner construction.

Runs kappa phases (the last one interconnect-only). A vertex makes the
popularity call locally: it is popular when it has neighbors in at least
n^(1/kappa) distinct current clusters, and a cluster is popular when it
contains a popular vertex. Popular clusters are superclustered around a
(3, 2*ceil(log2 n))-ruling set by an exploration of depth 2*ceil(log2 n);
clusters left out interconnect vertex-wise: each of their vertices adds one
edge to every neighboring cluster (smallest-ID neighbor inside it).

Resulting guarantees, checked by the verification layer: per-edge stretch at
most 2*R_ell + 1 for the phase radius recurrence, and at most n^(1+1/kappa)
edges overall.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Set, Tuple

from . import comm
from .clusters import radius_sequence
from .comm import Net, Orientation
from .exact import ceil_log2_int, count_ge_pow, count_le_pow
from .graph import Graph, edge_key
from .rulingset import RulingParams
from .sim import NodeApi, NodeProgram
from .spanner import INTER, BuildResult, SpannerEdgeSet, run_phases, trivial_result


@dataclass(frozen=True)
class PolylogParams:
    n: int
    kappa: int

    def __post_init__(self):
        if not isinstance(self.kappa, int) or self.kappa < 2:
            raise ValueError(f"kappa must be an integer >= 2, got {self.kappa}")
        if self.n < 2:
            raise ValueError("need at least two vertices")

    @property
    def ell(self) -> int:
        return self.kappa - 1

    @property
    def delta(self) -> int:
        return 2 * ceil_log2_int(self.n)

    @property
    def tau_expo(self) -> Fraction:
        return Fraction(1, self.kappa)


class _EdgeAnnounce(NodeProgram):
    """One round: tell each chosen neighbor that the shared edge joined H."""

    __slots__ = ("targets",)

    def __init__(self, targets: List[int]):
        self.targets = targets

    def on_start(self, api: NodeApi) -> None:
        for u in self.targets:
            api.send(u, comm.TAG_EDGEADD)
        api.halt()


class _PolylogVariant:
    name = "polylog"

    def __init__(self, params: PolylogParams):
        self.params = params
        self.ell = params.ell
        self.delta = params.delta
        self.ruling_params = RulingParams(q=max(1, ceil_log2_int(params.n)), c=2)
        self.radius_bounds = radius_sequence(self.delta, self.ell).values

    def threshold_expo(self, phase: int) -> Fraction:
        return self.params.tau_expo

    def detect(self, net: Net, orient: Orientation,
               nbrmap: Dict[int, Dict[int, int]], phase: int,
               is_final: bool) -> Tuple[Set[int], None]:
        if is_final:
            return set(), None
        n = self.params.n
        flagged = set()
        for v, c in orient.center_of.items():
            foreign = {cc for cc in nbrmap[v].values() if cc != c}
            if count_ge_pow(len(foreign), n, self.params.tau_expo):
                flagged.add(v)
        popular = comm.upcast_flags(net, orient, flagged, f"p{phase}.popflag")
        if popular:
            comm.downcast_single(net, orient, popular, comm.TAG_POPBIT,
                                 f"p{phase}.popbit")
        return popular, None

    def interconnect(self, net: Net, orient: Orientation,
                     nbrmap: Dict[int, Dict[int, int]], settled: Set[int],
                     knowledge: None, phase: int,
                     spanner: SpannerEdgeSet) -> None:
        if not settled:
            return
        comm.downcast_single(net, orient, sorted(settled), comm.TAG_SETTLED,
                             f"p{phase}.settle")
        programs: Dict[int, NodeProgram] = {}
        for c in sorted(settled):
            for v in orient.members[c]:
                best: Dict[int, int] = {}
                for u, cc in nbrmap[v].items():
                    if cc == c:
                        continue
                    if cc not in best or u < best[cc]:
                        best[cc] = u
                if best:
                    programs[v] = _EdgeAnnounce(sorted(best.values()))
        net.episode(f"p{phase}.inter", programs)
        for v in sorted(programs):
            for u in programs[v].targets:
                spanner.add(edge_key(v, u), vertex=v, kind=INTER, phase=phase)


def build_spanner(g: Graph, kappa: int, net: Optional[Net] = None) -> BuildResult:
    """Run the construction; returns the spanner with reports and snapshots."""
    if g.n == 1:
        return trivial_result(g, "polylog", {"kappa": kappa, "n": 1})
    params = PolylogParams(n=g.n, kappa=kappa)
    run_info = {"kappa": kappa, "n": g.n, "delta": params.delta,
                "ell": params.ell, "ruling_q": max(1, ceil_log2_int(g.n))}
    return run_phases(g, _PolylogVariant(params), run_info, net=net)


def stretch_bound(n: int, kappa: int) -> int:
    """Closed-form stretch bound (4*ceil(log2 n) + 1)^(kappa-1) + 1."""
    if n < 2:
        raise ValueError("need n >= 2")
    if kappa < 1:
        raise ValueError("need kappa >= 1")
    return (4 * ceil_log2_int(n) + 1) ** (kappa - 1) + 1


def stretch_bound_exact(n: int, kappa: int) -> int:
    """The tighter per-edge bound 2*R_ell + 1 from the radius recurrence."""
    if kappa == 1 or n == 1:
        return 1
    params = PolylogParams(n=n, kappa=kappa)
    radii = radius_sequence(params.delta, params.ell)
    return 2 * radii[params.ell] + 1


def size_bound_holds(result: BuildResult) -> bool:
    """|H| <= n^(1 + 1/kappa), compared exactly."""
    n = result.params["n"]
    kappa = result.params["kappa"]
    return count_le_pow(result.spanner.size(), n, Fraction(kappa + 1, kappa))


def size_assertions(result: BuildResult) -> List[str]:
    """Per-phase cluster-count bounds: |P_i| <= n^((kappa-i)/kappa)."""
    n = result.params["n"]
    kappa = result.params["kappa"]
    failures = []
    for rep in result.reports:
        expo = Fraction(kappa - rep.phase, kappa)
        if not count_le_pow(rep.num_clusters, n, expo):
            failures.append(
                f"phase {rep.phase}: {rep.num_clusters} clusters exceed "
                f"n^({kappa - rep.phase}/{kappa})")
    return failures
