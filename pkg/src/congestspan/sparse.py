"""Low-polynomial-round sparse spanner and linear-size skeleton construction.

Compared to the polylog construction, popularity is decided per cluster, not
per vertex: a cluster is popular when it has at least deg_i neighboring
clusters, where deg_i follows an exponential-then-fixed schedule
(n^(2^i/kappa) while 2^i/kappa <= rho, then n^rho). The count is collected
by a capped, deduplicating convergecast toward each center, which as a side
effect hands every non-popular center the complete list of its neighboring
clusters together with a witness vertex for each. Interconnection is then
center-driven: the center streams (foreign center, witness) pairs down the
tree and each named witness adds one edge.

With kappa = ceil(log2 n) + 1 the edge bound n^(1+1/kappa) + n is at most 3n:
the skeleton preset.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import comm
from .clusters import radius_sequence
from .comm import Net, Orientation
from .exact import (as_fraction, ceil_fraction, ceil_log2_int, count_le_pow,
                    floor_log2, npow_decimal, pow_ceil)
from .graph import Graph, edge_key
from .rulingset import RulingParams
from .sim import Message, NodeProgram
from .spanner import INTER, BuildResult, PhaseSnapshot, SpannerEdgeSet, \
    run_phases, trivial_result
from .polylog import _EdgeAnnounce


@dataclass(frozen=True)
class SparseParams:
    """Validated parameters plus the whole degree-threshold schedule."""
    n: int
    kappa: int
    rho: Fraction
    i0: int
    ell: int
    delta: int
    deg_expos: Tuple[Fraction, ...]   # exponent of deg_i, phases 0..ell-1

    @property
    def ruling_q(self) -> int:
        # 2q <= delta keeps the ruling set's domination radius within the
        # exploration depth, so every popular cluster gets superclustered
        return max(2, self.delta // 2)

    def degree_cap(self, phase: int) -> int:
        """Smallest integer >= deg_phase: the convergecast store capacity."""
        return pow_ceil(self.n, self.deg_expos[phase])


def degree_schedule(n: int, kappa: int, rho) -> SparseParams:
    """Compute and validate the phase schedule for given (kappa, rho)."""
    if not isinstance(kappa, int) or kappa < 2:
        raise ValueError(f"kappa must be an integer >= 2, got {kappa}")
    if n < 2:
        raise ValueError("need at least two vertices")
    rho = as_fraction(rho)
    if not (Fraction(1, kappa) <= rho < Fraction(1, 2)):
        raise ValueError(
            f"rho must satisfy 1/kappa <= rho < 1/2, got {rho} with kappa={kappa}")
    i0 = floor_log2(kappa * rho)
    ell = i0 + ceil_fraction(Fraction(kappa + 1) / (kappa * rho)) - 1
    delta = ceil_fraction(2 / rho)
    expos = []
    for i in range(ell):
        if i <= i0:
            expos.append(Fraction(2 ** i, kappa))
        else:
            expos.append(rho)
    return SparseParams(n=n, kappa=kappa, rho=rho, i0=i0, ell=ell,
                        delta=delta, deg_expos=tuple(expos))


def skeleton_kappa(n: int) -> int:
    """The preset that makes n^(1+1/kappa) + n at most 3n."""
    return ceil_log2_int(n) + 1


class _SparseVariant:
    name = "sparse"

    def __init__(self, params: SparseParams):
        self.params = params
        self.ell = params.ell
        self.delta = params.delta
        self.ruling_params = RulingParams(q=params.ruling_q, c=2)
        self.radius_bounds = radius_sequence(self.delta, self.ell).values

    def threshold_expo(self, phase: int) -> Optional[Fraction]:
        if phase < self.params.ell:
            return self.params.deg_expos[phase]
        return None

    def detect(self, net: Net, orient: Orientation,
               nbrmap: Dict[int, Dict[int, int]], phase: int,
               is_final: bool) -> Tuple[Set[int], Dict[int, Dict[int, int]]]:
        items: Dict[int, List[Tuple[int, int]]] = {}
        for v, c in orient.center_of.items():
            foreign = sorted({cc for cc in nbrmap[v].values() if cc != c})
            items[v] = [(cc, v) for cc in foreign]
        # the final phase needs complete neighbor knowledge: no binding cap
        cap = self.params.n + 1 if is_final else self.params.degree_cap(phase)
        knowledge = comm.upcast_collect(net, orient, items, cap,
                                        f"p{phase}.collect")
        popular: Set[int] = set()
        if not is_final:
            popular = {c for c, lc in knowledge.items() if len(lc) >= cap}
        if popular:
            comm.downcast_single(net, orient, sorted(popular), comm.TAG_POPBIT,
                                 f"p{phase}.popbit")
        return popular, knowledge

    def interconnect(self, net: Net, orient: Orientation,
                     nbrmap: Dict[int, Dict[int, int]], settled: Set[int],
                     knowledge: Dict[int, Dict[int, int]], phase: int,
                     spanner: SpannerEdgeSet) -> None:
        if not settled:
            return
        payloads: Dict[int, Sequence[Message]] = {}
        for c in sorted(settled):
            msgs = [Message(comm.TAG_PAYLOAD, (cc, y))
                    for cc, y in knowledge[c].items()]
            if msgs:
                payloads[c] = msgs
        if not payloads:
            return
        received = comm.downcast_payloads(net, orient, payloads,
                                          f"p{phase}.intercast")
        adds: List[Tuple[int, int, int]] = []   # (adder, target, charged center)
        programs: Dict[int, NodeProgram] = {}
        for c in sorted(payloads):
            for v in orient.members[c]:
                targets = []
                for msg in received.get(v, ()):
                    if msg.tag == comm.TAG_PAYLOAD and msg.ids[1] == v:
                        cc = msg.ids[0]
                        u = min(u2 for u2, c2 in nbrmap[v].items() if c2 == cc)
                        targets.append(u)
                        adds.append((v, u, c))
                if targets:
                    programs[v] = _EdgeAnnounce(sorted(targets))
        net.episode(f"p{phase}.inter", programs)
        for v, u, c in adds:
            spanner.add(edge_key(v, u), vertex=c, kind=INTER, phase=phase)


def build_spanner(g: Graph, kappa: int, rho, net: Optional[Net] = None) -> BuildResult:
    """Run the construction; rho may be a Fraction, float, or 'p/q' string."""
    if g.n == 1:
        return trivial_result(g, "sparse", {"kappa": kappa, "rho": str(rho), "n": 1})
    params = degree_schedule(g.n, kappa, rho)
    run_info = {
        "kappa": kappa, "rho": str(params.rho), "rho_float": float(params.rho),
        "n": g.n, "delta": params.delta, "ell": params.ell, "i0": params.i0,
        "ruling_q": params.ruling_q,
        "deg_thresholds": [float(g.n) ** float(e) for e in params.deg_expos],
    }
    return run_phases(g, _SparseVariant(params), run_info, net=net)


def build_skeleton(g: Graph, rho, net: Optional[Net] = None) -> BuildResult:
    result = build_spanner(g, skeleton_kappa(g.n), rho, net=net)
    result.params["preset"] = "skeleton"
    return result


def stretch_bound(rho, ell: int) -> float:
    """Closed-form stretch 2*(4/rho + 1)^ell + 1.

    Accepts rho = 1/2 so the formula itself can be probed at the boundary;
    the construction proper requires rho < 1/2.
    """
    rho = as_fraction(rho)
    if not (0 < rho <= Fraction(1, 2)):
        raise ValueError("need 0 < rho <= 1/2")
    if ell < 0:
        raise ValueError("need ell >= 0")
    return float(2 * (4 / rho + 1) ** ell + 1)


def stretch_bound_exact(n: int, kappa: int, rho) -> int:
    """The checked per-edge bound 4*R_ell + 1 from the radius recurrence."""
    if n == 1:
        return 1
    params = degree_schedule(n, kappa, rho)
    radii = radius_sequence(params.delta, params.ell)
    return 4 * radii[params.ell] + 1


def size_bound_holds(result: BuildResult) -> bool:
    """|H| <= n^(1 + 1/kappa) + n, compared exactly."""
    n = result.params["n"]
    kappa = result.params["kappa"]
    extra = result.spanner.size() - n
    return extra <= 0 or count_le_pow(extra, n, Fraction(kappa + 1, kappa))


def phase_size_assertions(result: BuildResult) -> List[str]:
    """Check every per-phase counting inequality of the construction.

    Single-power comparisons are exact big-integer checks; the one aggregate
    bound that mixes several fractional powers uses 60-digit decimals.
    """
    if result.algorithm != "sparse":
        raise ValueError("phase size assertions apply to sparse runs")
    if not result.reports:
        return []
    n = result.params["n"]
    params = degree_schedule(n, result.params["kappa"],
                             as_fraction(result.params["rho"]))
    kappa, rho, i0, ell = params.kappa, params.rho, params.i0, params.ell
    sizes = {rep.phase: rep.num_clusters for rep in result.reports}
    selected = {rep.phase: rep.num_selected for rep in result.reports}
    settled = {rep.phase: rep.num_settled for rep in result.reports}
    failures: List[str] = []

    def deg_pow(count: int, expo: Fraction) -> int:
        # count * n^expo <= bound  <=>  count^q * n^p <= bound^q
        return count ** expo.denominator * n ** expo.numerator

    for i in range(ell):
        e = params.deg_expos[i]
        room = sizes[i] - settled[i] - selected[i]
        if room < 0 or deg_pow(selected[i], e) > room ** e.denominator:
            failures.append(
                f"phase {i}: settled count {settled[i]} exceeds "
                f"|P_i| - |Q_i|*(deg_i+1)")
    for i in range(1, ell + 1):
        e = params.deg_expos[i - 1]
        if deg_pow(sizes[i], e) > sizes[i - 1] ** e.denominator:
            failures.append(
                f"phase {i}: {sizes[i]} clusters exceed the previous count "
                f"divided by deg_{i - 1}")
    for i in range(0, min(i0 + 1, ell) + 1):
        expo = Fraction(kappa - (2 ** i - 1), kappa)
        if not count_le_pow(sizes[i], n, expo):
            failures.append(
                f"phase {i}: {sizes[i]} clusters exceed the exponential-stage bound")
    for i in range(i0 + 1, ell + 1):
        expo = 1 + Fraction(1, kappa) - (i - i0) * rho
        if not count_le_pow(sizes[i], n, expo):
            failures.append(
                f"phase {i}: {sizes[i]} clusters exceed the fixed-stage bound")
    if not count_le_pow(sizes[ell], n, rho):
        failures.append(f"final phase holds {sizes[ell]} clusters, more than n^rho")

    inter_early = sum(rep.edges_inter for rep in result.reports if rep.phase < ell)
    e0, el = params.deg_expos[0], params.deg_expos[ell - 1]
    bound = (Decimal(sizes[0]) * npow_decimal(n, e0)
             - Decimal(sizes[ell]) * (npow_decimal(n, 2 * el) + npow_decimal(n, el)))
    if Decimal(inter_early) > bound:
        failures.append(
            f"{inter_early} interconnection edges before the final phase exceed "
            f"the aggregate bound {bound:.4f}")
    return failures


def oracle_center_knowledge(snapshot: PhaseSnapshot,
                            g: Graph) -> Dict[int, Dict[int, Set[int]]]:
    """Centrally computed neighboring clusters with all witness vertices.

    For each cluster center: foreign center -> the set of own members with an
    edge into that cluster. The convergecast result must name one of these
    witnesses per foreign center, for every non-popular cluster.
    """
    center_of = snapshot.cluster_set.member_center()
    out: Dict[int, Dict[int, Set[int]]] = {
        c.center: {} for c in snapshot.cluster_set.clusters}
    for u, v in g.edges():
        cu, cv = center_of.get(u), center_of.get(v)
        if cu is None or cv is None or cu == cv:
            continue
        out[cu].setdefault(cv, set()).add(u)
        out[cv].setdefault(cu, set()).add(v)
    return out
