"""Interconnection graphs, gains, aggregation functions and truncations.

A network couples a finite digraph (no self-loops, edges point from the
influencing node to the influenced one) with one class-K-infinity gain
per edge and one monotone aggregation function (MAF) per node.  Build
time validates the structural invariants and, for custom MAFs, samples
the monotonicity and equicontinuity axioms; sampling can only falsify,
never certify, which is why custom MAFs must declare their modulus and
positivity bound instead of having them inferred.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import networkx as nx
import numpy as np

from .kfun import (
    KFun,
    KFunError,
    MonotoneSamples,
    Side,
    envelope,
    identity,
    linear,
    pointwise_max,
    pointwise_min,
    power_kfun,
)

__all__ = [
    "NetworkError",
    "Digraph",
    "MafSpec",
    "GainNetwork",
    "TruncationTemplate",
    "build_network",
    "neighborhood",
    "subnetwork",
    "finite_xi",
    "is_strongly_connected",
    "graph_diameter",
    "gain_from_descriptor",
    "network_from_dict",
    "network_from_json",
    "chain_template",
]


class NetworkError(ValueError):
    """Invalid network structure or falsified build-time axiom."""


@dataclass(frozen=True)
class Digraph:
    """Finite digraph stored as per-node ordered in-neighbor lists."""

    n: int
    in_neighbors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n <= 0:
            raise NetworkError("a network needs at least one node")
        if len(self.in_neighbors) != self.n:
            raise NetworkError("in-neighbor table size must match the node count")
        for i, nbrs in enumerate(self.in_neighbors):
            for j in nbrs:
                if not 0 <= j < self.n:
                    raise NetworkError(f"edge source {j} out of range")
                if j == i:
                    raise NetworkError(f"self-loop at node {i} is not allowed")
            if len(set(nbrs)) != len(nbrs):
                raise NetworkError(f"duplicate in-edge at node {i}")

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for i, nbrs in enumerate(self.in_neighbors):
            for j in nbrs:
                out[j].append(i)
        return tuple(tuple(o) for o in out)

    @cached_property
    def max_in_degree(self) -> int:
        return max((len(nb) for nb in self.in_neighbors), default=0)

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        for i, nbrs in enumerate(self.in_neighbors):
            g.add_edges_from((j, i) for j in nbrs)
        return g


@dataclass(frozen=True)
class MafSpec:
    """Monotone aggregation function for one node.

    ``max`` and ``sum`` need no extra data.  A ``custom`` rule must bring
    its own equicontinuity modulus and positivity lower bound; both are
    sampled at build time (falsification only).  The callable receives the
    1-d array of gained in-neighbor values, ordered like the in-neighbor
    list, and must be invariant under zero padding.
    """

    kind: str  # "max" | "sum" | "custom"
    func: Callable[[np.ndarray], float] | None = None
    modulus: KFun | None = None
    xi: KFun | None = None

    def __post_init__(self):
        if self.kind not in ("max", "sum", "custom"):
            raise NetworkError(f"unknown MAF kind {self.kind!r}")
        if self.kind == "custom" and (self.func is None or self.modulus is None or self.xi is None):
            raise NetworkError("custom MAFs must declare func, modulus and xi")

    def evaluate(self, values: np.ndarray) -> float:
        if values.size == 0:
            return 0.0
        if self.kind == "max":
            return float(np.max(values))
        if self.kind == "sum":
            return float(np.sum(values))
        return float(self.func(values))


MAX = MafSpec("max")
SUM = MafSpec("sum")


@dataclass(frozen=True)
class GainNetwork:
    """A digraph with per-edge gains and per-node aggregation rules.

    ``edges`` keeps file order (the deterministic order used everywhere);
    ``eta`` is the pointwise minimum of all gains (a uniform lower bound
    on every gain) and ``xi`` the aggregation positivity bound (identity
    for max/sum aggregation).
    """

    graph: Digraph
    edges: tuple[tuple[int, int, KFun], ...]  # (src, dst, gain)
    mafs: tuple[MafSpec, ...]
    eta: KFun
    xi: KFun

    @property
    def n(self) -> int:
        return self.graph.n

    @cached_property
    def all_in_nonempty(self) -> bool:
        return all(len(nb) > 0 for nb in self.graph.in_neighbors)

    @cached_property
    def maf_kinds(self) -> tuple[str, ...]:
        return tuple(m.kind for m in self.mafs)

    @cached_property
    def uniform_maf(self) -> str | None:
        kinds = set(self.maf_kinds)
        return kinds.pop() if len(kinds) == 1 else None

    @cached_property
    def all_gains_linear(self) -> bool:
        return all(g.is_linear for _, _, g in self.edges)

    @cached_property
    def edge_gain(self) -> dict[tuple[int, int], KFun]:
        return {(j, i): g for j, i, g in self.edges}

    @cached_property
    def _edge_groups(self):
        """Edges grouped by shared gain object, for vectorized evaluation."""
        groups: dict[int, tuple[KFun, list[int], list[int]]] = {}
        for j, i, g in self.edges:
            key = id(g)
            if key not in groups:
                groups[key] = (g, [], [])
            groups[key][1].append(j)
            groups[key][2].append(i)
        return tuple(
            (g, np.asarray(src, dtype=int), np.asarray(dst, dtype=int)) for g, src, dst in groups.values()
        )

    @cached_property
    def _in_edges(self):
        """Per node: (source index array, gain list) in in-neighbor order."""
        table: list[tuple[np.ndarray, list[KFun]]] = []
        for i, nbrs in enumerate(self.graph.in_neighbors):
            gains = [self.edge_gain[(j, i)] for j in nbrs]
            table.append((np.asarray(nbrs, dtype=int), gains))
        return tuple(table)

    def lipschitz_modulus(self) -> KFun:
        """A global uniform-continuity modulus, exact for PL gains.

        Per node, a sup-norm perturbation of the state moves the gained
        in-values by at most the largest gain slope; max aggregation
        passes that through, sum aggregation multiplies by the in-degree
        row sum, and a custom rule wraps it in its declared modulus.  The
        network modulus is the pointwise maximum over nodes.
        """
        per_node: list[KFun] = []
        for i, nbrs in enumerate(self.graph.in_neighbors):
            if not nbrs:
                continue
            slopes = [self.edge_gain[(j, i)].max_slope for j in nbrs]
            kind = self.mafs[i].kind
            if kind == "sum":
                per_node.append(linear(sum(slopes)))
            elif kind == "max":
                per_node.append(linear(max(slopes)))
            else:
                per_node.append(self.mafs[i].modulus.compose(linear(max(slopes))))
        if not per_node:
            return linear(1e-12)  # edgeless: the operator is constant zero
        return pointwise_max(per_node)


def build_network(
    n_nodes: int,
    edges: Sequence[tuple[int, int, KFun]],
    mafs: MafSpec | Sequence[MafSpec] = MAX,
    *,
    validation_seed: int = 0,
    validation_samples: int = 200,
) -> GainNetwork:
    """Assemble and validate a gain network.

    ``edges`` lists ``(src, dst, gain)`` in file order.  Custom MAFs are
    sampled for monotonicity and for their declared modulus; a violated
    sample raises :class:`NetworkError`.
    """
    in_nbrs: list[list[int]] = [[] for _ in range(n_nodes)]
    for j, i, g in edges:
        if not isinstance(g, KFun):
            raise NetworkError("every edge needs a KFun gain")
        in_nbrs[i].append(j)
    graph = Digraph(n_nodes, tuple(tuple(nb) for nb in in_nbrs))
    if isinstance(mafs, MafSpec):
        mafs = tuple(mafs for _ in range(n_nodes))
    else:
        mafs = tuple(mafs)
        if len(mafs) != n_nodes:
            raise NetworkError("need one MAF per node")
    gains = [g for _, _, g in edges]
    eta = pointwise_min(gains) if gains else identity()
    xis = [m.xi if m.kind == "custom" else identity() for m in mafs]
    xi = pointwise_min(xis) if xis else identity()
    net = GainNetwork(graph, tuple((j, i, g) for j, i, g in edges), mafs, eta, xi)
    _validate_custom_mafs(net, validation_seed, validation_samples)
    return net


def _validate_custom_mafs(net: GainNetwork, seed: int, samples: int) -> None:
    custom = [(i, m) for i, m in enumerate(net.mafs) if m.kind == "custom"]
    if not custom:
        return
    rng = np.random.default_rng([seed, 0x5AF])
    for i, m in custom:
        k = max(len(net.graph.in_neighbors[i]), 1)
        for _ in range(samples):
            lo = rng.uniform(0.0, 2.0, size=k)
            hi = lo + rng.uniform(0.0, 1.0, size=k)
            v_lo, v_hi = m.evaluate(lo), m.evaluate(hi)
            if v_lo > v_hi + 1e-12:
                raise NetworkError(f"custom MAF at node {i} violates monotonicity on a sample")
            gap = float(np.max(hi - lo))
            if v_hi - v_lo > m.modulus(gap) + 1e-9:
                raise NetworkError(f"custom MAF at node {i} violates its declared modulus on a sample")
            if m.evaluate(np.zeros(k)) != 0.0:
                raise NetworkError(f"custom MAF at node {i} must vanish at zero")
            norm = float(np.max(hi))
            # 0.5% relative slack: declared bounds are PL discretizations, so
            # between-knot chords of convex bounds may sit slightly high
            if v_hi < m.xi(norm) * 0.995 - 1e-9:
                raise NetworkError(f"custom MAF at node {i} falls below its declared positivity bound")


def neighborhood(graph: Digraph, i: int, depth: int, direction: str = "in") -> frozenset[int]:
    """Nodes reachable within ``depth`` steps (``in``: against edge direction).

    Depth zero is just ``{i}``; depth one adds the direct neighbors.
    """
    if not 0 <= i < graph.n:
        raise NetworkError(f"node {i} out of range")
    if depth < 0:
        raise NetworkError("depth must be nonnegative")
    table = graph.in_neighbors if direction == "in" else graph.out_neighbors
    seen = {i}
    frontier = [i]
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for w in table[v]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return frozenset(seen)


def subnetwork(net: GainNetwork, nodes) -> GainNetwork:
    """Induced sub-network on ``nodes``, re-indexed to 0..len(nodes)-1.

    Gains restrict edge by edge and the aggregation rules are inherited
    unchanged.
    """
    nodes = sorted(set(int(v) for v in nodes))
    if not nodes:
        raise NetworkError("sub-network needs a nonempty node set")
    for v in nodes:
        if not 0 <= v < net.n:
            raise NetworkError(f"node {v} out of range")
    remap = {v: k for k, v in enumerate(nodes)}
    edges = [(remap[j], remap[i], g) for j, i, g in net.edges if j in remap and i in remap]
    mafs = tuple(net.mafs[v] for v in nodes)
    return build_network(len(nodes), edges, mafs)


def finite_xi(net: GainNetwork, r_grid: np.ndarray | None = None) -> KFun:
    """Aggregation positivity bound recovered from single-support probes.

    For max/sum aggregation the probe values equal the input level, so the
    bound is exactly the identity.  Custom rules are sampled on a grid and
    bounded below by a strictly increasing PL minorant; a vanishing probe
    at positive level means no such bound exists.
    """
    if all(m.kind in ("max", "sum") for m in net.mafs):
        return identity()
    if r_grid is None:
        r_grid = np.concatenate(([0.0], np.geomspace(1e-4, 1e4, 48)))
    zs = np.zeros(len(r_grid))
    for k, r in enumerate(r_grid):
        if r == 0.0:
            continue
        vals = []
        for m in net.mafs:
            vals.append(m.evaluate(np.asarray([r])))
        z = min(vals)
        if z <= 0.0:
            raise NetworkError(f"aggregation probe vanished at level r={r}: no positivity bound")
        zs[k] = z
    samples = MonotoneSamples(r_grid, np.maximum.accumulate(zs))
    return envelope(samples, Side.BELOW)


def is_strongly_connected(graph: Digraph) -> bool:
    if graph.n == 1:
        return True
    return bool(nx.is_strongly_connected(graph.to_networkx()))


def graph_diameter(graph: Digraph) -> int:
    """Longest shortest path over ordered pairs (graph must be strongly connected)."""
    if not is_strongly_connected(graph):
        raise NetworkError("diameter is only defined here for strongly connected graphs")
    if graph.n == 1:
        return 0
    return int(nx.diameter(graph.to_networkx()))


# -- truncation templates ------------------------------------------------


@dataclass(frozen=True)
class TruncationTemplate:
    """Shift-invariant in-neighbor rule for finite truncations.

    ``offsets`` maps each relative in-neighbor position to a shared gain;
    neighbors falling outside ``[0, N)`` are dropped, which makes the
    truncation coincide with the induced sub-network of the infinite
    template.
    """

    offsets: tuple[tuple[int, KFun], ...]
    maf: MafSpec = SUM

    def __post_init__(self):
        for d, g in self.offsets:
            if d == 0:
                raise NetworkError("offset 0 would create self-loops")
            if not isinstance(g, KFun):
                raise NetworkError("template offsets need KFun gains")

    def instantiate(self, n_nodes: int) -> GainNetwork:
        edges = []
        for i in range(n_nodes):
            for d, g in self.offsets:
                j = i + d
                if 0 <= j < n_nodes:
                    edges.append((j, i, g))
        return build_network(n_nodes, edges, self.maf)


def chain_template(gain: KFun, maf: MafSpec = SUM) -> TruncationTemplate:
    """Bidirectional chain: each node listens to its two lattice neighbors."""
    return TruncationTemplate(((-1, gain), (1, gain)), maf)


# -- parsing --------------------------------------------------------------


def gain_from_descriptor(desc: dict) -> tuple[KFun, str | None]:
    """Build a gain from its JSON descriptor; returns (gain, parse note)."""
    kind = desc.get("type")
    if kind == "linear":
        return linear(float(desc["k"])), None
    if kind == "power":
        lo, hi = desc.get("range", (1e-4, 1e4))
        f, err = power_kfun(float(desc["c"]), float(desc["p"]), float(lo), float(hi))
        return f, f"power gain discretized on [{lo}, {hi}] with max relative midpoint error {err:.3e}"
    if kind == "pl":
        pts = np.asarray(desc["points"], dtype=float)
        return KFun(pts[:, 0], pts[:, 1], float(desc["final_slope"])), None
    raise NetworkError(f"unknown gain descriptor type {kind!r}")


def _maf_from_descriptor(desc) -> MafSpec:
    if desc == "max":
        return MAX
    if desc == "sum":
        return SUM
    raise NetworkError(f"unsupported MAF descriptor {desc!r} (custom MAFs are library-only)")


def network_from_dict(data: dict) -> tuple[GainNetwork, list[str]]:
    """Parse the network file schema.

    Schema: ``{"nodes": N, "edges": [{"from": j, "to": i, "gain": {...}}],
    "maf": "max"|"sum", "template": {"offsets": [{"offset": d, "gain": {...}}]}}``.
    When a template is present it generates the edges; explicit edges are
    then not allowed.  Edge order is file order.
    """
    notes: list[str] = []
    try:
        n = int(data["nodes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkError(f"missing or invalid 'nodes' field: {exc}") from exc
    maf = _maf_from_descriptor(data.get("maf", "max"))
    if "template" in data:
        if data.get("edges"):
            raise NetworkError("give either 'edges' or 'template', not both")
        offsets = []
        for item in data["template"].get("offsets", []):
            g, note = gain_from_descriptor(item["gain"])
            if note:
                notes.append(note)
            offsets.append((int(item["offset"]), g))
        if not offsets:
            raise NetworkError("template needs at least one offset")
        template = TruncationTemplate(tuple(offsets), maf)
        return template.instantiate(n), notes
    edges = []
    cache: dict[str, KFun] = {}
    for k, e in enumerate(data.get("edges", [])):
        try:
            j, i = int(e["from"]), int(e["to"])
            key = json.dumps(e["gain"], sort_keys=True)
            if key not in cache:
                g, note = gain_from_descriptor(e["gain"])
                if note:
                    notes.append(f"edge {k}: {note}")
                cache[key] = g
            edges.append((j, i, cache[key]))
        except (KeyError, TypeError, ValueError, KFunError) as exc:
            raise NetworkError(f"invalid edge entry at position {k}: {exc}") from exc
    return build_network(n, edges, maf), notes


def network_from_json(path: str) -> tuple[GainNetwork, list[str], str]:
    """Load a network file; returns (network, parse notes, sha256 digest)."""
    import hashlib

    with open(path, "rb") as fh:
        raw = fh.read()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    net, notes = network_from_dict(data)
    return net, notes, digest
