"""Interaction graph construction and community detection.

The graph is undirected and weighted: one repost interaction between a pair
of users adds 1 to their edge weight. Communities come from modularity
maximization with the classic two-phase local-move / aggregate scheme, run
single-threaded with a seeded node order so results are reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


@dataclass
class InteractionGraph:
    """Undirected weighted graph; no self-loops, one edge per pair."""

    nodes: set[str] = field(default_factory=set)
    # keyed by (u, v) with u < v
    edges: dict[tuple[str, str], float] = field(default_factory=dict)

    def add_node(self, node: str) -> None:
        self.nodes.add(node)

    def add_edge(self, u: str, v: str, weight: float = 1.0) -> None:
        if weight <= 0:
            raise ValueError("edge weight must be positive")
        self.nodes.add(u)
        self.nodes.add(v)
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        self.edges[key] = self.edges.get(key, 0.0) + weight

    def degree(self) -> dict[str, float]:
        deg = {n: 0.0 for n in self.nodes}
        for (u, v), w in self.edges.items():
            deg[u] += w
            deg[v] += w
        return deg

    def total_weight(self) -> float:
        return sum(self.edges.values())

    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for (u, v), w in self.edges.items():
            adj[u][v] = adj[u].get(v, 0.0) + w
            adj[v][u] = adj[v].get(u, 0.0) + w
        return adj


@dataclass
class Partition:
    """Maps every node to a cluster id."""

    assignment: dict[str, int]

    def clusters(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for node, cid in self.assignment.items():
            out.setdefault(cid, []).append(node)
        return out

    def compact(self) -> "Partition":
        """Renumber cluster ids to 0..k-1, largest cluster first."""
        groups = self.clusters()
        order = sorted(groups, key=lambda c: (-len(groups[c]), min(groups[c])))
        remap = {old: new for new, old in enumerate(order)}
        return Partition({n: remap[c] for n, c in self.assignment.items()})


def build_graph(interactions: Iterable[tuple[str, str]]) -> InteractionGraph:
    """Accumulate (source, target) interactions into an undirected graph.

    Repeated interactions between a pair add up as edge weight; interactions
    of a user with themselves only register the node.
    """
    g = InteractionGraph()
    for src, dst in interactions:
        g.add_node(src)
        g.add_node(dst)
        if src != dst:
            g.add_edge(src, dst, 1.0)
    return g


def modularity(g: InteractionGraph, p: Partition, resolution: float = 1.0) -> float:
    """Weighted Newman modularity of a partition, in [-1, 1]."""
    if not g.edges:
        raise ValueError("modularity undefined: graph has no edges")
    missing = g.nodes - p.assignment.keys()
    if missing:
        raise ValueError(f"partition misses nodes: {sorted(missing)[:5]}")
    deg = g.degree()
    two_m = 2.0 * g.total_weight()
    internal: dict[int, float] = {}
    total: dict[int, float] = {}
    for node in g.nodes:
        cid = p.assignment[node]
        total[cid] = total.get(cid, 0.0) + deg[node]
    for (u, v), w in g.edges.items():
        if p.assignment[u] == p.assignment[v]:
            cid = p.assignment[u]
            internal[cid] = internal.get(cid, 0.0) + 2.0 * w
    q = 0.0
    for cid, tot in total.items():
        q += internal.get(cid, 0.0) / two_m - resolution * (tot / two_m) ** 2
    return q


# ---------------------------------------------------------------------------
# Louvain
# ---------------------------------------------------------------------------

class _Level:
    """Mutable working graph for one aggregation level. Loops allowed."""

    def __init__(self, adj: dict[int, dict[int, float]], loops: dict[int, float]):
        self.adj = adj
        self.loops = loops  # loop weight per node (counted once)
        self.deg = {
            n: sum(w for v, w in nbrs.items()) + 2.0 * loops.get(n, 0.0)
            for n, nbrs in adj.items()
        }
        self.two_m = sum(self.deg.values())

    @classmethod
    def from_graph(cls, g: InteractionGraph, index: dict[str, int]) -> "_Level":
        adj: dict[int, dict[int, float]] = {index[n]: {} for n in g.nodes}
        for (u, v), w in g.edges.items():
            iu, iv = index[u], index[v]
            adj[iu][iv] = adj[iu].get(iv, 0.0) + w
            adj[iv][iu] = adj[iv].get(iu, 0.0) + w
        return cls(adj, {})


def _local_move(level: _Level, rng: random.Random, resolution: float) -> dict[int, int]:
    """One local-move phase; returns node -> community (community ids are node ids)."""
    comm = {n: n for n in level.adj}
    sigma_tot = {n: level.deg[n] for n in level.adj}
    nodes = sorted(level.adj)
    rng.shuffle(nodes)
    two_m = level.two_m
    if two_m <= 0:
        return comm
    moved = True
    while moved:
        moved = False
        for node in nodes:
            home = comm[node]
            k_i = level.deg[node]
            sigma_tot[home] -= k_i
            # weight from node to each neighboring community
            links: dict[int, float] = {}
            for nbr, w in level.adj[node].items():
                if nbr != node:
                    links[comm[nbr]] = links.get(comm[nbr], 0.0) + w
            links.setdefault(home, 0.0)
            best, best_gain = home, _gain(links[home], sigma_tot[home], k_i,
                                          two_m, resolution)
            for cid in sorted(links):
                if cid == home:
                    continue
                gain = _gain(links[cid], sigma_tot[cid], k_i, two_m, resolution)
                if gain > best_gain + 1e-12:
                    best, best_gain = cid, gain
            sigma_tot[best] += k_i
            if best != home:
                comm[node] = best
                moved = True
    return comm


def _gain(w_to_comm: float, sigma_tot: float, k_i: float,
          two_m: float, resolution: float) -> float:
    # modularity delta (times m) for inserting an isolated node
    return w_to_comm - resolution * sigma_tot * k_i / two_m


def _aggregate(level: _Level, comm: dict[int, int]) -> tuple[_Level, dict[int, int]]:
    cids = sorted(set(comm.values()))
    remap = {cid: i for i, cid in enumerate(cids)}
    adj: dict[int, dict[int, float]] = {i: {} for i in range(len(cids))}
    loops: dict[int, float] = {i: 0.0 for i in range(len(cids))}
    for node, loop_w in level.loops.items():
        loops[remap[comm[node]]] += loop_w
    for u, nbrs in level.adj.items():
        cu = remap[comm[u]]
        for v, w in nbrs.items():
            if u > v:
                continue  # each undirected edge once
            cv = remap[comm[v]]
            if cu == cv:
                loops[cu] += w
            else:
                a, b = min(cu, cv), max(cu, cv)
                adj[a][b] = adj[a].get(b, 0.0) + w
                adj[b][a] = adj[b].get(a, 0.0) + w
    node_to_super = {n: remap[comm[n]] for n in level.adj}
    return _Level(adj, loops), node_to_super


def louvain_phases(g: InteractionGraph, seed: int,
                   resolution: float = 1.0) -> list[Partition]:
    """Run Louvain, returning the partition after every phase.

    Each phase is one local-move sweep to convergence followed by graph
    aggregation; the partition is projected back onto the original nodes.
    Modularity is non-decreasing along the returned list.
    """
    if not g.nodes:
        raise ValueError("louvain requires a nonempty graph")
    names = sorted(g.nodes)
    index = {n: i for i, n in enumerate(names)}
    level = _Level.from_graph(g, index)
    rng = random.Random(seed)
    # membership of each original node in the current level's node ids
    membership = {index[n]: index[n] for n in names}
    phases: list[Partition] = []
    while True:
        comm = _local_move(level, rng, resolution)
        projected = {names[i]: comm[membership[i]] for i in membership}
        phases.append(Partition(projected).compact())
        n_comms = len(set(comm.values()))
        if n_comms == len(level.adj):
            break  # no node moved anywhere: converged
        level, node_to_super = _aggregate(level, comm)
        membership = {i: node_to_super[membership[i]] for i in membership}
    return phases


def louvain(g: InteractionGraph, seed: int, resolution: float = 1.0) -> Partition:
    """Community detection by modularity maximization, deterministic per seed."""
    return louvain_phases(g, seed, resolution)[-1]


def top_clusters(p: Partition, k: int = 20) -> list[tuple[int, int]]:
    """The k largest clusters as (cluster id, node count), size-descending."""
    sizes = {cid: len(nodes) for cid, nodes in p.clusters().items()}
    ranked = sorted(sizes.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k] if k >= 0 else ranked


# ---------------------------------------------------------------------------
# IO
# ---------------------------------------------------------------------------

def read_interactions(path: str | Path) -> list[tuple[str, str]]:
    """Read (source, target) interaction records from newline-delimited JSON."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                pairs.append((str(rec["source"]), str(rec["target"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}: bad record at line {lineno}: {exc}") from exc
    return pairs


def write_partition(path: str | Path, p: Partition) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for node in sorted(p.assignment):
            fh.write(json.dumps({"user": node, "cluster": p.assignment[node]}))
            fh.write("\n")


def read_partition(path: str | Path) -> Partition:
    assignment = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rec = json.loads(line)
                assignment[str(rec["user"])] = int(rec["cluster"])
    return Partition(assignment)
