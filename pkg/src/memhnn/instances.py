"""Max-Cut instances: graphs, random generation, edge-list files, and the
cut <-> Hopfield-energy mapping.

A graph with adjacency weights ``a_ij`` is encoded as a Hopfield network
with weights ``w_ij = -a_ij``.  Energies use the pair-sum convention

    E(x) = -1/2 * sum_{i<j} w_ij x_i x_j + sum_i theta_i x_i

under which ``cut = -1/2 * sum_{i<j} w_ij - E`` holds exactly when
``theta = 0``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

PROVENANCES = ("exact", "best-known")


class InstanceParseError(ValueError):
    """Malformed instance file; the message names the offending line."""

    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class Optimum:
    value: int
    provenance: str = "exact"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown optimum provenance {self.provenance!r}")


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph stored as a canonical edge list.

    Edges are ``(i, j, w)`` with ``0 <= i < j < n`` and integer ``w``.  Use
    :meth:`from_edges` to canonicalize arbitrary input; the constructor only
    validates.
    """

    n: int
    edges: tuple = ()
    optimum: Optional[Optimum] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"node count must be a positive integer, got {self.n!r}")
        seen = set()
        for e in self.edges:
            i, j, w = e
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge {e} violates 0 <= i < j < n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i}, {j})")
            if int(w) != w:
                raise ValueError(f"edge {e} has a non-integer weight")
            seen.add((i, j))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence], optimum=None, name=""):
        """Canonicalize ``edges`` (orient i<j, sort) and build a graph."""
        canon = []
        for e in edges:
            if len(e) == 2:
                i, j, w = e[0], e[1], 1
            else:
                i, j, w = e
            i, j = int(i), int(j)
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if i > j:
                i, j = j, i
            canon.append((i, j, int(w)))
        canon.sort()
        if isinstance(optimum, tuple):
            optimum = Optimum(*optimum)
        return cls(int(n), tuple(canon), optimum, name)

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(m, 3)`` integer array of edges."""
        if not self.edges:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    @cached_property
    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency matrix ``a_ij`` (float64)."""
        a = np.zeros((self.n, self.n))
        e = self.edge_array
        a[e[:, 0], e[:, 1]] = e[:, 2]
        a[e[:, 1], e[:, 0]] = e[:, 2]
        return a

    @property
    def is_unweighted(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    @property
    def total_positive_weight(self) -> int:
        return int(sum(max(w, 0) for _, _, w in self.edges))

    def with_optimum(self, value: int, provenance: str = "exact") -> "Graph":
        return Graph(self.n, self.edges, Optimum(int(value), provenance), self.name)

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with node ``i`` renamed to ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        return Graph.from_edges(
            self.n, [(perm[i], perm[j], w) for i, j, w in self.edges], self.optimum, self.name
        )


def generate_dense_random(n: int, density: float, weighted: bool = False, seed: int = 0) -> Graph:
    """Random graph where each pair is an edge independently with prob ``density``.

    Unweighted edges have weight 1; weighted edges draw integer weights
    uniformly from 1..10.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not (0.0 < density <= 1.0):
        raise ValueError(f"density must lie in (0, 1], got {density!r}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    iu, ju = iu[keep], ju[keep]
    if weighted:
        w = rng.integers(1, 11, size=iu.size)
    else:
        w = np.ones(iu.size, dtype=np.int64)
    edges = tuple(zip(iu.tolist(), ju.tolist(), w.tolist()))
    return Graph(int(n), edges, None, f"rand-n{n}-d{density:g}-s{seed}")


def graph_to_weights(g: Graph) -> np.ndarray:
    """Hopfield weight matrix ``W = -A`` (symmetric, zero diagonal)."""
    return -g.adjacency


def _bipolar(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"state has shape {x.shape}, expected ({n},)")
    if not np.all(np.abs(x) == 1.0):
        raise ValueError("state entries must be +1 or -1")
    return x


def cut_value(g: Graph, x) -> int:
    """Total weight of edges whose endpoints lie on opposite sides of ``x``."""
    x = _bipolar(x, g.n)
    e = g.edge_array
    if e.shape[0] == 0:
        return 0
    crossing = x[e[:, 0]] != x[e[:, 1]]
    return int(e[crossing, 2].sum())


def hopfield_energy(W, x, theta=None) -> float:
    """Pair-sum Hopfield energy ``-1/2 sum_{i<j} w_ij x_i x_j + theta . x``."""
    W = np.asarray(W, dtype=np.float64)
    n = W.shape[0]
    if W.shape != (n, n):
        raise ValueError(f"weight matrix must be square, got {W.shape}")
    x = _bipolar(x, n)
    energy = -0.25 * float(x @ W @ x)
    if theta is not None:
        theta = np.broadcast_to(np.asarray(theta, dtype=np.float64), (n,))
        energy += float(theta @ x)
    return energy


def energy_offset(W) -> float:
    """``-1/2 * sum_{i<j} w_ij``, the constant linking cut and energy."""
    return -0.25 * float(np.asarray(W, dtype=np.float64).sum())


def cut_from_energy(W, energy: float) -> float:
    return energy_offset(W) - energy


# -- edge-list files ---------------------------------------------------------
#
# n m
# i j w        (m lines, 1-indexed)
# '#' comments anywhere; "# optimum <value> <exact|best-known>" is metadata.


def parse_instance(text: str, name: str = "") -> Graph:
    header = None
    optimum = None
    edges = []
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if fields and fields[0] == "optimum":
                if len(fields) != 3 or fields[2] not in PROVENANCES:
                    raise InstanceParseError(
                        lineno, "optimum metadata must read '# optimum <value> <exact|best-known>'"
                    )
                try:
                    optimum = Optimum(int(fields[1]), fields[2])
                except ValueError:
                    raise InstanceParseError(lineno, f"optimum value {fields[1]!r} is not an integer")
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise InstanceParseError(lineno, "header must be 'n m'")
            try:
                n, m = int(fields[0]), int(fields[1])
            except ValueError:
                raise InstanceParseError(lineno, "header fields must be integers")
            if n < 1 or m < 0:
                raise InstanceParseError(lineno, f"invalid header n={n} m={m}")
            header = (n, m)
            continue
        if len(fields) != 3:
            raise InstanceParseError(lineno, "edge line must be 'i j w'")
        try:
            i, j, w = (int(f) for f in fields)
        except ValueError:
            raise InstanceParseError(lineno, "edge fields must be integers")
        n = header[0]
        if not (1 <= i <= n and 1 <= j <= n):
            raise InstanceParseError(lineno, f"node index out of range 1..{n}")
        if i == j:
            raise InstanceParseError(lineno, f"self-loop on node {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InstanceParseError(lineno, f"duplicate edge {key[0]} {key[1]} (first on line {seen[key]})")
        seen[key] = lineno
        edges.append((i - 1, j - 1, w))
    if header is None:
        raise InstanceParseError(0, "missing 'n m' header")
    if len(edges) != header[1]:
        raise InstanceParseError(lineno, f"header declares {header[1]} edges, found {len(edges)}")
    return Graph.from_edges(header[0], edges, optimum, name)


def format_instance(g: Graph) -> str:
    lines = []
    if g.optimum is not None:
        lines.append(f"# optimum {g.optimum.value} {g.optimum.provenance}")
    lines.append(f"{g.n} {g.m}")
    lines.extend(f"{i + 1} {j + 1} {w}" for i, j, w in g.edges)
    return "\n".join(lines) + "\n"


def read_instance(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_instance(text, name=os.path.splitext(os.path.basename(str(path)))[0])


def write_instance(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_instance(g))
