"""Reference optima: exhaustive enumeration for small graphs and a
simulated-annealing baseline for larger ones."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .instances import Graph, cut_value


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_cut: int
    state: np.ndarray
    method: str
    evaluations: int


def exact_max_cut(g: Graph, node_limit: int = 26) -> OracleResult:
    if g.n > node_limit:
        raise InstanceTooLargeError(f"n = {g.n} exceeds the enumeration limit of {node_limit}")
    if g.n == 1:
        return OracleResult(0, np.ones(1), "exact", 1)
    best, x, total = _kernels.exact_max_cut(np.ascontiguousarray(g.adjacency))
    return OracleResult(int(round(best)), x, "exact", int(total))


def _sa_seeds(seed: int, restarts: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(restarts, dtype=np.uint32)


def sa_restart_bests(g: Graph, steps: int, t_init: float, t_final: float, seed: int,
                     restarts: int = 1):
    if not (t_init > t_final > 0):
        raise ValueError("need t_init > t_final > 0")
    if steps < 1 or restarts < 1:
        raise ValueError("steps and restarts must be >= 1")
    bests, x = _kernels.sa_restarts(np.ascontiguousarray(g.adjacency), int(steps),
                                    float(t_init), float(t_final), _sa_seeds(seed, restarts))
    return bests, x


def sa_baseline(g: Graph, steps: int = 10000, t_init: float = 5.0, t_final: float = 0.05,
                seed: int = 0, restarts: int = 1) -> OracleResult:
    """Best cut over ``restarts`` Metropolis runs with geometric cooling."""
    bests, x = sa_restart_bests(g, steps, t_init, t_final, seed, restarts)
    best = cut_value(g, x)
    assert best == int(round(bests.max()))
    return OracleResult(best, x, f"sa-best-of-{restarts}", int(steps) * int(restarts))


def reference_optimum(g: Graph, budget: int = 1000, node_limit: int = 26, steps: int = 0,
                      seed: int = 0) -> tuple[int, str]:
    """(value, provenance): file metadata, else exact, else SA best-of-``budget``."""
    if g.optimum is not None:
        return g.optimum.value, g.optimum.provenance
    if g.n <= node_limit:
        return exact_max_cut(g, node_limit).best_cut, "exact"
    steps = steps or 50 * g.n
    res = sa_baseline(g, steps=steps, seed=seed, restarts=budget)
    return res.best_cut, "best-known"


def optimum_line(value: int, provenance: str) -> str:
    return f"# optimum {int(value)} {provenance}"
