"""Stochastic Hopfield dynamics for Max-Cut.

Each node sees ``u_i = sum_j W_ij v_j`` plus uniform noise and is set by a
threshold rule.  A sweep visits every node once in batches; a batch reads
fields from the current state and commits all of its updates together.

Randomness of one run comes from three independent streams spawned from its
seed: initial state, dynamics (ordering + noise) and backend.  The compiled
path draws the dynamics stream in bulk in exactly the order the reference
path draws it sweep by sweep, so both produce the same trajectory.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import _kernels
from .crossbar import IdealBackend
from .instances import energy_offset, hopfield_energy
from .schedules import NoiseSchedule, ThresholdSchedule, sample_noise

RULES = ("literal", "hysteresis")
ORDERS = ("random", "fixed")
ENGINES = ("fast", "reference")


@dataclass
class HnnState:
    v: np.ndarray
    cycle: int = 0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float64)
        if self.v.ndim != 1 or not np.all(np.abs(self.v) == 1.0):
            raise ValueError("state entries must be +1 or -1")
        if self.cycle < 0:
            raise ValueError("cycle must be non-negative")


@dataclass(frozen=True)
class UpdatePlan:
    batch_size: int = 1
    order: str = "random"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.order not in ORDERS:
            raise ValueError(f"unknown order policy {self.order!r}")

    def check(self, n: int) -> None:
        if self.batch_size > n:
            raise ValueError(f"batch_size {self.batch_size} exceeds node count {n}")

    def n_batches(self, n: int) -> int:
        return -(-n // self.batch_size)

    def draw_order(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.order == "fixed":
            return np.arange(n)
        return np.argsort(rng.random(n), kind="stable")

    def batches(self, order: np.ndarray):
        for p0 in range(0, order.size, self.batch_size):
            yield order[p0:p0 + self.batch_size]


@dataclass
class AnnealTrace:
    energies: np.ndarray
    cuts: np.ndarray
    best_cut: float
    best_sweep: int
    final_state: np.ndarray
    best_state: np.ndarray
    seed: int

    @property
    def final_cut(self) -> float:
        return float(self.cuts[-1])

    def summary(self) -> dict:
        return dict(best_cut=_num(self.best_cut), best_sweep=int(self.best_sweep),
                    final_cut=_num(self.final_cut), seed=int(self.seed))


class RunOutcome(NamedTuple):
    seed: int
    best_cut: float
    best_sweep: int
    final_cut: float


def _num(x):
    x = float(x)
    return int(x) if x.is_integer() else x


def local_fields(W, v, nodes=None) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if W.ndim != 2 or W.shape[1] != v.shape[0]:
        raise ValueError(f"weights {W.shape} do not match state of length {v.shape[0]}")
    if nodes is None:
        return W @ v
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= W.shape[0]):
        raise IndexError("node index out of range")
    return W[nodes] @ v


def apply_threshold(x, theta, current, rule: str = "literal"):
    """Threshold rule, vectorized over ``x``/``current``.

    literal: +1 iff x >= theta.  hysteresis: a node in state s flips only if
    s*x <= -theta.
    """
    x = np.asarray(x, dtype=np.float64)
    if rule == "literal":
        out = np.where(x >= theta, 1.0, -1.0)
    elif rule == "hysteresis":
        s = np.asarray(current, dtype=np.float64)
        out = np.where(s * x <= -theta, -s, s)
    else:
        raise ValueError(f"unknown threshold rule {rule!r}")
    return out if out.ndim else float(out)


def sweep(state: HnnState, W, plan: UpdatePlan, noise_amplitude: float, theta: float,
          rule: str, rng: np.random.Generator, backend=None) -> HnnState:
    """One full sweep; ``backend`` is a backend session (``fields(v, nodes)``) or None."""
    W = np.asarray(W, dtype=np.float64)
    n = state.v.shape[0]
    plan.check(n)
    session = backend if backend is not None else IdealBackend(W).open()
    v = state.v.copy()
    order = plan.draw_order(n, rng)
    for nodes in plan.batches(order):
        u = session.fields(v, nodes) + sample_noise(noise_amplitude, nodes.size, rng)
        v[nodes] = apply_threshold(u, theta, v[nodes], rule)
    return HnnState(v, state.cycle + 1)


def _streams(seed):
    init, dyn, back = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(init), np.random.default_rng(dyn), np.random.default_rng(back))


def initial_state(n: int, seed) -> np.ndarray:
    """Uniform random bipolar state for a run seed (the run's init stream)."""
    rng, _, _ = _streams(seed)
    return np.where(rng.random(n) < 0.5, 1.0, -1.0)


def run_anneal(W, plan: UpdatePlan = UpdatePlan(), noise: NoiseSchedule = NoiseSchedule(),
               threshold: ThresholdSchedule = ThresholdSchedule(), sweeps: int = 100,
               seed: int = 0, backend=None, rule: str = "literal", engine: str = "fast",
               v0=None) -> AnnealTrace:
    """Anneal from a random (or given) state for ``sweeps`` sweeps.

    ``backend`` supplies the field operator (default: exact fields of W).
    Energies and cuts are always evaluated with the true W, theta excluded.
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    n = W.shape[0]
    if W.shape != (n, n):
        raise ValueError("weight matrix must be square")
    if sweeps < 0:
        raise ValueError("sweeps must be >= 0")
    if rule not in RULES:
        raise ValueError(f"unknown threshold rule {rule!r}")
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    plan.check(n)
    init_rng, dyn_rng, back_rng = _streams(seed)
    start = np.where(init_rng.random(n) < 0.5, 1.0, -1.0)
    if v0 is not None:
        start = HnnState(v0).v.copy()
    amps = noise.values(sweeps) if sweeps else np.zeros(0)
    thetas = threshold.values(sweeps) if sweeps else np.zeros(0)
    backend = backend if backend is not None else IdealBackend(W)
    session = backend.open(back_rng)

    if engine == "fast":
        if plan.order == "random":
            draws = dyn_rng.random((sweeps, 2 * n))
            orders = np.argsort(draws[:, :n], axis=1, kind="stable")
            unif = np.ascontiguousarray(draws[:, n:])
        else:
            orders = np.tile(np.arange(n), (sweeps, 1))
            unif = dyn_rng.random((sweeps, n))
        offsets = session.bulk_offsets(orders, plan.batch_size)
        if offsets is None:
            offsets = np.zeros((0, 0))
        A = np.ascontiguousarray(backend.matrix, dtype=np.float64)
        energies, cuts, v, best_v, best_t = _kernels.anneal(
            A, W, start, orders.astype(np.int64), unif, np.ascontiguousarray(offsets),
            amps, thetas, plan.batch_size, rule == "hysteresis")
        return AnnealTrace(energies, cuts, float(cuts[best_t]), int(best_t), v, best_v, seed)

    offset = energy_offset(W)
    state = HnnState(start)
    energies = np.empty(sweeps + 1)
    energies[0] = hopfield_energy(W, state.v)
    best_t, best_v = 0, state.v.copy()
    best = offset - energies[0]
    for t in range(sweeps):
        state = sweep(state, W, plan, amps[t], thetas[t], rule, dyn_rng, session)
        energies[t + 1] = hopfield_energy(W, state.v)
        if offset - energies[t + 1] > best:
            best, best_t, best_v = offset - energies[t + 1], t + 1, state.v.copy()
    cuts = offset - energies
    return AnnealTrace(energies, cuts, float(best), best_t, state.v, best_v, seed)


def _outcome(seed, W, kwargs) -> RunOutcome:
    tr = run_anneal(W, seed=seed, **kwargs)
    return RunOutcome(int(seed), tr.best_cut, tr.best_sweep, tr.final_cut)


def _outcome_chunk(seeds, W, kwargs):
    return [_outcome(s, W, kwargs) for s in seeds]


def anneal_runs(W, seeds: Sequence[int], jobs: int = 1, **kwargs) -> list[RunOutcome]:
    """Independent runs, one per seed, in seed order regardless of ``jobs``."""
    seeds = [int(s) for s in seeds]
    W = np.ascontiguousarray(W, dtype=np.float64)
    if jobs <= 1 or len(seeds) < 2:
        return _outcome_chunk(seeds, W, kwargs)
    k = -(-len(seeds) // (4 * jobs))
    chunks = [seeds[i:i + k] for i in range(0, len(seeds), k)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = ex.map(partial(_outcome_chunk, W=W, kwargs=kwargs), chunks)
        return [r for part in parts for r in part]


def derive_seed(master: int, *index: int) -> int:
    """Run seed for ``index`` under ``master``; independent of scheduling."""
    ss = np.random.SeedSequence([int(master), *[int(i) for i in index]])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def write_trace_csv(trace: AnnealTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep", "energy", "cut"])
        for t, (e, c) in enumerate(zip(trace.energies, trace.cuts)):
            w.writerow([t, f"{e:.12g}", f"{c:.12g}"])


def write_summary_json(trace: AnnealTrace, path, extra: Optional[dict] = None) -> None:
    data = trace.summary()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
