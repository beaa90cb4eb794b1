"""Analog crossbar model: weight-to-conductance mapping, programming error,
ideal and nodal (wire-resistance) vector-matrix products, RTN injection,
and the field backends consumed by the annealer.

Orientation: crossbar rows carry the input state, columns produce the local
fields, so ``G[j, i]`` encodes ``W[i, j]``.  Bipolar states drive rows at
``+-v_read``; column lines are sensed at virtual ground.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .instances import generate_dense_random, graph_to_weights

PRESETS = {
    "standard": dict(r_on=10e3, r_off=1e6, r_wire=1.0),
    "sub-standard": dict(r_on=2e3, r_off=100e3, r_wire=1.0),
}
MAPPINGS = ("unipolar_signflip", "differential")
MODES = ("ideal", "behavioral", "nodal")


class UnsupportedWeightsError(ValueError):
    pass


class NumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class CrossbarConfig:
    r_on: float = 10e3
    r_off: float = 1e6
    r_wire: float = 1.0
    prog_sigma: float = 0.0
    v_read: float = 0.2
    mapping: str = "unipolar_signflip"
    mode: str = "nodal"
    sigma: float = 0.0  # behavioral-mode field error, weight units

    def __post_init__(self):
        if not (0 < self.r_on < self.r_off):
            raise ValueError("need 0 < r_on < r_off")
        if self.r_wire < 0:
            raise ValueError("r_wire must be >= 0")
        if self.prog_sigma < 0 or self.sigma < 0:
            raise ValueError("error magnitudes must be >= 0")
        if self.v_read <= 0:
            raise ValueError("v_read must be > 0")
        if self.mapping not in MAPPINGS:
            raise ValueError(f"unknown mapping {self.mapping!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown backend mode {self.mode!r}")

    @classmethod
    def preset(cls, name: str, **overrides) -> "CrossbarConfig":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown parameter set {name!r}; choose from {sorted(PRESETS)}")
        return cls(**{**base, **overrides})

    @property
    def g_on(self) -> float:
        return 1.0 / self.r_on

    @property
    def g_off(self) -> float:
        return 1.0 / self.r_off

    @property
    def g_range(self) -> float:
        return self.g_on - self.g_off

    def with_(self, **changes) -> "CrossbarConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class ConductanceMatrix:
    """Conductances in siemens plus what is needed to read weights back.

    ``scale`` is the weight magnitude represented by a full ``G_on - G_off``
    swing.  Differential mappings interleave columns as (G+, G-) pairs.
    """

    g: np.ndarray
    scheme: str
    scale: float
    g_on: float
    g_off: float

    @property
    def g_range(self) -> float:
        return self.g_on - self.g_off

    @property
    def n_outputs(self) -> int:
        return self.g.shape[1] // 2 if self.scheme == "differential" else self.g.shape[1]


def map_weights(W, cfg: CrossbarConfig, scheme: Optional[str] = None) -> ConductanceMatrix:
    W = np.asarray(W, dtype=np.float64)
    scheme = scheme or cfg.mapping
    Wt = W.T
    g_on, g_off = cfg.g_on, cfg.g_off
    if scheme == "unipolar_signflip":
        nz = np.unique(Wt[Wt != 0])
        if nz.size > 1 or (nz.size == 1 and nz[0] > 0):
            raise UnsupportedWeightsError(
                "unipolar sign-flip mapping needs every weight in {0, -c} for one c > 0"
            )
        scale = float(-nz[0]) if nz.size else 1.0
        g = np.where(Wt != 0, g_on, g_off)
    elif scheme == "differential":
        wmax = float(np.abs(Wt).max()) if Wt.size else 0.0
        scale = wmax if wmax > 0 else 1.0
        wn = Wt / scale
        g = np.empty((Wt.shape[0], 2 * Wt.shape[1]))
        g[:, 0::2] = g_off + (g_on - g_off) * np.maximum(wn, 0.0)
        g[:, 1::2] = g_off + (g_on - g_off) * np.maximum(-wn, 0.0)
    else:
        raise ValueError(f"unknown mapping {scheme!r}")
    return ConductanceMatrix(g, scheme, scale, g_on, g_off)


def program(cm: ConductanceMatrix, prog_sigma: float, rng: np.random.Generator) -> ConductanceMatrix:
    """Gaussian write error of ``prog_sigma`` times the conductance range, clamped."""
    if prog_sigma < 0:
        raise ValueError("prog_sigma must be >= 0")
    if prog_sigma == 0:
        return cm
    noise = rng.standard_normal(cm.g.shape) * (prog_sigma * cm.g_range)
    g = np.clip(cm.g + noise, cm.g_off, cm.g_on)
    return replace(cm, g=g)


def _as_conductances(G) -> np.ndarray:
    return np.asarray(G.g if isinstance(G, ConductanceMatrix) else G, dtype=np.float64)


def vmm_ideal(G, v_in) -> np.ndarray:
    """Column currents ``I_c = sum_r G[r, c] v_in[r]``."""
    g = _as_conductances(G)
    v_in = np.asarray(v_in, dtype=np.float64)
    if g.ndim != 2 or v_in.shape != (g.shape[0],):
        raise ValueError(f"input of shape {v_in.shape} does not match {g.shape[0]} rows")
    return g.T @ v_in


# -- nodal analysis ------------------------------------------------------------
#
# Unknowns: a row-line node and a column-line node at every cell.  Row-line
# nodes are numbered row-major and column-line nodes column-major, so every
# wire segment couples adjacent unknowns and the tridiagonal part of the
# system is the per-line conductance chain (used as the CG preconditioner).


@dataclass
class _Network:
    A: sp.csr_matrix
    drivers: np.ndarray  # row-line node at the head of each row
    senses: np.ndarray  # column-line node at the foot of each column
    g_wire: float


def _assemble(g: np.ndarray, r_wire: float) -> _Network:
    R, C = g.shape
    gw = 1.0 / r_wire
    rid = np.arange(R * C).reshape(R, C)
    cid = R * C + np.arange(R * C).reshape(C, R).T
    a = np.concatenate([rid[:, :-1].ravel(), cid[:-1, :].ravel(), rid.ravel()])
    b = np.concatenate([rid[:, 1:].ravel(), cid[1:, :].ravel(), cid.ravel()])
    cond = np.concatenate([
        np.full(R * (C - 1), gw),
        np.full((R - 1) * C, gw),
        g.ravel(),
    ])
    ends = np.concatenate([rid[:, 0], cid[-1, :]])
    rows = np.concatenate([a, b, a, b, ends])
    cols = np.concatenate([a, b, b, a, ends])
    vals = np.concatenate([cond, cond, -cond, -cond, np.full(ends.size, gw)])
    N = 2 * R * C
    A = sp.csr_matrix((vals, (rows, cols)), shape=(N, N))
    return _Network(A, rid[:, 0].copy(), cid[-1, :].copy(), gw)


def _line_preconditioner(A: sp.csr_matrix):
    T = sp.diags([A.diagonal(-1), A.diagonal(0), A.diagonal(1)], [-1, 0, 1], format="csc")
    lu = spla.splu(T)
    return spla.LinearOperator(A.shape, lu.solve)


def vmm_nodal(G, v_in, r_wire: float, rtol: float = 1e-10) -> np.ndarray:
    """Column currents of the full resistive network with wire resistance.

    Each row is driven at ``v_in`` through one wire segment; each column is
    sensed at virtual ground through one segment at its far end.
    """
    g = _as_conductances(G)
    v_in = np.asarray(v_in, dtype=np.float64)
    if g.ndim != 2 or v_in.shape != (g.shape[0],):
        raise ValueError(f"input of shape {v_in.shape} does not match {g.shape[0]} rows")
    if r_wire < 0:
        raise ValueError("r_wire must be >= 0")
    if r_wire == 0:
        if not np.any(g):
            raise NumericalError("singular network: zero wire resistance and no conducting cells")
        return vmm_ideal(g, v_in)
    net = _assemble(g, r_wire)
    rhs = np.zeros(net.A.shape[0])
    rhs[net.drivers] = net.g_wire * v_in
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0:
        return np.zeros(g.shape[1])
    x, info = spla.cg(net.A, rhs, rtol=rtol * 1e-2, atol=0.0, M=_line_preconditioner(net.A), maxiter=5000)
    if info != 0 or np.linalg.norm(net.A @ x - rhs) > rtol * bnorm:
        x = spla.spsolve(net.A.tocsc(), rhs)
        if np.linalg.norm(net.A @ x - rhs) > rtol * bnorm:
            raise NumericalError("nodal solve did not reach the requested residual")
    return net.g_wire * x[net.senses]


def nodal_transfer(G, r_wire: float, block: int = 32) -> np.ndarray:
    """Effective conductance matrix ``Geff`` with ``vmm_nodal(G, v) == Geff.T @ v``.

    The network is linear, so one factorization and one solve per row gives
    the exact input-output map.
    """
    g = _as_conductances(G)
    if r_wire == 0:
        if not np.any(g):
            raise NumericalError("singular network: zero wire resistance and no conducting cells")
        return g.copy()
    net = _assemble(g, r_wire)
    lu = spla.splu(net.A.tocsc())
    R = g.shape[0]
    out = np.empty_like(g)
    for start in range(0, R, block):
        rows = np.arange(start, min(start + block, R))
        rhs = np.zeros((net.A.shape[0], rows.size))
        rhs[net.drivers[rows], np.arange(rows.size)] = net.g_wire
        out[rows, :] = (net.g_wire * lu.solve(rhs)[net.senses, :]).T
    return out


def reconstruct_fields(cm: ConductanceMatrix, currents, x, v_read: float) -> np.ndarray:
    """Convert column currents for bipolar input ``x`` back to weight units."""
    currents = np.asarray(currents, dtype=np.float64)
    if cm.scheme == "unipolar_signflip":
        baseline = cm.g_off * float(np.sum(x))
        return -cm.scale * (currents / v_read - baseline) / cm.g_range
    return cm.scale * (currents[0::2] - currents[1::2]) / (v_read * cm.g_range)


def effective_weights(cm: ConductanceMatrix, geff: np.ndarray) -> np.ndarray:
    """Field operator ``A`` in weight units with ``fields = A @ x``."""
    if cm.scheme == "unipolar_signflip":
        return -cm.scale * (geff.T - cm.g_off) / cm.g_range
    return cm.scale * (geff[:, 0::2] - geff[:, 1::2]).T / cm.g_range


# -- random telegraph noise row --------------------------------------------------


@dataclass(frozen=True)
class RtnConfig:
    delta_g: float
    rate_up: float = 0.1
    rate_down: float = 0.1

    def __post_init__(self):
        if self.delta_g < 0:
            raise ValueError("delta_g must be >= 0")
        if not (0 <= self.rate_up <= 1 and 0 <= self.rate_down <= 1):
            raise ValueError("RTN rates must lie in [0, 1]")

    @classmethod
    def default(cls, cfg: CrossbarConfig) -> "RtnConfig":
        return cls(delta_g=0.05 * cfg.g_range)

    @property
    def stationary_high(self) -> float:
        total = self.rate_up + self.rate_down
        return 0.5 if total == 0 else self.rate_up / total


@dataclass(frozen=True)
class RtnState:
    high: np.ndarray


def rtn_init(n: int, rtn: RtnConfig, rng: np.random.Generator) -> RtnState:
    """Draw each column's telegraph level from the stationary distribution."""
    return RtnState(rng.random(n) < rtn.stationary_high)


def rtn_step(state: RtnState, rtn: RtnConfig, rng: np.random.Generator) -> RtnState:
    u = rng.random(state.high.shape[0])
    return RtnState(np.where(state.high, u >= rtn.rate_down, u < rtn.rate_up))


def rtn_offset(state: RtnState, rtn: RtnConfig, cfg: CrossbarConfig, scale: float = 1.0) -> np.ndarray:
    """Field offset of the noise row: ``delta_g * v_read`` in weight units when high."""
    step = scale * rtn.delta_g * cfg.v_read / (cfg.v_read * cfg.g_range)
    return np.where(state.high, step, 0.0)


# -- programmed arrays and field evaluation ------------------------------------------


@dataclass(frozen=True)
class Crossbar:
    """A weight matrix programmed into an array under ``cfg``."""

    weights: np.ndarray
    cfg: CrossbarConfig
    conductances: ConductanceMatrix

    @classmethod
    def build(cls, W, cfg: CrossbarConfig, rng: Optional[np.random.Generator] = None) -> "Crossbar":
        W = np.asarray(W, dtype=np.float64)
        cm = map_weights(W, cfg)
        if cfg.prog_sigma > 0:
            if rng is None:
                raise ValueError("programming error needs a random generator")
            cm = program(cm, cfg.prog_sigma, rng)
        return cls(W, cfg, cm)


def analog_local_fields(xbar: Crossbar, v, rng=None, rtn: Optional[RtnConfig] = None,
                        rtn_state: Optional[RtnState] = None) -> np.ndarray:
    """All local fields for state ``v`` as read from the analog array."""
    v = np.asarray(v, dtype=np.float64)
    cfg = xbar.cfg
    if cfg.mode == "ideal":
        return xbar.weights @ v
    if cfg.mode == "behavioral":
        return xbar.weights @ v + cfg.sigma * rng.standard_normal(v.shape[0])
    currents = vmm_nodal(xbar.conductances, v * cfg.v_read, cfg.r_wire)
    fields = reconstruct_fields(xbar.conductances, currents, v, cfg.v_read)
    if rtn is not None and rtn_state is not None:
        fields = fields + rtn_offset(rtn_state, rtn, cfg, xbar.conductances.scale)
    return fields


def error_sigma(cfg: CrossbarConfig, size: int, density: float, trials: int,
                rng: np.random.Generator) -> float:
    """Pooled std of (analog - exact) fields over random binary problems.

    Each trial draws a random graph of the given density, a bipolar input,
    programs the array and solves the nodal network.  Passing generators
    with the same seed gives common random numbers across configurations.
    """
    if trials < 30:
        raise ValueError("error_sigma needs at least 30 trials")
    errs = []
    for _ in range(trials):
        W = graph_to_weights(generate_dense_random(size, density, seed=int(rng.integers(2**63))))
        x = np.where(rng.random(size) < 0.5, 1.0, -1.0)
        cm = program(map_weights(W, cfg), cfg.prog_sigma, rng)
        currents = vmm_nodal(cm, x * cfg.v_read, cfg.r_wire)
        errs.append(reconstruct_fields(cm, currents, x, cfg.v_read) - W @ x)
    return float(np.std(np.concatenate(errs)))


def calibrate(cfg: CrossbarConfig, sizes, densities, trials: int, seed: int) -> list[dict]:
    """Rows of ``size, density, trials, sigma``; each (size, density) uses its own stream."""
    rows = []
    for density in densities:
        for size in sizes:
            rng = np.random.default_rng([seed, int(size), int(round(density * 1e6))])
            rows.append(dict(size=int(size), density=float(density), trials=int(trials),
                             sigma=error_sigma(cfg, int(size), float(density), trials, rng)))
    return rows


def write_calibration(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["size", "density", "trials", "sigma"])
        for r in rows:
            w.writerow([r["size"], f"{r['density']:g}", r["trials"], f"{r['sigma']:.6e}"])


def export_conductances(cm: ConductanceMatrix, path) -> None:
    np.savetxt(path, cm.g, delimiter=",", fmt="%.9e")


# -- field backends for the annealer -------------------------------------------------
#
# A backend exposes ``matrix`` (the state-independent linear field operator
# in weight units) and ``open(rng)`` returning a per-run session.  Sessions
# evaluate fields batch by batch (``fields``) or produce the same per-position
# perturbations in bulk (``bulk_offsets``) for the compiled kernel.


class _IdealSession:
    def __init__(self, W):
        self.W = W

    def fields(self, v, nodes):
        return self.W[nodes] @ v

    def bulk_offsets(self, orders, batch):
        return None


class IdealBackend:
    name = "ideal"

    def __init__(self, W):
        self.matrix = np.asarray(W, dtype=np.float64)

    def open(self, rng=None):
        return _IdealSession(self.matrix)


class _BehavioralSession:
    def __init__(self, W, sigma, rng):
        self.W, self.sigma, self.rng = W, sigma, rng

    def fields(self, v, nodes):
        return self.W[nodes] @ v + self.sigma * self.rng.standard_normal(len(nodes))

    def bulk_offsets(self, orders, batch):
        return self.sigma * self.rng.standard_normal(orders.shape)


class BehavioralBackend:
    """Exact fields plus independent Gaussian error per evaluation."""

    name = "behavioral"

    def __init__(self, W, sigma: float):
        if sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.matrix = np.asarray(W, dtype=np.float64)
        self.sigma = float(sigma)

    def open(self, rng):
        return _BehavioralSession(self.matrix, self.sigma, rng)


class _NodalSession:
    def __init__(self, backend, rng):
        self.b = backend
        self.rng = rng
        self.rtn_state = rtn_init(backend.n, backend.rtn, rng) if backend.rtn else None

    def _tick(self):
        if self.rtn_state is not None:
            self.rtn_state = rtn_step(self.rtn_state, self.b.rtn, self.rng)

    def fields(self, v, nodes):
        self._tick()
        f = analog_local_fields(self.b.crossbar, v, rtn=self.b.rtn, rtn_state=self.rtn_state)
        return f[nodes]

    def bulk_offsets(self, orders, batch):
        if self.rtn_state is None:
            return None
        T, n = orders.shape
        out = np.empty((T, n))
        scale = self.b.crossbar.conductances.scale
        for t in range(T):
            for p0 in range(0, n, batch):
                self._tick()
                off = rtn_offset(self.rtn_state, self.b.rtn, self.b.crossbar.cfg, scale)
                pos = slice(p0, min(p0 + batch, n))
                out[t, pos] = off[orders[t, pos]]
        return out


class NodalBackend:
    """Fields read through a programmed array with wire resistance.

    Programming happens once at construction (one physical array shared by
    all runs); RTN, if enabled, is a per-run process.
    """

    name = "nodal"

    def __init__(self, W, cfg: CrossbarConfig, seed: int = 0, rtn: Optional[RtnConfig] = None):
        cfg = cfg.with_(mode="nodal")
        self.crossbar = Crossbar.build(W, cfg, np.random.default_rng(seed))
        self.n = self.crossbar.weights.shape[0]
        self.rtn = rtn
        self._matrix = None

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            xb = self.crossbar
            geff = nodal_transfer(xb.conductances, xb.cfg.r_wire)
            self._matrix = effective_weights(xb.conductances, geff)
        return self._matrix

    def open(self, rng):
        return _NodalSession(self, rng)


def make_backend(W, cfg: Optional[CrossbarConfig], seed: int = 0, rtn: Optional[RtnConfig] = None):
    if cfg is None or cfg.mode == "ideal":
        return IdealBackend(W)
    if cfg.mode == "behavioral":
        return BehavioralBackend(W, cfg.sigma)
    return NodalBackend(W, cfg, seed=seed, rtn=rtn)
