"""Benchmark harness: success statistics, bootstrap intervals, time- and
energy-to-solution, and the seeded campaigns that feed them."""
from __future__ import annotations

import csv
import json
import math
from decimal import Decimal
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .hnn import UpdatePlan, anneal_runs, derive_seed
from .instances import Graph, graph_to_weights
from .schedules import NoiseSchedule, ThresholdSchedule

MODES = ("full", "10col", "1col")
SUCCESS_CRITERIA = ("best", "final")
_BOOT_KEY = 1_000_003  # keeps bootstrap streams apart from run seeds


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunResult:
    instance: str
    seed: int
    success: bool
    best_cut: float
    best_sweep: int
    final_cut: float = math.nan


def judge(outcomes, optimum: float, instance: str = "", criterion: str = "best") -> list[RunResult]:
    """Mark runs successful when their best (or final) cut reaches ``optimum``.

    ``>=`` rather than ``==`` so a best-known optimum that a run improves on
    still counts as solved.
    """
    if criterion not in SUCCESS_CRITERIA:
        raise ValueError(f"unknown success criterion {criterion!r}")
    out = []
    for o in outcomes:
        cut = o.best_cut if criterion == "best" else o.final_cut
        out.append(RunResult(instance, o.seed, bool(cut >= optimum), o.best_cut, o.best_sweep, o.final_cut))
    return out


def success_probability(results: Sequence) -> float:
    flags = _flags(results)
    return float(flags.mean())


def _flags(results) -> np.ndarray:
    if len(results) == 0:
        raise ValueError("no results")
    if isinstance(results[0], RunResult):
        return np.array([r.success for r in results], dtype=np.float64)
    return np.asarray(results, dtype=np.float64)


def n_repetitions(p: float, target: float = 0.99) -> float:
    """Expected repetitions to see one success with probability ``target``."""
    if not (0.0 < target < 1.0):
        raise ValueError("target must lie in (0, 1)")
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ValueError(f"success probability {p!r} outside [0, 1]")
    if p == 0.0:
        return math.inf
    if p >= target:
        return 1.0
    return max(1.0, math.log(1.0 - target) / math.log1p(-p))


def annealing_time(n: int, sweeps: int, batch_size: int, clock_period: float) -> float:
    if n < 1 or sweeps < 0 or batch_size < 1 or clock_period <= 0:
        raise ValueError("annealing_time needs n >= 1, sweeps >= 0, batch >= 1, period > 0")
    if batch_size > n:
        raise ValueError("batch size exceeds node count")
    # decimal product so that e.g. 300 steps of 1 ns is exactly 3e-7 s
    return float(Decimal(sweeps * (-(-n // batch_size))) * Decimal(repr(float(clock_period))))


def time_to_solution(t_ann: float, p: float, target: float = 0.99) -> float:
    return t_ann * n_repetitions(p, target)


def bootstrap_distribution(values, resamples: int = 2000, seed: int = 0,
                           statistic: Callable = np.mean) -> np.ndarray:
    x = _flags(values) if not isinstance(values, np.ndarray) else values.astype(np.float64)
    if x.size == 0:
        raise ValueError("no results")
    rng = np.random.default_rng(seed)
    out = np.empty(resamples)
    step = max(1, 2_000_000 // x.size)
    for s in range(0, resamples, step):
        k = min(step, resamples - s)
        idx = rng.integers(0, x.size, size=(k, x.size))
        out[s:s + k] = statistic(x[idx], axis=1)
    return out


def percentile_interval(dist, confidence: float = 0.95) -> tuple[float, float]:
    a = (1.0 - confidence) / 2.0
    lo, hi = np.quantile(np.asarray(dist), [a, 1.0 - a], method="inverted_cdf")
    return float(lo), float(hi)


def bootstrap_interval(results, resamples: int = 2000, confidence: float = 0.95, seed: int = 0,
                       statistic: Callable = np.mean) -> tuple[float, float]:
    """Percentile bootstrap over runs; always contains the point estimate."""
    if not (0.0 < confidence < 1.0):
        raise ValueError("confidence must lie in (0, 1)")
    x = _flags(results) if not isinstance(results, np.ndarray) else results.astype(np.float64)
    lo, hi = percentile_interval(bootstrap_distribution(x, resamples, seed, statistic), confidence)
    est = float(statistic(x))
    return min(lo, est), max(hi, est)


# -- energy model -----------------------------------------------------------------


@dataclass(frozen=True)
class EnergyTable:
    """Per-clock-cycle energy (pJ), leakage (uW) and area (um^2) by component.

    ``crossbar`` holds one energy per activity mode.  ``unitemized`` is
    energy present in the published totals but not in any listed component.
    """

    energy_pj: dict
    crossbar_pj: dict
    leakage_uw: dict = field(default_factory=dict)
    area_um2: dict = field(default_factory=dict)
    unitemized_pj: float = 0.0

    @classmethod
    def default(cls) -> "EnergyTable":
        return cls(
            energy_pj=dict(io_buffer=0.023, sw_matrix=0.270, mux=0.013, mux_decoder=0.110, comparator=0.052),
            crossbar_pj={"full": 198.10, "10col": 30.953, "1col": 3.095},
            leakage_uw=dict(io_buffer=1.5808, sw_matrix=3.2467, crossbar=0.0, mux=0.0,
                            mux_decoder=16.37, comparator=0.0062),
            area_um2=dict(io_buffer=245.12, sw_matrix=175.32, crossbar=201.30, mux=939.52,
                          mux_decoder=340.57, comparator=3.49),
            unitemized_pj=29.453,
        )

    def energy_per_cycle(self, mode: str) -> float:
        if mode not in self.crossbar_pj:
            raise ValueError(f"unknown activity mode {mode!r}")
        return sum(self.energy_pj.values()) + self.crossbar_pj[mode] + self.unitemized_pj

    @property
    def leakage_total_uw(self) -> float:
        return sum(self.leakage_uw.values())

    def to_text(self) -> str:
        lines = [f"{k} = {v:g}" for k, v in self.energy_pj.items()]
        lines += [f"crossbar.{k} = {v:g}" for k, v in self.crossbar_pj.items()]
        lines.append(f"unitemized = {self.unitemized_pj:g}")
        lines += [f"leakage.{k} = {v:g}" for k, v in self.leakage_uw.items()]
        lines += [f"area.{k} = {v:g}" for k, v in self.area_um2.items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "EnergyTable":
        energy, xbar, leak, area, unitemized = {}, {}, {}, {}, 0.0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or not key:
                raise ConfigError(f"line {lineno}: expected 'component = value'")
            try:
                val = float(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: value {value.strip()!r} is not a number")
            prefix, dot, name = key.partition(".")
            if dot and prefix == "crossbar":
                xbar[name] = val
            elif dot and prefix == "leakage":
                leak[name] = val
            elif dot and prefix == "area":
                area[name] = val
            elif key == "unitemized":
                unitemized = val
            elif not dot:
                energy[key] = val
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not xbar:
            raise ConfigError("profile defines no crossbar.<mode> energies")
        return cls(energy, xbar, leak, area, unitemized)

    @classmethod
    def load(cls, path) -> "EnergyTable":
        with open(path) as fh:
            return cls.from_text(fh.read())


def power(table: EnergyTable, mode: str = "1col", clock_hz: float = 1e9, overhead: float = 2.0,
          include_leakage: bool = False) -> float:
    """Watts drawn at ``clock_hz``, times the facility ``overhead`` factor."""
    if clock_hz <= 0 or overhead <= 0:
        raise ValueError("clock and overhead must be positive")
    watts = table.energy_per_cycle(mode) * 1e-12 * clock_hz
    if include_leakage:
        watts += table.leakage_total_uw * 1e-6
    return watts * overhead


def energy_to_solution(power_w: float, tts_s: float) -> float:
    if power_w < 0 or tts_s < 0:
        raise ValueError("power and time must be non-negative")
    return power_w * tts_s


def throughput(energy_j: float) -> float:
    """Solutions per second per watt (= 1/J)."""
    if energy_j <= 0:
        raise ValueError("throughput is undefined for zero energy-to-solution")
    return 1.0 / energy_j


def parallel_layout(t_ann: float, n_rep: float, power_w: float, units: int) -> tuple[float, float]:
    """(wall time, energy) when ``n_rep`` repetitions are spread over ``units`` copies."""
    if units < 1:
        raise ValueError("units must be >= 1")
    wall = t_ann * n_rep / units
    return wall, (power_w * units) * wall


# -- reports ---------------------------------------------------------------------


@dataclass
class TtsReport:
    p_success: float
    p_interval: tuple
    t_ann: float
    n_rep: float
    tts: float
    power: float
    energy_to_solution: float
    solutions_per_second_per_watt: float
    instance: str = ""
    runs: int = 0

    @classmethod
    def build(cls, p, p_interval, t_ann, power_w, target=0.99, instance="", runs=0) -> "TtsReport":
        n_rep = n_repetitions(p, target)
        tts = t_ann * n_rep
        e = energy_to_solution(power_w, tts)
        if math.isinf(e):
            thr = 0.0
        else:
            thr = throughput(e) if e > 0 else math.inf
        return cls(p, tuple(p_interval), t_ann, n_rep, tts, power_w, e, thr, instance, runs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_interval"] = list(self.p_interval)
        return {k: _jsonable(v) for k, v in d.items()}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class CampaignReport:
    instances: list
    median_tts: float
    median_interval: tuple

    def to_dict(self) -> dict:
        return dict(instances=[r.to_dict() for r in self.instances],
                    median_tts=_jsonable(self.median_tts),
                    median_tts_interval=[_jsonable(x) for x in self.median_interval])


def tts_campaign(instances: Sequence[Graph], seeds: int, master_seed: int = 0, *,
                 plan: UpdatePlan = UpdatePlan(10), noise: NoiseSchedule = NoiseSchedule(),
                 threshold: ThresholdSchedule = ThresholdSchedule(), sweeps: int = 50,
                 rule: str = "literal", backend_factory: Optional[Callable] = None,
                 clock_period: float = 1e-9, power_w: Optional[float] = None, target: float = 0.99,
                 criterion: str = "best", resamples: int = 2000, jobs: int = 1) -> CampaignReport:
    """Per-instance TTS reports and their median with a bootstrap interval.

    Instance ``i`` run ``k`` uses seed ``derive_seed(master_seed, i, k)``.
    """
    if power_w is None:
        power_w = power(EnergyTable.default())
    reports, flags = [], []
    for i, g in enumerate(instances):
        if g.optimum is None:
            raise ConfigError(f"instance {g.name or i} has no reference optimum")
        W = graph_to_weights(g)
        backend = backend_factory(W, i) if backend_factory else None
        run_seeds = [derive_seed(master_seed, i, k) for k in range(seeds)]
        outcomes = anneal_runs(W, run_seeds, jobs=jobs, plan=plan, noise=noise, threshold=threshold,
                               sweeps=sweeps, rule=rule, backend=backend)
        res = judge(outcomes, g.optimum.value, g.name, criterion)
        f = _flags(res)
        flags.append(f)
        t_ann = annealing_time(g.n, sweeps, plan.batch_size, clock_period)
        ci = bootstrap_interval(f, resamples, seed=derive_seed(master_seed, _BOOT_KEY, i))
        reports.append(TtsReport.build(float(f.mean()), ci, t_ann, power_w, target, g.name, len(res)))
    tts = np.array([r.tts for r in reports])
    median = float(np.median(tts))
    rng = np.random.default_rng(derive_seed(master_seed, _BOOT_KEY + 1))
    boot = np.empty(resamples)
    for b in range(resamples):
        vals = []
        for f, r in zip(flags, reports):
            p = f[rng.integers(0, f.size, f.size)].mean()
            vals.append(r.t_ann * n_repetitions(float(p), target))
        boot[b] = np.median(vals)
    lo, hi = percentile_interval(boot)
    return CampaignReport(reports, median, (min(lo, median), max(hi, median)))


# -- parameter sweeps -------------------------------------------------------------


@dataclass
class CutSample:
    """Per-seed cuts (under the chosen criterion) for one campaign cell."""

    cuts: np.ndarray
    success: np.ndarray
    label: dict

    @property
    def p_success(self) -> float:
        return float(self.success.mean())


def _sample(outcomes, optimum, criterion, label) -> CutSample:
    attr = "best_cut" if criterion == "best" else "final_cut"
    cuts = np.array([getattr(o, attr) for o in outcomes])
    return CutSample(cuts, cuts >= optimum, label)


def noise_sweep(g: Graph, amplitudes: Sequence[float], seeds: int, sweeps: int, optimum: float,
                master_seed: int = 0, plan: UpdatePlan = UpdatePlan(), criterion: str = "best",
                backend=None, jobs: int = 1) -> list[CutSample]:
    """Fixed-amplitude runs; every amplitude shares the same run seeds."""
    if criterion not in SUCCESS_CRITERIA:
        raise ValueError(f"unknown success criterion {criterion!r}")
    W = graph_to_weights(g)
    run_seeds = [derive_seed(master_seed, k) for k in range(seeds)]
    out = []
    for a in amplitudes:
        noise = NoiseSchedule("fixed", float(a)) if a > 0 else NoiseSchedule()
        outcomes = anneal_runs(W, run_seeds, jobs=jobs, plan=plan, noise=noise, sweeps=sweeps,
                               backend=backend)
        out.append(_sample(outcomes, optimum, criterion, dict(amplitude=float(a))))
    return out


def noise_sweep_rows(samples: Sequence[CutSample]) -> list[dict]:
    return [dict(amplitude=s.label["amplitude"], mean_cut=float(s.cuts.mean()),
                 min_cut=float(s.cuts.min()), max_cut=float(s.cuts.max()), p_success=s.p_success)
            for s in samples]


@dataclass(frozen=True)
class ScheduleSpec:
    name: str
    noise: NoiseSchedule = NoiseSchedule()
    threshold: ThresholdSchedule = ThresholdSchedule()
    rule: str = "literal"


def schedule_compare(g: Graph, schedules: Sequence[ScheduleSpec], budgets: Sequence[int], seeds: int,
                     optimum: float, master_seed: int = 0, plan: UpdatePlan = UpdatePlan(),
                     criterion: str = "best", backend=None, jobs: int = 1) -> list[CutSample]:
    """Every (schedule, budget) cell shares the same run seeds."""
    if criterion not in SUCCESS_CRITERIA:
        raise ValueError(f"unknown success criterion {criterion!r}")
    W = graph_to_weights(g)
    run_seeds = [derive_seed(master_seed, k) for k in range(seeds)]
    out = []
    for T in budgets:
        for s in schedules:
            outcomes = anneal_runs(W, run_seeds, jobs=jobs, plan=plan, noise=s.noise,
                                   threshold=s.threshold, rule=s.rule, sweeps=int(T), backend=backend)
            out.append(_sample(outcomes, optimum, criterion, dict(schedule=s.name, sweeps=int(T))))
    return out


def schedule_rows(samples: Sequence[CutSample], resamples: int = 2000, seed: int = 0,
                  confidence: float = 0.95) -> list[dict]:
    rows = []
    for k, s in enumerate(samples):
        lo, hi = bootstrap_interval(s.cuts, resamples, confidence, seed=seed + k)
        rows.append(dict(schedule=s.label["schedule"], sweeps=s.label["sweeps"],
                         mean_cut=float(s.cuts.mean()), ci_low=lo, ci_high=hi, p_success=s.p_success))
    return rows


# -- output -----------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(rows: Sequence[dict], columns: Sequence[str], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])


def write_json(data: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
