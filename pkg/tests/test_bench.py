import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from memhnn import bench
from memhnn.bench import (ConfigError, EnergyTable, RunResult, TtsReport, annealing_time,
                          bootstrap_interval, energy_to_solution, n_repetitions, parallel_layout,
                          power, success_probability, throughput, time_to_solution, tts_campaign)
from memhnn.hnn import RunOutcome, UpdatePlan
from memhnn.instances import Graph, generate_dense_random
from memhnn.oracle import exact_max_cut
from memhnn.schedules import NoiseSchedule


def runs(k, n):
    return [RunResult("g", s, s < k, 1.0, 0) for s in range(n)]


def test_success_probability():
    assert success_probability(runs(10, 10)) == 1.0
    assert success_probability(runs(0, 10)) == 0.0
    assert success_probability(runs(342, 1000)) == pytest.approx(0.342)
    with pytest.raises(ValueError):
        success_probability([])


def test_judge_criteria():
    outs = [RunOutcome(1, 10.0, 5, 9.0), RunOutcome(2, 9.0, 3, 9.0), RunOutcome(3, 11.0, 2, 10.0)]
    best = bench.judge(outs, 10, "g", "best")
    final = bench.judge(outs, 10, "g", "final")
    assert [r.success for r in best] == [True, False, True]
    assert [r.success for r in final] == [False, False, True]
    with pytest.raises(ValueError):
        bench.judge(outs, 10, criterion="median")


def test_n_repetitions():
    assert n_repetitions(0.99) == 1.0
    assert n_repetitions(1.0) == 1.0
    assert n_repetitions(0.5) == pytest.approx(math.log(0.01) / math.log(0.5), abs=1e-12)
    assert n_repetitions(0.5) == pytest.approx(6.6439, abs=1e-3)
    assert math.isinf(n_repetitions(0.0))
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ValueError):
            n_repetitions(bad)
    with pytest.raises(ValueError):
        n_repetitions(0.5, target=1.0)


@given(p=st.floats(1e-6, 1.0), q=st.floats(1e-6, 1.0))
def test_tts_monotone_and_bounded(p, q):
    lo, hi = sorted((p, q))
    assert time_to_solution(3e-7, hi) <= time_to_solution(3e-7, lo)
    assert time_to_solution(3e-7, lo) >= 3e-7


def test_annealing_time():
    assert annealing_time(60, 50, 10, 1e-9) == 3e-7
    assert annealing_time(60, 50, 60, 1e-9) == pytest.approx(50e-9)
    assert annealing_time(60, 100, 10, 1e-9) == pytest.approx(2 * annealing_time(60, 50, 10, 1e-9))
    assert annealing_time(61, 1, 10, 1.0) == 7.0
    with pytest.raises(ValueError):
        annealing_time(10, 5, 11, 1e-9)
    with pytest.raises(ValueError):
        annealing_time(10, 5, 1, 0.0)


def test_time_to_solution_examples():
    assert time_to_solution(3e-7, 0.342) == pytest.approx(3.30e-6, rel=2e-3)
    assert time_to_solution(3e-7, 0.995) == 3e-7
    assert time_to_solution(1e-6, 0.5) == pytest.approx(6.644e-6, rel=1e-4)


def test_bootstrap_interval():
    assert bootstrap_interval(runs(10, 10), seed=1) == (1.0, 1.0)
    r = runs(500, 1000)
    a, b = bootstrap_interval(r, 2000, seed=3), bootstrap_interval(r, 2000, seed=3)
    assert a == b
    width = a[1] - a[0]
    assert abs(width - 2 * 1.96 * math.sqrt(0.25 / 1000)) <= 0.5 * 0.062
    assert a[0] <= 0.5 <= a[1]
    with pytest.raises(ValueError):
        bootstrap_interval([])


@given(k=st.integers(0, 60), n=st.integers(1, 60), seed=st.integers(0, 1000))
def test_bootstrap_contains_estimate(k, n, seed):
    k = min(k, n)
    lo, hi = bootstrap_interval(runs(k, n), 200, seed=seed)
    assert lo <= k / n <= hi


def test_bootstrap_handles_infinite_statistics():
    x = np.array([1.0, 2.0, np.inf, 3.0])
    lo, hi = bootstrap_interval(x, 500, seed=0, statistic=np.median)
    assert lo <= np.median(x) <= hi


def test_energy_table_totals():
    t = EnergyTable.default()
    assert t.energy_per_cycle("full") == pytest.approx(228.021, abs=1e-9)
    assert t.energy_per_cycle("10col") == pytest.approx(60.874, abs=1e-9)
    assert t.energy_per_cycle("1col") == pytest.approx(33.016, abs=1e-9)
    assert t.leakage_total_uw == pytest.approx(21.2037, abs=1e-9)
    with pytest.raises(ValueError):
        t.energy_per_cycle("2col")


def test_energy_profile_roundtrip(tmp_path):
    t = EnergyTable.default()
    p = tmp_path / "profile.txt"
    p.write_text(t.to_text())
    u = EnergyTable.load(p)
    for mode in bench.MODES:
        assert u.energy_per_cycle(mode) == pytest.approx(t.energy_per_cycle(mode))
    assert u.area_um2 == t.area_um2
    custom = EnergyTable.from_text("# mine\ncomparator = 1\ncrossbar.1col = 2\n")
    assert custom.energy_per_cycle("1col") == 3.0
    for bad in ("crossbar.1col\n", "x = y\ncrossbar.1col = 1\n", "foo.bar = 1\n", "a = 1\n"):
        with pytest.raises(ConfigError):
            EnergyTable.from_text(bad)


def test_power_examples():
    t = EnergyTable.default()
    assert power(t, "1col", 1e9, 2.0) == pytest.approx(66.03e-3, abs=1e-5)
    assert power(t, "1col", 1e9, 1.0) == pytest.approx(33.02e-3, abs=1e-5)
    assert power(t, "full", 1e9, 2.0) == pytest.approx(456.0e-3, abs=1e-4)
    assert power(t, "full") > power(t, "10col") > power(t, "1col")
    assert power(t, "1col", include_leakage=True) - power(t, "1col") == pytest.approx(2 * 21.2037e-6)
    with pytest.raises(ValueError):
        power(t, "half")


def test_energy_and_throughput():
    e = energy_to_solution(66.03e-3, 3.307e-6)
    assert e == pytest.approx(0.2183e-6, rel=1e-3)
    assert throughput(e) == pytest.approx(4.58e6, rel=1e-2)
    assert energy_to_solution(1.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        throughput(0.0)


@given(units=st.integers(1, 64), n_rep=st.floats(1, 1e4))
def test_energy_invariant_to_parallel_layout(units, n_rep):
    _, e_par = parallel_layout(3e-7, n_rep, 0.066, units)
    _, e_seq = parallel_layout(3e-7, n_rep, 0.066, 1)
    assert e_par == pytest.approx(e_seq, rel=1e-12)
    assert e_seq == pytest.approx(energy_to_solution(0.066, 3e-7 * n_rep), rel=1e-12)


def test_report_invariants():
    r = TtsReport.build(0.342, (0.3, 0.38), 3e-7, 0.066032)
    assert r.tts == pytest.approx(r.t_ann * r.n_rep)
    assert r.energy_to_solution == pytest.approx(r.power * r.tts)
    assert r.solutions_per_second_per_watt == pytest.approx(1 / r.energy_to_solution)
    z = TtsReport.build(0.0, (0.0, 0.0), 3e-7, 0.066)
    d = z.to_dict()
    assert d["tts"] is None and d["n_rep"] is None and d["solutions_per_second_per_watt"] == 0.0


def test_tts_campaign_trivial_and_reproducible():
    k3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)], optimum=(2, "exact"), name="k3")
    rep = tts_campaign([k3], seeds=20, plan=UpdatePlan(1), sweeps=5)
    assert rep.instances[0].p_success == 1.0
    assert rep.median_tts == rep.instances[0].t_ann == annealing_time(3, 5, 1, 1e-9)
    gs = [generate_dense_random(12, 0.5, seed=s) for s in range(3)]
    gs = [g.with_optimum(exact_max_cut(g).best_cut) for g in gs]
    kw = dict(plan=UpdatePlan(2), noise=NoiseSchedule("quad_superlinear", 3.0), sweeps=20, resamples=300)
    a = tts_campaign(gs, 30, master_seed=4, **kw).to_dict()
    b = tts_campaign(gs, 30, master_seed=4, jobs=2, **kw).to_dict()
    assert a == b
    lo, hi = a["median_tts_interval"]
    assert lo <= a["median_tts"] <= hi
    assert a["median_tts"] == float(np.median([r["tts"] for r in a["instances"]]))
    with pytest.raises(ConfigError):
        tts_campaign([generate_dense_random(5, 0.5)], 2)


def test_sweep_and_compare_rows():
    g = generate_dense_random(14, 0.5, seed=2)
    opt = exact_max_cut(g).best_cut
    s = bench.noise_sweep(g, [0.0, 1.5], 20, 30, opt)
    rows = bench.noise_sweep_rows(s)
    assert [r["amplitude"] for r in rows] == [0.0, 1.5]
    for r in rows:
        assert r["min_cut"] <= r["mean_cut"] <= r["max_cut"] <= opt
    assert len(bench.noise_sweep(g, [2.0], 5, 10, opt)) == 1
    specs = [bench.ScheduleSpec("none"), bench.ScheduleSpec("q", NoiseSchedule("quad_superlinear", 5.0))]
    cmp_rows = bench.schedule_rows(bench.schedule_compare(g, specs, [10, 20], 15, opt), 300)
    assert [(r["schedule"], r["sweeps"]) for r in cmp_rows] == [("none", 10), ("q", 10), ("none", 20), ("q", 20)]
    for r in cmp_rows:
        assert r["ci_low"] <= r["mean_cut"] <= r["ci_high"]
