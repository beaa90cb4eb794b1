"""Noise-injected Hopfield annealing for Max-Cut on simulated memristor crossbars."""
from .instances import (Graph, InstanceParseError, Optimum, cut_from_energy, cut_value,
                        energy_offset, generate_dense_random, graph_to_weights, hopfield_energy,
                        parse_instance, read_instance, write_instance)
from .schedules import NoiseSchedule, ThresholdSchedule, parse_noise, parse_threshold
from .hnn import AnnealTrace, HnnState, UpdatePlan, anneal_runs, run_anneal, sweep
from .crossbar import (BehavioralBackend, CrossbarConfig, IdealBackend, NodalBackend, RtnConfig,
                       error_sigma, map_weights, vmm_ideal, vmm_nodal)
from .oracle import exact_max_cut, reference_optimum, sa_baseline
from .bench import EnergyTable, TtsReport, n_repetitions, time_to_solution

__version__ = "0.1.0"

__all__ = [
    "Graph", "InstanceParseError", "Optimum", "cut_from_energy", "cut_value", "energy_offset",
    "generate_dense_random", "graph_to_weights", "hopfield_energy", "parse_instance", "read_instance",
    "write_instance", "NoiseSchedule", "ThresholdSchedule", "parse_noise", "parse_threshold",
    "AnnealTrace", "HnnState", "UpdatePlan", "anneal_runs", "run_anneal", "sweep",
    "BehavioralBackend", "CrossbarConfig", "IdealBackend", "NodalBackend", "RtnConfig", "error_sigma",
    "map_weights", "vmm_ideal", "vmm_nodal", "exact_max_cut", "reference_optimum", "sa_baseline",
    "EnergyTable", "TtsReport", "n_repetitions", "time_to_solution",
]
