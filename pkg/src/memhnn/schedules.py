"""Noise-amplitude and threshold schedules over an annealing horizon.

Spec strings (CLI and config files)::

    none  fixed:1.5  lin:5  quad-super:5  quad-sub:5  exp:5[:k]  theta-ramp:2
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

NOISE_KINDS = ("none", "fixed", "linear", "quad_superlinear", "quad_sublinear", "exponential")
THRESHOLD_KINDS = ("zero", "linear_ramp")

_NOISE_TOKENS = {
    "none": "none",
    "fixed": "fixed",
    "lin": "linear",
    "quad-super": "quad_superlinear",
    "quad-sub": "quad_sublinear",
    "exp": "exponential",
}
_NOISE_NAMES = {v: k for k, v in _NOISE_TOKENS.items()}


def _check_horizon(t, T):
    if T < 0 or t < 0:
        raise ValueError(f"sweep index and horizon must be non-negative (t={t}, T={T})")
    if t > T:
        raise ValueError(f"sweep index {t} exceeds horizon {T}")


@dataclass(frozen=True)
class NoiseSchedule:
    kind: str = "none"
    amplitude: float = 0.0
    rate: float = 5.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise schedule kind {self.kind!r}")
        if self.amplitude < 0:
            raise ValueError("noise amplitude must be >= 0")
        if self.rate <= 0:
            raise ValueError("exponential rate must be > 0")

    @property
    def decaying(self) -> bool:
        return self.kind in ("linear", "quad_superlinear", "quad_sublinear", "exponential")

    def __call__(self, t, T) -> float:
        return amplitude(self, t, T)

    def values(self, T: int) -> np.ndarray:
        """Amplitudes for sweeps ``0 .. T-1``."""
        return np.array([amplitude(self, t, T) for t in range(T)], dtype=np.float64)

    def spec(self) -> str:
        if self.kind == "none":
            return "none"
        s = f"{_NOISE_NAMES[self.kind]}:{self.amplitude:g}"
        if self.kind == "exponential":
            s += f":{self.rate:g}"
        return s


@dataclass(frozen=True)
class ThresholdSchedule:
    kind: str = "zero"
    theta_max: float = 0.0

    def __post_init__(self):
        if self.kind not in THRESHOLD_KINDS:
            raise ValueError(f"unknown threshold schedule kind {self.kind!r}")
        if self.theta_max < 0:
            raise ValueError("theta_max must be >= 0")

    def __call__(self, t, T) -> float:
        return threshold_at(self, t, T)

    def values(self, T: int) -> np.ndarray:
        return np.array([threshold_at(self, t, T) for t in range(T)], dtype=np.float64)

    def spec(self) -> str:
        return "zero" if self.kind == "zero" else f"theta-ramp:{self.theta_max:g}"


def amplitude(s: NoiseSchedule, t, T) -> float:
    _check_horizon(t, T)
    if s.kind == "none":
        return 0.0
    if s.kind == "fixed":
        return float(s.amplitude)
    if T < 1:
        raise ValueError("decaying schedules need a horizon T >= 1")
    r = t / T
    a0 = s.amplitude
    if s.kind == "linear":
        return a0 * (1.0 - r)
    if s.kind == "quad_superlinear":
        return a0 * (1.0 - r) ** 2
    if s.kind == "quad_sublinear":
        return a0 * (1.0 - r * r)
    return a0 * math.exp(-s.rate * r)


def threshold_at(s: ThresholdSchedule, t, T) -> float:
    _check_horizon(t, T)
    if s.kind == "zero" or T == 0:
        return 0.0
    return s.theta_max * (t / T)


def sample_noise(A: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent draws, uniform on ``[-A, A)``.

    Consumes exactly ``count`` doubles from ``rng``; the annealing kernel
    relies on this to replay the same stream in bulk.
    """
    if A < 0:
        raise ValueError("noise amplitude must be >= 0")
    return A * (2.0 * rng.random(count) - 1.0)


def parse_noise(spec: str) -> NoiseSchedule:
    parts = spec.strip().split(":")
    token = parts[0]
    if token not in _NOISE_TOKENS:
        raise ValueError(f"unknown noise schedule {spec!r}")
    kind = _NOISE_TOKENS[token]
    try:
        args = [float(p) for p in parts[1:]]
    except ValueError:
        raise ValueError(f"non-numeric parameter in noise schedule {spec!r}")
    if kind == "none":
        if args:
            raise ValueError("'none' takes no parameters")
        return NoiseSchedule()
    if kind == "exponential":
        if len(args) not in (1, 2):
            raise ValueError("exponential schedule reads 'exp:A0[:k]'")
        return NoiseSchedule(kind, args[0], args[1] if len(args) == 2 else 5.0)
    if len(args) != 1:
        raise ValueError(f"schedule {token!r} takes exactly one amplitude")
    return NoiseSchedule(kind, args[0])


def parse_threshold(spec: str) -> ThresholdSchedule:
    parts = spec.strip().split(":")
    if parts[0] in ("zero", "none") and len(parts) == 1:
        return ThresholdSchedule()
    if parts[0] == "theta-ramp" and len(parts) == 2:
        try:
            return ThresholdSchedule("linear_ramp", float(parts[1]))
        except ValueError:
            pass
    raise ValueError(f"unknown threshold schedule {spec!r}")
