"""Energy-service QoS quantities.

Covers the wireless transmission success rate, usage-regularity scoring via
approximate entropy, the provision-consistency discount, deliverable energy,
and connection-coordination losses. All functions are pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True, slots=True)
class TsrParams:
    """Link-budget parameters of the wireless transfer channel.

    Defaults assume a ~915 MHz link (0.33 m wavelength) with modest antenna
    gains; they are configuration assumptions, not measured values.
    """

    g_t: float = 1.5          # transmission gain
    g_r: float = 1.5          # reception gain
    l_p: float = 1.0          # polarization loss
    gamma: float = 0.8        # rectifier efficiency
    wavelength: float = 0.33  # meters; JSON key "lambda"
    beta: float = 0.5         # short-distance parameter, meters
    theta: float = 2.0        # path-loss coefficient

    def __post_init__(self) -> None:
        for name in ("g_t", "g_r", "l_p", "gamma", "wavelength", "theta"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive, got {v}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if self.gamma > 1.0:
            raise ValueError(f"gamma must be in (0, 1], got {self.gamma}")
        if self.theta < 1.0:
            raise ValueError(f"theta must be >= 1, got {self.theta}")

    @classmethod
    def from_dict(cls, record: dict) -> "TsrParams":
        """Build from a `tsr_params` JSON block; missing fields keep defaults."""
        kwargs = {}
        for key, value in record.items():
            name = "wavelength" if key == "lambda" else key
            if name not in cls.__dataclass_fields__:
                raise ValueError(f"tsr_params: unknown field '{key}'")
            kwargs[name] = float(value)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "g_t": self.g_t, "g_r": self.g_r, "l_p": self.l_p,
            "gamma": self.gamma, "lambda": self.wavelength,
            "beta": self.beta, "theta": self.theta,
        }


def tsr_raw(p: TsrParams, distance: float) -> float:
    """Unclamped transmitted-to-received energy ratio at `distance` meters.

    Strictly decreasing in distance. The short-distance parameter beta keeps
    the expression finite at zero range; distance + beta = 0 is a singularity.
    """
    if distance < 0:
        raise ValueError(f"distance must be >= 0, got {distance}")
    reach = distance + p.beta
    if reach == 0:
        raise ValueError("distance + beta must be positive (singularity at 0)")
    try:
        return (p.g_t * p.g_r * p.gamma / p.l_p) * (p.wavelength / (FOUR_PI * reach)) ** p.theta
    except OverflowError:
        return math.inf  # degenerate near-contact reach; clamped downstream


def compute_tsr(p: TsrParams, distance: float) -> float:
    """Transmission success rate in [0, 1]; warns when the raw ratio exceeds 1."""
    raw = tsr_raw(p, distance)
    if raw > 1.0:
        warnings.warn(
            f"raw transmission ratio {raw:.4g} exceeds 1 at distance {distance} m; "
            "check tsr_params", stacklevel=2)
        return 1.0
    return max(0.0, raw)


@dataclass(frozen=True, slots=True)
class UsageTrace:
    """Uniformly sampled state-of-charge history of a provider device."""

    samples: tuple[tuple[float, float], ...]  # (timestamp, soc mAh)

    def __post_init__(self) -> None:
        if len(self.samples) < 3:
            raise ValueError("usage trace needs at least 3 samples")
        times = [t for t, _ in self.samples]
        steps = [b - a for a, b in zip(times, times[1:])]
        if min(steps) <= 0:
            raise ValueError("timestamps must be strictly increasing")
        if not math.isclose(min(steps), max(steps), rel_tol=1e-9, abs_tol=1e-9):
            raise ValueError("timestamps must be uniformly spaced")

    def values(self) -> np.ndarray:
        return np.asarray([v for _, v in self.samples], dtype=float)


def approximate_entropy(trace: UsageTrace, m: int = 2, r: float = 0.2) -> float:
    """ApEn(m, r * std) of the trace's charge values; 0 for a constant trace.

    `r` is a fraction of the sample standard deviation, the conventional
    parameterization. Template self-matches are counted, so the statistic is
    always finite and non-negative values are clamped against rounding.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r}")
    x = trace.values()
    tol = r * float(np.std(x))
    if tol == 0.0:
        return 0.0  # perfectly regular by convention
    return max(0.0, _phi(x, m, tol) - _phi(x, m + 1, tol))


def _phi(x: np.ndarray, m: int, tol: float) -> float:
    n = len(x)
    if n - m + 1 <= 0:
        raise ValueError(f"trace too short for embedding length {m}")
    templates = np.lib.stride_tricks.sliding_window_view(x, m)
    # Chebyshev distances between all template pairs, self-matches included.
    dist = np.abs(templates[:, None, :] - templates[None, :, :]).max(axis=2)
    counts = (dist <= tol).sum(axis=1) / (n - m + 1)
    return float(np.mean(np.log(counts)))


def provision_consistency(kolent: float, eub: float) -> float:
    """Regularity discount on advertised capacity, clamped into [0, 1].

    A perfectly regular usage history (zero entropy) delivers the full
    usage-pattern factor; otherwise the factor is scaled by 1/entropy.
    """
    if kolent < 0:
        raise ValueError(f"kolent must be >= 0, got {kolent}")
    if kolent == 0.0:
        return eub
    return min(1.0, eub / kolent)


def deliverable_energy(ec: float, tsr: float, alpha: float) -> float:
    """Energy a consumer realistically receives from an advertised capacity."""
    if ec <= 0:
        raise ValueError(f"ec must be positive, got {ec}")
    return alpha * ec * tsr


@dataclass(frozen=True, slots=True)
class CoordinationCosts:
    """Per-connection data-exchange energy rates and volumes."""

    c_cloud: float  # mAh per KB to/from the edge
    f_cloud: float  # KB exchanged with the edge
    c_peer: float   # mAh per KB device-to-device
    f_peer: float   # KB exchanged device-to-device

    def __post_init__(self) -> None:
        for name in ("c_cloud", "f_cloud", "c_peer", "f_peer"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def coordination_loss(c: CoordinationCosts) -> float:
    """Energy spent establishing one transfer connection (consumer or provider side)."""
    return c.c_cloud * c.f_cloud + c.c_peer * c.f_peer
