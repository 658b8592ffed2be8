"""Throughput algebra for a platform that cycles drones between refill and drop."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class PlatformConfig:
    """One ground platform and its drones.

    ``position`` is (row, col) in lattice coordinates and may sit outside the
    grid; only the CA engine reads it. Operating ranges seen in practice are
    10-50 L payload and 80-120 drones per platform, but neither is enforced.
    """

    n_d: int = 120
    L_d: float = 20.0  # L per drone
    delta_t: float = 6.0  # min per full cycle
    t_a: float = 15.0  # min after ignition
    position: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if int(self.n_d) != self.n_d or self.n_d < 1:
            raise ValueError(f"n_d must be an integer >= 1, got {self.n_d!r}")
        if not self.L_d > 0:
            raise ValueError(f"L_d must be > 0, got {self.L_d!r}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be > 0, got {self.delta_t!r}")
        if self.t_a < 0:
            raise ValueError(f"t_a must be >= 0, got {self.t_a!r}")


@dataclass(frozen=True)
class FlowReport:
    n_h: float  # discharges per drone-hour
    n_h_tot: float  # discharges per platform-hour
    L_h_tot: float  # L/h per platform
    DF: float  # L/min, all platforms together
    platforms: int
    m_f: Optional[float] = None  # m of front, when a CF was supplied


def drone_flow(cfg: PlatformConfig, platforms: int = 1) -> FlowReport:
    if platforms < 1:
        raise ValueError(f"platforms must be >= 1, got {platforms}")
    n_h = 60.0 / cfg.delta_t
    n_h_tot = n_h * cfg.n_d
    L_h_tot = cfg.L_d * n_h_tot
    # L_d * n_d / delta_t directly, rather than L_h_tot / 60, keeps 400 exact
    DF = platforms * cfg.L_d * cfg.n_d / cfg.delta_t
    return FlowReport(n_h=n_h, n_h_tot=n_h_tot, L_h_tot=L_h_tot, DF=DF, platforms=platforms)


def extinguishable_meters(cfg: PlatformConfig, platforms: int, CF: float) -> float:
    """Metres of active front the platforms can hold at critical flow ``CF`` (L/min/m)."""
    if not CF > 0:
        raise ValueError(f"CF must be > 0 to size a front, got {CF}")
    return drone_flow(cfg, platforms).DF / CF


def flow_report(cfg: PlatformConfig, platforms: int = 1, CF: Optional[float] = None) -> FlowReport:
    rep = drone_flow(cfg, platforms)
    if CF is None:
        return rep
    return FlowReport(**{**vars(rep), "m_f": extinguishable_meters(cfg, platforms, CF)})


def required_flow(m_r: float, CF: float) -> float:
    if m_r < 0 or CF < 0:
        raise ValueError("front length and CF must be non-negative")
    return m_r * CF


def required_drones(m_r: float, CF: float, L_d: float, delta_t: float) -> int:
    """Drones needed to hold ``m_r`` metres, rounded up.

    The continuous count is snapped to the nearest integer first when it is
    within a few ulps of one, so that exact round trips such as
    ``required_drones(extinguishable_meters(cfg, 1, CF), CF, ...) == n_d``
    do not overshoot on floating-point noise.
    """
    if m_r < 0 or CF < 0:
        raise ValueError("front length and CF must be non-negative")
    if not (L_d > 0 and delta_t > 0):
        raise ValueError("L_d and delta_t must be positive")
    n = CF * delta_t * m_r / L_d
    nearest = round(n)
    if abs(n - nearest) <= 1e-12 * n:
        return int(nearest)
    return math.ceil(n)
