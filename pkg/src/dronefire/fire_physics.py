"""Critical water application rate from a fire-point energy balance.

All functions are pure. Units follow the docstrings of each function; wind
arrives in km/h everywhere and is converted to m/s only where the flame-tilt
relation needs it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

BYRAM_COEFF = 259.833
BYRAM_EXP = 2.174
FLAME_TILT_COEFF = 1.22
CONV_ANGLE_DEG = 30.0
KMH_TO_MS = 1.0 / 3.6

PATH_FLAME_LENGTH = "flame-length"
PATH_RATE_OF_SPREAD = "rate-of-spread"


class ConfigurationError(ValueError):
    """Raised when a computation is requested with missing or conflicting inputs."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class FuelModel:
    """Thermophysical constants of the fuel bed (Mediterranean scrub by default).

    ``h_conv`` is stored in kW m^-2 K^-1 (20 W m^-2 K^-1) and ``sigma`` in
    kW m^-2 K^-4 so that every flux comes out in kW m^-2.
    """

    delta_H_c: float = 19500.0  # kJ/kg
    L_v: float = 1800.0  # kJ/kg
    h_conv: float = 0.020  # kW m^-2 K^-1
    c_p: float = 1.0  # kJ kg^-1 K^-1
    Y_O2: float = 0.233
    delta_H_R_O2: float = 13480.0  # kJ/kg
    phi: float = 0.3
    eta_water: float = 0.7
    L_v_water: float = 2640.0  # kJ/kg
    tau: float = 1.0
    r_c: float = 0.20
    epsilon: float = 0.6
    sigma: float = 5.67e-11  # kW m^-2 K^-4
    T_fuel: float = 693.0  # K
    T_g: float = 800.0  # K
    T_a: float = 293.0  # K
    W: float = 15.0  # t/ha
    g: float = 9.81  # m s^-2

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"FuelModel.{name} must be a positive finite number, got {value!r}")
        for name in ("Y_O2", "phi", "eta_water", "tau", "r_c", "epsilon"):
            if getattr(self, name) > 1:
                raise ValueError(f"FuelModel.{name} must lie in (0, 1], got {getattr(self, name)!r}")
        if not (self.T_g > self.T_fuel > self.T_a):
            raise ValueError("FuelModel temperatures must satisfy T_g > T_fuel > T_a")


@dataclass(frozen=True)
class FireEnvironment:
    U_wind: float = 10.0  # km/h at 2 m
    M_d: float = 18.0  # percent
    D_depth: float = 2.0  # m
    L_f_override: Optional[float] = None  # m

    def __post_init__(self):
        if self.U_wind < 0:
            raise ValueError(f"FireEnvironment.U_wind must be >= 0, got {self.U_wind}")
        if self.M_d < 0:
            raise ValueError(f"FireEnvironment.M_d must be >= 0, got {self.M_d}")
        if not self.D_depth > 0:
            raise ValueError(f"FireEnvironment.D_depth must be > 0, got {self.D_depth}")
        if self.L_f_override is not None and not self.L_f_override > 0:
            raise ValueError(f"FireEnvironment.L_f_override must be > 0, got {self.L_f_override}")


@dataclass(frozen=True)
class SpreadParams:
    """Shrubland rate-of-spread regression coefficients."""

    a: float = 3.258
    b: float = 0.958
    c: float = 0.111


@dataclass(frozen=True)
class CriticalFlowResult:
    cf_area: float  # kg m^-2 s^-1, clamped at zero
    cf_linear: float  # L min^-1 per metre of front
    cf_area_raw: float  # unclamped energy balance / (eta * L_v_water)
    m_cr: float
    I: float
    L_f: float
    RoS: Optional[float]
    A: float
    H_f: float
    D_depth: float
    q_E_rad: float
    q_E_conv: float
    q_L_rad: float
    q_L_conv: float
    path: str

    def as_dict(self) -> dict:
        return dict(vars(self))


def critical_mass_burning_rate(fuel: FuelModel) -> float:
    """Critical mass burning rate (kg m^-2 s^-1) from the Spalding B-number."""
    B = fuel.Y_O2 * fuel.delta_H_R_O2 / (fuel.phi * fuel.delta_H_c)
    return fuel.h_conv / fuel.c_p * math.log1p(B)


def _tilt_residual(A: float, k: float) -> float:
    # cot(A) * sqrt(sin A) - k, strictly decreasing on (0, pi/2]
    return math.cos(A) / math.sqrt(math.sin(A)) - k


def flame_angle(U: float, L_f: float, g: float = 9.81, max_iter: int = 200) -> tuple[float, float]:
    """Solve the flame-tilt system for (A in degrees, flame tip height in m).

    ``U`` is the wind speed in m/s. H_f = L_f sin A is substituted into the
    tilt relation, leaving a monotone scalar equation in A that is bisected
    down to adjacent floating-point values.
    """
    if U < 0:
        raise ValueError(f"wind speed must be >= 0, got {U}")
    if not L_f > 0:
        raise ValueError(f"flame length must be > 0, got {L_f}")
    if U == 0:
        return 90.0, L_f

    k = FLAME_TILT_COEFF * U / math.sqrt(g * L_f)
    lo, hi = 0.0, math.pi / 2  # residual(lo+) = +inf, residual(hi) = -k < 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _tilt_residual(mid, k) > 0:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceError(f"flame angle bisection did not converge for U={U}, L_f={L_f}")
    A = lo if abs(_tilt_residual(lo, k)) <= abs(_tilt_residual(hi, k)) else hi
    return math.degrees(A), L_f * math.sin(A)


def byram_intensity(L_f: float) -> float:
    """Fireline intensity (kW/m) from flame length (m)."""
    return BYRAM_COEFF * L_f**BYRAM_EXP


def flame_length_from_intensity(I: float) -> float:
    return (I / BYRAM_COEFF) ** (1.0 / BYRAM_EXP)


def rate_of_spread(U: float, M_d: float, p: SpreadParams = SpreadParams()) -> float:
    """Rate of spread in km/h; ``U`` in km/h at 2 m, ``M_d`` in percent."""
    if U < 0 or M_d < 0:
        raise ValueError("wind speed and moisture must be non-negative")
    return 0.06 * p.a * U**p.b * math.exp(-p.c * M_d)


def intensity_from_spread(fuel: FuelModel, RoS: float) -> float:
    """Fireline intensity (kW/m) from rate of spread in km/h.

    With W in t/ha (0.1 kg m^-2) and RoS in km/h (1/3.6 m/s) the unit
    factors collapse to 1/36.
    """
    return fuel.delta_H_c * fuel.W * RoS / 36.0


def external_heat_flux(fuel: FuelModel, I: float, L_f: float, D: float, A: float) -> tuple[float, float]:
    q_rad = fuel.r_c * I / (2.0 * L_f + D) * fuel.phi * fuel.tau
    q_conv = fuel.h_conv * (fuel.T_g - fuel.T_fuel) if A < CONV_ANGLE_DEG else 0.0
    return q_rad, q_conv


def surface_heat_loss(fuel: FuelModel) -> tuple[float, float]:
    q_rad = fuel.epsilon * fuel.sigma * (fuel.T_fuel**4 - fuel.T_a**4)
    q_conv = fuel.h_conv * (fuel.T_fuel - fuel.T_a)
    return q_rad, q_conv


def critical_flow(
    fuel: FuelModel = FuelModel(),
    env: FireEnvironment = FireEnvironment(),
    p: SpreadParams = SpreadParams(),
    path: str = PATH_RATE_OF_SPREAD,
    Ir: Optional[float] = None,
) -> CriticalFlowResult:
    """Critical water application rate with its full intermediate breakdown.

    On the flame-length path the intensity comes from Byram's relation and
    the combustion depth is I / Ir. On the rate-of-spread path wind and
    moisture set the spread rate, the intensity follows from fuel load and
    the flame length from the inverse Byram relation.
    """
    if path == PATH_FLAME_LENGTH:
        if env.L_f_override is None:
            raise ConfigurationError("flame-length path requires L_f_override")
        if Ir is None:
            raise ConfigurationError("flame-length path requires Ir")
        if not Ir > 0:
            raise ConfigurationError(f"Ir must be > 0, got {Ir}")
        L_f = env.L_f_override
        I = byram_intensity(L_f)
        D = I / Ir
        RoS = None
    elif path == PATH_RATE_OF_SPREAD:
        RoS = rate_of_spread(env.U_wind, env.M_d, p)
        I = intensity_from_spread(fuel, RoS)
        L_f = flame_length_from_intensity(I)
        D = env.D_depth
    else:
        raise ConfigurationError(f"unknown path {path!r}; expected {PATH_FLAME_LENGTH!r} or {PATH_RATE_OF_SPREAD!r}")

    if L_f > 0:
        A, H_f = flame_angle(env.U_wind * KMH_TO_MS, L_f, fuel.g)
    else:
        # no spread, no flame: vertical by convention
        A, H_f = 90.0, 0.0

    m_cr = critical_mass_burning_rate(fuel)
    q_E_rad, q_E_conv = external_heat_flux(fuel, I, L_f, D, A)
    q_L_rad, q_L_conv = surface_heat_loss(fuel)
    balance = (fuel.phi * fuel.delta_H_c - fuel.L_v) * m_cr + (q_E_rad + q_E_conv) - (q_L_rad + q_L_conv)
    raw = balance / (fuel.eta_water * fuel.L_v_water)
    cf_area = max(0.0, raw)
    return CriticalFlowResult(
        cf_area=cf_area,
        cf_linear=linear_flow(cf_area, D),
        cf_area_raw=raw,
        m_cr=m_cr,
        I=I,
        L_f=L_f,
        RoS=RoS,
        A=A,
        H_f=H_f,
        D_depth=D,
        q_E_rad=q_E_rad,
        q_E_conv=q_E_conv,
        q_L_rad=q_L_rad,
        q_L_conv=q_L_conv,
        path=path,
    )


def linear_flow(cf_area: float, D: float) -> float:
    """kg m^-2 s^-1 over a D x 1 m strip -> L min^-1 per metre of front."""
    return cf_area * D * 60.0
