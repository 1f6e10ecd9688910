"""Reduced-order electrochemical voltage model.

Terminal voltage is assembled from open-circuit potentials at the electrode
surface stoichiometries, linearized charge-transfer overpotentials, a
first-order electrolyte potential drop, an ohmic drop, and a contact
resistance:

    V = U_p(x_p) - U_n(x_n) - (eta_p - eta_n) + phi_e + phi_ohm - I*R_c

Solid-phase surface concentration per electrode follows a rational
(Pade-reduced) approximation of spherical diffusion, split into a bulk
branch G_b with an exact integrator and a diffusion branch G_d:

    G_b(s) = ((2/7)(R/D) s + 3/R) / ((1/35)(R^2/D) s^2 + s)
           = (3/R)/s + (R/(5D)) / (tau s + 1),      tau = R^2/(35 D)
    G_d(s) = (R/(5D)) / (tau s + 1)

so G_b + G_d = (3/R)/s + 2*(R/(5D))/(tau s + 1): one integrator plus a
doubled first-order lag.  The electrolyte potential is two first-order lags
scaled by C1/D_e.

Discretization: lags use the exact zero-order-hold map (pole e^(-dt/tau),
input taken as the previous sample), the integrator uses the trapezoidal
rule, so DC behavior is preserved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import (
    ConcentrationOutOfRange,
    NonPositiveStep,
    SimulationDiverged,
    StepTooCoarse,
)
from .ocv import OcvCurve
from .params import CellParameters
from .profiles import CurrentProfile, VoltageSeries

# electrolyte transfer-function constants
ELEC_GAIN_POS = 0.124   # multiplies gamma_p
ELEC_GAIN_NEG = 0.117   # multiplies gamma_n
ELEC_TAU_POS = 0.1052   # multiplies L_cell^2 / D_e
ELEC_TAU_NEG = 0.0997   # multiplies L_cell^2 / D_e


@dataclass(frozen=True)
class FirstOrderLag:
    """K/(tau s + 1), discretized exactly under a zero-order hold."""

    gain: float   # DC gain K
    tau: float    # time constant [s]

    def pole(self, dt: float) -> float:
        if not dt > 0.0:
            raise NonPositiveStep(f"dt must be positive, got {dt}")
        return math.exp(-dt / self.tau)

    def step(self, y_prev: float, u_prev: float, dt: float) -> float:
        """One update y[k] = a*y[k-1] + K*(1-a)*u[k-1]."""
        a = self.pole(dt)
        return a * y_prev + self.gain * (1.0 - a) * u_prev

    def response(self, u: np.ndarray, dt: float, y0: float = 0.0) -> np.ndarray:
        """Full output series; y[0] = y0, input enters with one-sample delay."""
        a = self.pole(dt)
        b = [0.0, self.gain * (1.0 - a)]
        # transposed direct form II: with b0 = 0, zi = [y0] makes y[0] = y0
        y, _ = lfilter(b, [1.0, -a], np.asarray(u, dtype=float), zi=[y0])
        return y


@dataclass(frozen=True)
class TrapezoidIntegrator:
    """Running integral q[k] = q[k-1] + dt/2*(u[k-1] + u[k]); discrete pole at 1."""

    def step(self, q_prev: float, u_prev: float, u_now: float, dt: float) -> float:
        if not dt > 0.0:
            raise NonPositiveStep(f"dt must be positive, got {dt}")
        return q_prev + 0.5 * dt * (u_prev + u_now)

    def response(self, u: np.ndarray, dt: float, q0: float = 0.0) -> np.ndarray:
        if not dt > 0.0:
            raise NonPositiveStep(f"dt must be positive, got {dt}")
        u = np.asarray(u, dtype=float)
        q = np.empty_like(u)
        q[0] = q0
        if u.size > 1:
            q[1:] = q0 + np.cumsum(0.5 * dt * (u[:-1] + u[1:]))
        return q


def solid_time_constant(params: CellParameters, electrode: str) -> float:
    """R_i^2 / (35 D_i)."""
    if electrode == "p":
        return params.R_p ** 2 / (35.0 * params.D_p)
    if electrode == "n":
        return params.R_n ** 2 / (35.0 * params.D_n)
    raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")


def electrolyte_time_constants(params: CellParameters) -> tuple[float, float]:
    """(tau_pos, tau_neg) of the electrolyte branches."""
    base = params.L_cell ** 2 / params.D_e
    return ELEC_TAU_POS * base, ELEC_TAU_NEG * base


def min_time_constant(params: CellParameters) -> float:
    tau_pos, tau_neg = electrolyte_time_constants(params)
    return min(
        solid_time_constant(params, "p"),
        solid_time_constant(params, "n"),
        tau_pos,
        tau_neg,
    )


def c1_coefficient(params: CellParameters) -> float:
    """Electrolyte-potential coefficient C1 (evaluated once per parameter set).

    The bracketed concentration factor reduces to 1.343 at
    c_e0 = 1000 mol/m^3 and T0 = T_ref.  T0 multiplies the thermal prefactor.
    """
    p = params
    ce = p.c_e0 / 1000.0
    bracket = (
        0.601
        - 0.24 * math.sqrt(ce)
        + 0.982 * (1.0 - 0.0052 * (p.T0 - p.T_ref) * ce ** 1.5)
    )
    return (
        2.0 * p.R_gas * p.T0
        * (-p.L_cell / (p.A_s * p.F ** 2 * p.c_e0))
        * (1.0 - p.t_plus) * (1.0 + p.beta)
        * bracket
    )


def concentration_scale(params: CellParameters, electrode: str) -> float:
    """Current-to-concentration factor -R_i/(3 F eps_am_i L_i A)."""
    p = params
    if electrode == "p":
        return -p.R_p / (3.0 * p.F * p.eps_am_p * p.L_p * p.A)
    if electrode == "n":
        return -p.R_n / (3.0 * p.F * p.eps_am_n * p.L_n * p.A)
    raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")


@dataclass
class DiscreteCellModel:
    """Discretized dynamic blocks of one cell at a fixed step.

    Blocks are pure value objects; the per-electrode surface-concentration
    state is (integrator charge, lag output) and is advanced functionally,
    so one built model may be reused across simulations.
    """

    params: CellParameters
    ocv_p: OcvCurve
    ocv_n: OcvCurve
    dt: float
    lag_solid_p: FirstOrderLag = field(init=False)
    lag_solid_n: FirstOrderLag = field(init=False)
    lag_elec_pos: FirstOrderLag = field(init=False)
    lag_elec_neg: FirstOrderLag = field(init=False)
    integrator: TrapezoidIntegrator = field(init=False)
    c1: float = field(init=False)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise NonPositiveStep(f"dt must be positive, got {self.dt}")
        tau_min = min_time_constant(self.params)
        if self.dt > tau_min / 10.0:
            raise StepTooCoarse(
                f"dt = {self.dt:g} s exceeds one tenth of the fastest time "
                f"constant ({tau_min:g} s); discretization would be inaccurate"
            )
        p = self.params
        tau_pos, tau_neg = electrolyte_time_constants(p)
        self.lag_solid_p = FirstOrderLag(gain=p.R_p / (5.0 * p.D_p),
                                         tau=solid_time_constant(p, "p"))
        self.lag_solid_n = FirstOrderLag(gain=p.R_n / (5.0 * p.D_n),
                                         tau=solid_time_constant(p, "n"))
        self.lag_elec_pos = FirstOrderLag(gain=ELEC_GAIN_POS * p.gamma_p, tau=tau_pos)
        self.lag_elec_neg = FirstOrderLag(gain=ELEC_GAIN_NEG * p.gamma_n, tau=tau_neg)
        self.integrator = TrapezoidIntegrator()
        self.c1 = c1_coefficient(p)

    def lag_blocks(self) -> dict[str, FirstOrderLag]:
        return {
            "solid_p": self.lag_solid_p,
            "solid_n": self.lag_solid_n,
            "elec_pos": self.lag_elec_pos,
            "elec_neg": self.lag_elec_neg,
        }


def build_model(params: CellParameters, ocv_p: OcvCurve, ocv_n: OcvCurve,
                dt: float) -> DiscreteCellModel:
    """Validate the step against the fastest time constant and assemble blocks."""
    return DiscreteCellModel(params=params, ocv_p=ocv_p, ocv_n=ocv_n, dt=dt)


def surface_concentration(model: DiscreteCellModel, electrode: str,
                          current: np.ndarray) -> np.ndarray:
    """c_i(t) = c_i0 + (integrator + doubled lag applied to I) * scale_i.

    Raises ConcentrationOutOfRange at the first sample leaving (0, c_max_i).
    """
    p = model.params
    current = np.asarray(current, dtype=float)
    if electrode == "p":
        c0, c_max, R, lag = p.c_p0, p.c_max_p, p.R_p, model.lag_solid_p
    elif electrode == "n":
        c0, c_max, R, lag = p.c_n0, p.c_max_n, p.R_n, model.lag_solid_n
    else:
        raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")

    q = model.integrator.response(current, model.dt)
    # G_b's lag term and G_d share gain R/(5D) and tau: compute once, double
    y = lag.response(current, model.dt)
    c = c0 + concentration_scale(p, electrode) * ((3.0 / R) * q + 2.0 * y)

    bad = np.flatnonzero((c <= 0.0) | (c >= c_max))
    if bad.size:
        k = int(bad[0])
        raise ConcentrationOutOfRange(
            f"electrode {electrode} surface concentration {c[k]:g} mol/m^3 "
            f"left (0, {c_max:g}) at sample {k}",
            electrode=electrode, index=k,
        )
    return c


def bulk_concentration(params: CellParameters, electrode: str,
                       profile: CurrentProfile) -> np.ndarray:
    """Integrator-only (volume-averaged) concentration: c0 - q/(F eps L A)."""
    p = params
    if electrode == "p":
        c0, denom = p.c_p0, p.F * p.eps_am_p * p.L_p * p.A
    elif electrode == "n":
        c0, denom = p.c_n0, p.F * p.eps_am_n * p.L_n * p.A
    else:
        raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")
    q = TrapezoidIntegrator().response(profile.current, profile.dt)
    return c0 - q / denom


def bulk_stoichiometry(params: CellParameters, electrode: str,
                       profile: CurrentProfile) -> np.ndarray:
    c_max = params.c_max_p if electrode == "p" else params.c_max_n
    return bulk_concentration(params, electrode, profile) / c_max


def exchange_current_density(params: CellParameters, electrode: str,
                             c_surf, T: float | None = None):
    """i0 = Arrhenius(T) * F * k_i * sqrt(c (c_max - c) c_e); scalar or array."""
    p = params
    if T is None:
        T = p.T
    if electrode == "p":
        k, c_max, c_e, E_io = p.k_p, p.c_max_p, p.c_e_p, p.E_io_p
    elif electrode == "n":
        k, c_max, c_e, E_io = p.k_n, p.c_max_n, p.c_e_n, p.E_io_n
    else:
        raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")

    c = np.asarray(c_surf, dtype=float)
    arg = c * (c_max - c) * c_e
    bad = np.flatnonzero(np.atleast_1d(arg) <= 0.0)
    if bad.size:
        k_bad = int(bad[0])
        raise ConcentrationOutOfRange(
            f"electrode {electrode} exchange-current argument is non-positive "
            f"at sample {k_bad} (c = {np.atleast_1d(c)[k_bad]:g} mol/m^3)",
            electrode=electrode, index=k_bad,
        )
    arrhenius = math.exp((1.0 / p.T_ref - 1.0 / T) * E_io / p.R_gas)
    i0 = arrhenius * p.F * k * np.sqrt(arg)
    return float(i0) if np.isscalar(c_surf) else i0


def kinetic_overpotential(params: CellParameters, electrode: str, current, i0):
    """eta_i = R T0 (-J_i I)/(F i0): linear in I at fixed exchange current."""
    p = params
    J = p.J_p if electrode == "p" else p.J_n
    if electrode not in ("p", "n"):
        raise ValueError(f"electrode must be 'p' or 'n', got {electrode!r}")
    if np.any(np.asarray(i0) == 0.0):
        raise ZeroDivisionError("exchange current density is zero")
    return p.R_gas * p.T0 * (-J * np.asarray(current, dtype=float)) / (p.F * i0)


def electrolyte_potential(model: DiscreteCellModel, current: np.ndarray) -> np.ndarray:
    """phi_e(t): sum of the two discretized electrolyte lags, scaled by C1/D_e."""
    current = np.asarray(current, dtype=float)
    y = (model.lag_elec_pos.response(current, model.dt)
         + model.lag_elec_neg.response(current, model.dt))
    return (model.c1 / model.params.D_e) * y


def ohmic_drop(params: CellParameters, current):
    """phi_ohm = -I L_cell/(kappa A)."""
    return -np.asarray(current, dtype=float) * params.L_cell / (params.kappa * params.A)


@dataclass(frozen=True)
class SimulationResult:
    """Full per-sample breakdown of one simulation."""

    dt: float
    current: np.ndarray
    volts: np.ndarray
    c_p: np.ndarray       # cathode surface concentration [mol/m^3]
    c_n: np.ndarray       # anode surface concentration [mol/m^3]
    eta_p: np.ndarray     # cathode kinetic overpotential [V]
    eta_n: np.ndarray     # anode kinetic overpotential [V]
    phi_e: np.ndarray     # electrolyte potential drop [V]
    phi_ohm: np.ndarray   # ohmic drop [V]

    @property
    def voltage_series(self) -> VoltageSeries:
        return VoltageSeries(dt=self.dt, volts=self.volts)


def simulate_detailed(params: CellParameters, ocv_p: OcvCurve, ocv_n: OcvCurve,
                      profile: CurrentProfile,
                      freeze_exchange_current: bool = False) -> SimulationResult:
    """Run the model over a profile, returning every voltage contribution.

    ``freeze_exchange_current`` pins i0 at the initial concentrations, which
    makes every dynamic term exactly linear in the applied current (used by
    superposition checks); the default recomputes i0 from the instantaneous
    surface concentrations.
    """
    model = build_model(params, ocv_p, ocv_n, profile.dt)
    I = profile.current
    p = params
    try:
        c_p = surface_concentration(model, "p", I)
        c_n = surface_concentration(model, "n", I)
        if freeze_exchange_current:
            i0_p = exchange_current_density(p, "p", p.c_p0)
            i0_n = exchange_current_density(p, "n", p.c_n0)
        else:
            i0_p = exchange_current_density(p, "p", c_p)
            i0_n = exchange_current_density(p, "n", c_n)
        u_p = ocv_p(c_p / p.c_max_p)
        u_n = ocv_n(c_n / p.c_max_n)
    except ConcentrationOutOfRange as exc:
        raise SimulationDiverged(str(exc), index=exc.index) from exc

    eta_p = kinetic_overpotential(p, "p", I, i0_p)
    eta_n = kinetic_overpotential(p, "n", I, i0_n)
    phi_e = electrolyte_potential(model, I)
    phi_ohm = ohmic_drop(p, I)

    volts = u_p - u_n - (eta_p - eta_n) + phi_e + phi_ohm - I * p.R_c
    if not np.all(np.isfinite(volts)):
        k = int(np.flatnonzero(~np.isfinite(volts))[0])
        raise SimulationDiverged(f"non-finite terminal voltage at sample {k}", index=k)

    return SimulationResult(dt=profile.dt, current=I, volts=volts,
                            c_p=c_p, c_n=c_n, eta_p=np.asarray(eta_p),
                            eta_n=np.asarray(eta_n), phi_e=phi_e, phi_ohm=phi_ohm)


def simulate(params: CellParameters, ocv_p: OcvCurve, ocv_n: OcvCurve,
             profile: CurrentProfile,
             freeze_exchange_current: bool = False) -> VoltageSeries:
    """Terminal-voltage series for a current profile (discharge positive)."""
    return simulate_detailed(params, ocv_p, ocv_n, profile,
                             freeze_exchange_current=freeze_exchange_current).voltage_series
