"""Frequency trajectories for the tunable qubit.

Five control families shape the ramp of the tunable qubit's 0-1 splitting
``omega_a(t)`` between the parking point and a destination near the 11/20
resonance:

* ``linear``       -- flux linear in time (the hardware-trivial ramp)
* ``faquad``       -- fast quasiadiabatic: constant transition-rate budget
  along the path, computed from the coupled spectrum
* ``slepian``      -- bandwidth-limited cosine series in the pseudospin
  mixing angle ``theta = arctan(2 J_2 / delta)``
* ``invariant``    -- Ermakov-invariant inverse engineering of the harmonic
  width, polynomial scaling function
* ``variational``  -- Gaussian-ansatz Lagrangian dynamics, inverse engineered
  for the transmon's cosine potential

Every generated :class:`Pulse` carries three mutually consistent
representations (omega01, E_J, flux) sampled on a uniform grid, with
endpoints matching the requested ramp exactly.  Down-ramps are assembled
into full down-wait-up gate pulses by :func:`assemble_gate_pulse`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .hamiltonian import (
    DeviceSpec,
    TransmonSpec,
    EJ_to_flux,
    flux_to_EJ,
    frequency_map,
    resonance,
)

__all__ = [
    "RampSpec",
    "Pulse",
    "SlepianParams",
    "InvariantParams",
    "PulseDesignError",
    "DegenerateSpectrumError",
    "FAMILIES",
    "linear_ramp",
    "faquad_ramp",
    "slepian_ramp",
    "invariant_ramp",
    "variational_ramp",
    "make_ramp",
    "assemble_gate_pulse",
    "solve_invariant_coefficients",
    "faquad_schedule",
    "verify_consistency",
]

FAMILIES = ("linear", "faquad", "slepian", "invariant", "variational")

CONSISTENCY_TOL = 1e-9


class PulseDesignError(RuntimeError):
    """A control family could not realize the requested ramp."""


class DegenerateSpectrumError(PulseDesignError):
    """Near-degenerate pair in the tracked spectrum outside the crossing."""


@dataclass(frozen=True)
class RampSpec:
    """One-way ramp request: endpoints (rad/ns), duration (ns), samples."""

    omega_start: float
    omega_target: float
    T: float
    samples: int = 2048

    def __post_init__(self) -> None:
        if not self.T > 0:
            raise ValueError("ramp duration must be positive")
        if self.samples < 64:
            raise ValueError("at least 64 samples per ramp")


@dataclass(frozen=True, eq=False)
class Pulse:
    """Uniformly sampled control trajectory of the tunable qubit.

    The three representations are tied together by the exact charge-basis
    map omega01(E_J) and the SQUID flux map; ``meta`` records the family,
    its parameters and the transmon the pulse was designed for.
    """

    dt: float
    omega01: np.ndarray
    E_J: np.ndarray
    flux: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.omega01)
        if not (len(self.E_J) == n and len(self.flux) == n):
            raise ValueError("representation arrays must share one grid")

    @property
    def duration(self) -> float:
        return self.dt * (len(self.omega01) - 1)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.omega01))

    def to_csv(self, path) -> None:
        """Write columns t_ns, omega01_rad_per_ns, EJ_rad_per_ns, flux_phi0."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            if self.meta:
                fh.write(f"# {_meta_line(self.meta)}\n")
            writer.writerow(
                ["t_ns", "omega01_rad_per_ns", "EJ_rad_per_ns", "flux_phi0"]
            )
            for t, w, ej, phi in zip(
                self.times(), self.omega01, self.E_J, self.flux
            ):
                writer.writerow([f"{t:.9f}", f"{w:.12f}", f"{ej:.12f}", f"{phi:.12f}"])

    @classmethod
    def from_csv(cls, path) -> "Pulse":
        rows = []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#") or line.startswith("t_ns"):
                    continue
                rows.append([float(x) for x in line.strip().split(",")])
        data = np.array(rows)
        dt = data[1, 0] - data[0, 0]
        return cls(dt=dt, omega01=data[:, 1], E_J=data[:, 2], flux=data[:, 3])


def _meta_line(meta: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in sorted(meta.items()) if np.isscalar(v))


@dataclass(frozen=True)
class SlepianParams:
    """Cosine-series coefficients for the pseudospin angle ramp.

    The constraint ``theta_f = theta_i + sum_(n odd) 2 lambda_n`` is enforced
    at construction; with N coefficients that leaves N-1 free parameters.
    """

    lam: tuple
    theta_i: float
    theta_f: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", tuple(float(x) for x in self.lam))
        odd_sum = 2.0 * sum(self.lam[n] for n in range(0, len(self.lam), 2))
        if abs(self.theta_f - self.theta_i - odd_sum) > 1e-12:
            raise ValueError(
                "slepian constraint violated: theta_f != theta_i + sum_odd 2*lambda_n"
            )

    @classmethod
    def solve(
        cls, theta_i: float, theta_f: float, free: Sequence[float] = (0.0,)
    ) -> "SlepianParams":
        """Build params from the free coefficients (lambda_2, lambda_3, ...).

        ``lambda_1`` is solved from the endpoint constraint.
        """
        free = tuple(float(x) for x in free)
        odd_rest = 2.0 * sum(
            free[k] for k in range(len(free)) if (k + 2) % 2 == 1
        )
        lam1 = 0.5 * (theta_f - theta_i - odd_rest)
        return cls(lam=(lam1,) + free, theta_i=theta_i, theta_f=theta_f)


def solve_invariant_coefficients(
    n_max: int = 4, free: Optional[dict] = None
) -> np.ndarray:
    """Polynomial coefficients for the scaling-function ansatz.

    ``rho(x) = gamma + (1-gamma)(1-x) sum_n c_n x^n`` with the six boundary
    conditions rho(0)=1, rho(T)=gamma, and vanishing first and second
    derivatives at both ends.  The first three conditions force
    ``c_0 = c_1 = c_2 = 1``; the end conditions give the linear system
    ``sum c_n = 0`` and ``sum n c_n = 0`` solved for the last two
    coefficients.  For ``n_max > 4`` the middle coefficients are free
    parameters (default 0), e.g. ``free={3: 0.5}``.
    """
    if n_max < 4:
        raise ValueError("boundary conditions need n_max >= 4")
    c = np.zeros(n_max + 1)
    c[0] = c[1] = c[2] = 1.0
    free = dict(free or {})
    for n, value in free.items():
        if n < 3 or n > n_max - 2:
            raise ValueError(f"coefficient c_{n} is not free for n_max={n_max}")
        c[n] = value
    fixed = list(range(3, n_max - 1))
    s0 = c[0] + c[1] + c[2] + sum(c[n] for n in fixed)
    s1 = c[1] + 2 * c[2] + sum(n * c[n] for n in fixed)
    p, q = n_max - 1, n_max
    # c_p + c_q = -s0 ; p c_p + q c_q = -s1
    c[q] = (p * s0 - s1) / (q - p)
    c[p] = -s0 - c[q]
    return c


@dataclass(frozen=True)
class InvariantParams:
    """Scaling-function polynomial, target ratio gamma and order n_max."""

    c: tuple
    gamma: float
    n_max: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))
        if len(self.c) != self.n_max + 1:
            raise ValueError("need n_max + 1 coefficients")
        c = np.asarray(self.c)
        n = np.arange(len(c))
        checks = (
            abs(c[0] - 1.0),  # rho(0) = 1
            abs(c[1] - c[0]),  # drho/dt(0) = 0
            abs(c[2] - c[1]),  # d2rho/dt2(0) = 0
            abs(np.sum(c)),  # rho(T) = gamma with drho(T) = 0
            abs(np.sum(n * c)),  # d2rho/dt2(T) = 0
        )
        if max(checks) > 1e-10:
            raise ValueError("coefficients violate the scaling boundary conditions")

    @classmethod
    def for_ratio(cls, gamma: float, n_max: int = 4, free=None) -> "InvariantParams":
        c = solve_invariant_coefficients(n_max, free)
        return cls(c=tuple(c), gamma=gamma, n_max=n_max)


# ---------------------------------------------------------------------------
# scaling-function helpers


def _rho_and_derivatives(params: InvariantParams, x: np.ndarray):
    """rho, rho', rho'' in the scaled variable x = t/T (derivatives per x)."""
    c = np.asarray(params.c)
    gamma = params.gamma
    p = np.polynomial.polynomial.Polynomial(c)
    poly = (1.0 - x) * p(x)
    dpoly = -p(x) + (1.0 - x) * p.deriv(1)(x)
    d2poly = -2.0 * p.deriv(1)(x) + (1.0 - x) * p.deriv(2)(x)
    rho = gamma + (1.0 - gamma) * poly
    return rho, (1.0 - gamma) * dpoly, (1.0 - gamma) * d2poly


def _pulse_from_EJ(
    transmon: TransmonSpec,
    T: float,
    E_J: np.ndarray,
    meta: dict,
    *,
    omega_endpoints: Optional[tuple] = None,
) -> Pulse:
    """Assemble a Pulse from an E_J trajectory via the exact maps."""
    fmap = frequency_map(transmon)
    if np.any(E_J <= 0.0):
        raise PulseDesignError("designed E_J(t) is not positive everywhere")
    if np.any(E_J > transmon.E_J_max * (1 + 1e-12)):
        t_bad = float(np.argmax(E_J > transmon.E_J_max * (1 + 1e-12)))
        raise PulseDesignError(
            f"designed E_J(t) exceeds E_J_max near sample {int(t_bad)}"
        )
    E_J = np.minimum(E_J, transmon.E_J_max)
    omega01, _ = fmap.omega_alpha(E_J)
    if omega_endpoints is not None:
        w0, w1 = omega_endpoints
        if abs(omega01[0] - w0) > CONSISTENCY_TOL * abs(w0) or abs(
            omega01[-1] - w1
        ) > CONSISTENCY_TOL * abs(w1):
            raise PulseDesignError("pulse endpoints missed the ramp targets")
        omega01[0], omega01[-1] = w0, w1
    flux = EJ_to_flux(transmon, E_J)
    dt = T / (len(E_J) - 1)
    return Pulse(dt=dt, omega01=omega01, E_J=E_J, flux=flux, meta=meta)


def _base_meta(family: str, spec: RampSpec, transmon: TransmonSpec) -> dict:
    return {
        "family": family,
        "T_ns": spec.T,
        "omega_start": spec.omega_start,
        "omega_target": spec.omega_target,
        "E_C": transmon.E_C,
        "E_J_max": transmon.E_J_max,
        "charge_cutoff": transmon.charge_cutoff,
    }


def verify_consistency(pulse: Pulse, transmon: TransmonSpec) -> float:
    """Max relative cross-residual between the three representations."""
    fmap = frequency_map(transmon)
    w, _ = fmap.omega_alpha(pulse.E_J)
    r1 = np.max(np.abs(w - pulse.omega01) / np.abs(pulse.omega01))
    ej = flux_to_EJ(transmon, pulse.flux)
    r2 = np.max(np.abs(ej - pulse.E_J) / np.abs(pulse.E_J))
    return float(max(r1, r2))


# ---------------------------------------------------------------------------
# control families


def linear_ramp(spec: RampSpec, transmon: TransmonSpec) -> Pulse:
    """Flux linear in time between the endpoint fluxes."""
    fmap = frequency_map(transmon)
    EJ0 = fmap.ej(spec.omega_start)
    EJ1 = fmap.ej(spec.omega_target)
    phi0 = EJ_to_flux(transmon, EJ0)
    phi1 = EJ_to_flux(transmon, EJ1)
    flux = np.linspace(phi0, phi1, spec.samples)
    E_J = flux_to_EJ(transmon, flux)
    pulse = _pulse_from_EJ(
        transmon,
        spec.T,
        E_J,
        _base_meta("linear", spec, transmon),
        omega_endpoints=(spec.omega_start, spec.omega_target),
    )
    return pulse


@dataclass(frozen=True, eq=False)
class FaquadSchedule:
    """Monotone reparametrization produced by the quasiadiabatic rule.

    ``eps_grid`` spans the control range; ``time_fraction`` is the cumulative
    fraction of the total ramp time spent up to each grid value.  The profile
    is duration-independent: rescaling T only rescales physical time.
    """

    eps_grid: np.ndarray
    time_fraction: np.ndarray
    rate_constant: float  # adiabaticity parameter per unit total time

    def eps_of_time(self, t_frac: np.ndarray) -> np.ndarray:
        return np.interp(t_frac, self.time_fraction, self.eps_grid)


def faquad_schedule(
    eps_start: float,
    eps_end: float,
    spectrum_fn: Callable[[float], tuple],
    *,
    grid_points: int = 2001,
    tracked: Optional[Sequence[int]] = None,
    min_gap: float = 2.0 * math.pi * 1e-6,
) -> FaquadSchedule:
    """Build the quasiadiabatic schedule for a controlled Hamiltonian.

    ``spectrum_fn(eps)`` must return ``(energies, vectors, dH_deps)`` in a
    fixed basis.  The local transition-rate bound uses the Hellmann-Feynman
    couplings ``|<n| dH/deps |r>| / (E_r - E_n)^2`` maximized over distinct
    pairs of the tracked levels; equalizing it along the path gives the
    monotone time reparametrization (same profile for any total duration).
    """
    eps_grid = np.linspace(eps_start, eps_end, grid_points)
    g = np.empty(grid_points)
    for i, eps in enumerate(eps_grid):
        energies, vectors, dH = spectrum_fn(eps)
        k = len(energies) if tracked is None else len(tracked)
        idx = np.arange(k) if tracked is None else np.asarray(tracked)
        e = energies[idx]
        v = vectors[:, idx]
        couplings = v.conj().T @ dH @ v
        de = e[None, :] - e[:, None]
        off = ~np.eye(k, dtype=bool)
        if np.min(np.abs(de[off])) < min_gap:
            raise DegenerateSpectrumError(
                f"near-degenerate tracked pair at eps = {eps:.6f}; "
                "use a smaller sweep window"
            )
        ratios = np.abs(couplings[off]) / de[off] ** 2
        g[i] = np.max(ratios)
    # dt/deps proportional to g; cumulative trapezoid, then normalize
    deps = np.diff(eps_grid)
    seg = 0.5 * (g[:-1] + g[1:]) * np.abs(deps)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0:
        raise PulseDesignError("degenerate quasiadiabatic schedule")
    return FaquadSchedule(
        eps_grid=eps_grid, time_fraction=cum / total, rate_constant=total
    )


@lru_cache(maxsize=8)
def _device_faquad_schedule(
    device: DeviceSpec, eps_start: float, eps_end: float, grid_points: int
) -> FaquadSchedule:
    # local import: propagation owns the truncated joint frame
    from .propagation import joint_frame

    frame = joint_frame(device)
    fmap = frequency_map(device.tunable)

    def spectrum_fn(eps: float):
        EJ = fmap.ej(eps)
        dEJ_deps = 1.0 / fmap.domega_dEJ(EJ)[0]
        H = frame.hamiltonian(EJ)
        w, v = np.linalg.eigh(H)
        return w, v, frame.coupling * dEJ_deps

    return faquad_schedule(
        eps_start,
        eps_end,
        spectrum_fn,
        grid_points=grid_points,
        tracked=range(6),
    )


def faquad_ramp(
    spec: RampSpec, device: DeviceSpec, *, grid_points: int = 2001
) -> Pulse:
    """Quasiadiabatic ramp tracking the six lowest coupled levels.

    The schedule equalizes the worst pairwise transition-rate estimate along
    the path and is cached per device: the shape is duration-independent, so
    one schedule serves every T and nearby destinations.
    """
    star, _ = resonance(device)
    lo = min(spec.omega_target, star - 2.0 * math.pi * 0.020)
    schedule = _schedule_for(device, spec.omega_start, lo, grid_points)
    # restrict the cached schedule to [omega_target, omega_start]
    t_of_eps = schedule.time_fraction
    f_target = np.interp(spec.omega_target, schedule.eps_grid[::-1], t_of_eps[::-1])
    f_start = 0.0
    t_frac = np.linspace(f_start, f_target, spec.samples)
    omega = schedule.eps_of_time(t_frac)
    omega[0], omega[-1] = spec.omega_start, spec.omega_target
    fmap = frequency_map(device.tunable)
    E_J = fmap.ej(omega)
    meta = _base_meta("faquad", spec, device.tunable)
    meta["rate_constant"] = schedule.rate_constant * f_target / spec.T
    return _pulse_from_EJ(
        device.tunable,
        spec.T,
        E_J,
        meta,
        omega_endpoints=(spec.omega_start, spec.omega_target),
    )


def _schedule_for(device, omega_start, omega_low, grid_points) -> FaquadSchedule:
    # cache on a slightly widened window so detuned destinations reuse it
    return _device_faquad_schedule(
        device, float(omega_start), float(omega_low), int(grid_points)
    )


def slepian_ramp(
    spec: RampSpec, device: DeviceSpec, params: Optional[SlepianParams] = None
) -> Pulse:
    """Bandwidth-limited cosine-series ramp of the pseudospin angle.

    ``theta(s)`` runs from ``theta_i = arctan(2 J_2 / delta_start)`` to
    ``theta_f`` at the crossing side; physical time follows from
    ``t = integral sin(theta) ds`` rescaled so the ramp takes exactly T, and
    the control is recovered through ``delta = 2 J_2 / tan(theta)``.
    """
    star, gap = resonance(device)
    two_J2 = gap
    delta_i = spec.omega_start - star
    delta_f = spec.omega_target - star
    theta_i = math.atan2(two_J2, delta_i)
    theta_f = math.atan2(two_J2, delta_f)
    if params is None:
        params = SlepianParams.solve(theta_i, theta_f, free=(0.0,))
    else:
        if abs(params.theta_i - theta_i) > 1e-9 or abs(params.theta_f - theta_f) > 1e-9:
            raise PulseDesignError(
                "slepian params were built for different endpoint angles"
            )
    # dense proper-time grid over the half ramp; with s normalized to [0, 1]
    # the series argument 2*pi*n*s/(2T) becomes pi*n*s
    n_dense = 8 * spec.samples
    s = np.linspace(0.0, 1.0, n_dense)
    lam = np.asarray(params.lam)
    orders = np.arange(1, len(lam) + 1)
    theta = theta_i + np.sum(
        lam[:, None] * (1.0 - np.cos(np.pi * orders[:, None] * s[None, :])), axis=0
    )
    if np.any(theta <= 0.0) or np.any(theta >= math.pi):
        raise PulseDesignError("pseudospin angle left (0, pi)")
    # physical time: t(s) = int sin(theta) ds, rescaled to land at T
    sin_theta = np.sin(theta)
    t_unscaled = np.concatenate(
        [[0.0], np.cumsum(0.5 * (sin_theta[1:] + sin_theta[:-1]) * np.diff(s))]
    )
    t_phys = t_unscaled * (spec.T / t_unscaled[-1])
    t_grid = np.linspace(0.0, spec.T, spec.samples)
    theta_t = np.interp(t_grid, t_phys, theta)
    delta = two_J2 / np.tan(theta_t)
    omega = star + delta
    omega[0], omega[-1] = spec.omega_start, spec.omega_target
    fmap = frequency_map(device.tunable)
    if np.any(omega > fmap.omega_max + 1e-9) or np.any(omega < fmap.omega_min):
        raise PulseDesignError("slepian control left the attainable band")
    E_J = fmap.ej(np.minimum(omega, fmap.omega_max))
    meta = _base_meta("slepian", spec, device.tunable)
    meta["lambda"] = tuple(params.lam)
    meta["theta_i"], meta["theta_f"] = theta_i, theta_f
    return _pulse_from_EJ(
        device.tunable,
        spec.T,
        E_J,
        meta,
        omega_endpoints=(spec.omega_start, spec.omega_target),
    )


def invariant_ramp(
    spec: RampSpec,
    transmon: TransmonSpec,
    params: Optional[InvariantParams] = None,
) -> Pulse:
    """Ermakov-invariant engineered ramp of the oscillator frequency.

    The scaling function rho interpolates between the stationary widths,
    ``gamma = sqrt(omega_start / omega_target)`` (the Ermakov equilibrium
    ``rho^4 omega^2 = omega(0)^2``), and the control follows from
    ``omega^2 = omega(0)^2 / rho^4 - rho'' / rho``.  Each omega sample maps
    to E_J through the exact charge-basis calibration.
    """
    gamma = math.sqrt(spec.omega_start / spec.omega_target)
    if params is None:
        params = InvariantParams.for_ratio(gamma)
    elif abs(params.gamma - gamma) > 1e-12:
        raise PulseDesignError("invariant params built for a different ratio")
    x = np.linspace(0.0, 1.0, spec.samples)
    rho, _, d2rho = _rho_and_derivatives(params, x)
    d2rho_t = d2rho / spec.T**2
    omega_sq = spec.omega_start**2 / rho**4 - d2rho_t / rho
    if np.any(omega_sq <= 0.0):
        i = int(np.argmax(omega_sq <= 0.0))
        raise PulseDesignError(
            f"ramp too fast: omega^2 < 0 at t = {i * spec.T / (spec.samples - 1):.3f} ns"
        )
    omega = np.sqrt(omega_sq)
    fmap = frequency_map(transmon)
    if np.any(omega > fmap.omega_max + 1e-9):
        raise PulseDesignError("invariant control exceeds the sweet-spot frequency")
    E_J = fmap.ej(np.minimum(omega, fmap.omega_max))
    meta = _base_meta("invariant", spec, transmon)
    meta["gamma"] = gamma
    meta["n_max"] = params.n_max
    return _pulse_from_EJ(
        transmon,
        spec.T,
        E_J,
        meta,
        omega_endpoints=(spec.omega_start, spec.omega_target),
    )


def _stationary_width(transmon: TransmonSpec, E_J: float) -> float:
    """Solve sigma^4 = (8 E_C / E_J) exp(sigma^2 / 4) for the Gaussian width.

    This transcendental equilibrium makes the variational control return the
    calibrated Josephson energies exactly at both endpoints.
    """
    ratio = 8.0 * transmon.E_C / E_J
    sigma_sq = math.sqrt(ratio)
    for _ in range(60):
        new = math.sqrt(ratio) * math.exp(sigma_sq / 8.0)
        if abs(new - sigma_sq) < 1e-15:
            sigma_sq = new
            break
        sigma_sq = new
    return math.sqrt(sigma_sq)


def variational_ramp(spec: RampSpec, transmon: TransmonSpec) -> Pulse:
    """Gaussian-ansatz ramp preserving the vacuum of the cosine potential.

    The width follows the same polynomial scaling as the invariant design,
    between the stationary widths at the calibrated endpoint Josephson
    energies; the control solves the width equation of motion for E_J(t):
    ``E_J = exp(sigma^2/4) [ 8 E_C / sigma^4 - sigma'' / (8 E_C sigma) ]``.
    """
    fmap = frequency_map(transmon)
    EJ0 = fmap.ej(spec.omega_start)
    EJ1 = fmap.ej(spec.omega_target)
    sigma0 = _stationary_width(transmon, EJ0)
    sigma1 = _stationary_width(transmon, EJ1)
    gamma_sigma = sigma1 / sigma0
    params = InvariantParams.for_ratio(gamma_sigma)
    x = np.linspace(0.0, 1.0, spec.samples)
    rho, _, d2rho = _rho_and_derivatives(params, x)
    sigma = sigma0 * rho
    d2sigma = sigma0 * d2rho / spec.T**2
    ec8 = 8.0 * transmon.E_C
    E_J = np.exp(sigma**2 / 4.0) * (ec8 / sigma**4 - d2sigma / (ec8 * sigma))
    meta = _base_meta("variational", spec, transmon)
    meta["sigma0"], meta["sigma1"] = sigma0, sigma1
    meta["gamma_sigma"] = gamma_sigma
    pulse = _pulse_from_EJ(transmon, spec.T, E_J, meta)
    # endpoints are exact by the stationary-width construction; snap omega
    w = pulse.omega01.copy()
    if (
        abs(w[0] - spec.omega_start) > CONSISTENCY_TOL * spec.omega_start
        or abs(w[-1] - spec.omega_target) > CONSISTENCY_TOL * spec.omega_target
    ):
        raise PulseDesignError("variational endpoints missed the ramp targets")
    w[0], w[-1] = spec.omega_start, spec.omega_target
    return Pulse(dt=pulse.dt, omega01=w, E_J=pulse.E_J, flux=pulse.flux, meta=meta)


def make_ramp(
    family: str,
    spec: RampSpec,
    device: DeviceSpec,
    *,
    slepian_free: Sequence[float] = (0.0,),
    invariant_params: Optional[InvariantParams] = None,
) -> Pulse:
    """Dispatch a down-ramp for any family on the calibrated device."""
    if family == "linear":
        return linear_ramp(spec, device.tunable)
    if family == "faquad":
        return faquad_ramp(spec, device)
    if family == "slepian":
        star, gap = resonance(device)
        theta_i = math.atan2(gap, spec.omega_start - star)
        theta_f = math.atan2(gap, spec.omega_target - star)
        params = SlepianParams.solve(theta_i, theta_f, free=tuple(slepian_free))
        return slepian_ramp(spec, device, params)
    if family == "invariant":
        return invariant_ramp(spec, device.tunable, invariant_params)
    if family == "variational":
        return variational_ramp(spec, device.tunable)
    raise ValueError(f"unknown control family '{family}'")


def assemble_gate_pulse(
    down: Pulse, t_wait: float, up_mirror: bool = True
) -> Pulse:
    """Concatenate down-ramp, constant hold and the time-reversed up-ramp.

    The result is resampled on one uniform grid of the same step as the
    down-ramp (values interpolated linearly, which the band-limited designs
    justify); with ``up_mirror`` False the pulse ends after the hold.
    """
    if t_wait < 0:
        raise ValueError("t_wait must be non-negative")
    T = down.duration
    total = 2 * T + t_wait if up_mirror else T + t_wait
    n = int(round(total / down.dt)) + 1
    t = np.linspace(0.0, total, n)
    t_down = down.times()

    def sample(series: np.ndarray) -> np.ndarray:
        out = np.empty_like(t)
        in_down = t <= T
        out[in_down] = np.interp(t[in_down], t_down, series)
        hold_end = T + t_wait
        in_hold = (t > T) & (t < hold_end)
        out[in_hold] = series[-1]
        if up_mirror:
            in_up = t >= hold_end
            out[in_up] = np.interp(total - t[in_up], t_down, series)
        return out

    meta = dict(down.meta)
    meta.update({"t_wait_ns": t_wait, "assembled": True, "T_ns": T})
    return Pulse(
        dt=t[1] - t[0],
        omega01=sample(down.omega01),
        E_J=sample(down.E_J),
        flux=sample(down.flux),
        meta=meta,
    )
