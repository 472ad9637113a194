"""Single- and two-transmon Hamiltonians in the charge basis.

A transmon is modelled as ``H = 4 E_C n^2 - E_J cos(phi)`` on the charge
states ``|m>``, ``m = -m_max .. m_max``, where it is tridiagonal: diagonal
``4 E_C m^2`` and ``-E_J/2`` on the first super/sub-diagonals.  Two
capacitively coupled transmons add ``(g_C/2) (n_a - n_b)^2``, which is
diagonal in the product charge basis.

Everything downstream (pulse design, propagation, gate metrics) consumes the
exact spectra computed here.  Circuit parameters are never taken from the
asymptotic formulas ``omega ~ sqrt(8 E_C E_J)``, ``alpha ~ -E_C``; instead
they are reconstructed by root-finding so that the *dressed* coupled spectrum
reproduces the requested qubit frequencies, anharmonicities and coupling
splittings (see :func:`calibrate_device`).

Conventions
-----------
* internal units: angular frequencies in rad/ns, times in ns (hbar = 1)
* anharmonicities are negative numbers
* SQUID flux maps use ``E_J = E_J_max cos(2 phi / Phi0)`` restricted to the
  first positive branch ``2 phi / Phi0 in [0, pi/2)``; pulses never close
  the SQUID
* eigenvector phase fixing: the largest-magnitude component of every
  eigenvector is made real and positive, so that eigenbases at adjacent
  control values are continuous
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq, minimize_scalar

from .units import ghz, mhz

__all__ = [
    "TransmonSpec",
    "SpectralTargets",
    "DeviceSpec",
    "OperatorMatrix",
    "Spectrum",
    "BasisMismatchError",
    "NonHermitianError",
    "CalibrationError",
    "ResonanceError",
    "build_transmon_hamiltonian",
    "diagonalize",
    "transmon_frequencies",
    "calibrate_EJ",
    "calibrate_device",
    "measure_targets",
    "build_coupled_hamiltonian",
    "effective_six_level",
    "flux_to_EJ",
    "EJ_to_flux",
    "find_resonance",
    "frequency_map",
]

HERMITICITY_TOL = 1e-12
RESIDUAL_TOL = 1e-10
TRANSMON_REGIME_RATIO = 50.0


class BasisMismatchError(ValueError):
    """Operands of an algebraic operation live in different bases."""


class NonHermitianError(ValueError):
    """A matrix that must be Hermitian is not."""


class CalibrationError(RuntimeError):
    """A calibration root could not be bracketed or did not converge."""


class ResonanceError(RuntimeError):
    """No interior gap minimum found in the resonance sweep window."""


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TransmonSpec:
    """Circuit parameters of one flux-tunable transmon.

    Parameters
    ----------
    E_C:
        charging energy (angular, rad/ns), > 0
    E_J_max:
        Josephson energy at the flux sweet spot (angular, rad/ns), > 0
    charge_cutoff:
        charge basis cutoff ``m_max``; states ``m = -m_max .. m_max``
    """

    E_C: float
    E_J_max: float
    charge_cutoff: int = 12

    def __post_init__(self) -> None:
        if not self.E_C > 0:
            raise ValueError(f"E_C must be positive, got {self.E_C}")
        if not self.E_J_max > 0:
            raise ValueError(f"E_J_max must be positive, got {self.E_J_max}")
        if self.charge_cutoff < 10:
            raise ValueError(
                f"charge_cutoff must be >= 10, got {self.charge_cutoff}"
            )

    @property
    def dim(self) -> int:
        return 2 * self.charge_cutoff + 1

    @property
    def in_transmon_regime(self) -> bool:
        """True when E_J_max / E_C >= 50."""
        return self.E_J_max / self.E_C >= TRANSMON_REGIME_RATIO

    def regime_status(self) -> Optional[str]:
        """A warning string when outside the transmon regime, else None."""
        ratio = self.E_J_max / self.E_C
        if ratio >= TRANSMON_REGIME_RATIO:
            return None
        return (
            f"E_J/E_C = {ratio:.1f} is below the transmon regime bound of "
            f"{TRANSMON_REGIME_RATIO:.0f}; charge dispersion is not modelled"
        )


@dataclass(frozen=True)
class SpectralTargets:
    """Target spectral parameters of the two-qubit device (rad/ns).

    Defaults are the reference device: qubit frequencies 6.91 / 5.69 GHz,
    anharmonicities -0.331 / -0.300 GHz, one-excitation coupling
    J_1 = 14.3 MHz and two-excitation coupling J_2 = 20.2 MHz.
    """

    omega_a: float = ghz(6.91)
    omega_b: float = ghz(5.69)
    alpha_a: float = -ghz(0.331)
    alpha_b: float = -ghz(0.300)
    J_1: float = mhz(14.3)
    J_2: float = mhz(20.2)

    def __post_init__(self) -> None:
        if self.alpha_a >= 0 or self.alpha_b >= 0:
            raise ValueError("anharmonicities must be negative")
        if self.omega_a < self.omega_b:
            raise ValueError("the tunable qubit must park above the fixed one")
        if self.J_1 <= 0 or self.J_2 <= 0:
            raise ValueError("couplings must be positive")


@dataclass(frozen=True)
class DeviceSpec:
    """A calibrated pair of capacitively coupled transmons.

    ``tunable`` is qubit a (frequency moved by flux), ``parked`` is qubit b.
    ``J1_realized`` / ``J2_realized`` are the couplings measured on the full
    coupled model after calibration; J_2 is measured, never imposed.
    """

    tunable: TransmonSpec
    parked: TransmonSpec
    g_C: float
    targets: SpectralTargets
    J1_realized: Optional[float] = None
    J2_realized: Optional[float] = None

    @property
    def J2(self) -> float:
        """Best available half-splitting of the two-excitation crossing."""
        return self.J2_realized if self.J2_realized is not None else self.targets.J_2

    @property
    def J1(self) -> float:
        return self.J1_realized if self.J1_realized is not None else self.targets.J_1


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense square operator with a basis tag.

    Basis tags of both operands must match in any algebraic operation.
    Real storage is allowed (all Hamiltonians here are real symmetric);
    ``entries`` is complex whenever the operator is.
    """

    entries: np.ndarray
    basis: str

    def __post_init__(self) -> None:
        a = np.asarray(self.entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.basis)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def require_hermitian(self, tol: float = HERMITICITY_TOL) -> None:
        defect = self.hermiticity_defect()
        if defect > tol:
            raise NonHermitianError(
                f"matrix in basis '{self.basis}' is not Hermitian "
                f"(defect {defect:.3e} > {tol:.0e})"
            )

    def _check_basis(self, other: "OperatorMatrix") -> None:
        if self.basis != other.basis:
            raise BasisMismatchError(
                f"basis mismatch: '{self.basis}' vs '{other.basis}'"
            )

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        return OperatorMatrix(self.entries + other.entries, self.basis)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        return OperatorMatrix(self.entries - other.entries, self.basis)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_basis(other)
        return OperatorMatrix(self.entries @ other.entries, self.basis)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(self.entries * scalar, self.basis)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition with ascending energies and fixed vector phases."""

    energies: np.ndarray
    vectors: np.ndarray  # orthonormal columns
    basis: str

    @property
    def dim(self) -> int:
        return self.energies.size


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of each column real positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    if np.isrealobj(vectors):
        signs = np.where(pivots >= 0, 1.0, -1.0)
        return vectors * signs
    phases = pivots / np.abs(pivots)
    return vectors * phases.conj()


def diagonalize(H: OperatorMatrix, *, validate: bool = True) -> Spectrum:
    """Exact eigen-decomposition of a Hermitian operator.

    Raises :class:`NonHermitianError` for non-Hermitian input.  Energies come
    back ascending; eigenvector phases follow the module convention so that
    spectra at adjacent control values are continuous.
    """
    H.require_hermitian()
    a = H.entries
    w, v = np.linalg.eigh(a)
    v = _fix_phases(v)
    if validate:
        scale = max(float(np.max(np.abs(w))), 1.0)
        residual = float(np.max(np.abs(a @ v - v * w)))
        if residual > RESIDUAL_TOL * scale:
            raise ArithmeticError(
                f"eigen residual {residual:.3e} exceeds tolerance"
            )
    return Spectrum(energies=w, vectors=v, basis=H.basis)


# ---------------------------------------------------------------------------
# single transmon


def _charge_diagonals(spec: TransmonSpec, E_J: float):
    m = np.arange(-spec.charge_cutoff, spec.charge_cutoff + 1, dtype=float)
    return 4.0 * spec.E_C * m**2, np.full(spec.dim - 1, -0.5 * E_J)


def build_transmon_hamiltonian(
    spec: TransmonSpec, E_J: float, *, basis: str = "charge"
) -> OperatorMatrix:
    """Charge-basis Hamiltonian ``4 E_C n^2 - E_J cos(phi)``.

    ``-E_J cos(phi)`` is ``-(E_J/2) sum_m (|m><m+1| + h.c.)``.
    """
    if not E_J > 0:
        raise ValueError(f"E_J must be positive, got {E_J}")
    diag, off = _charge_diagonals(spec, E_J)
    H = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    return OperatorMatrix(H, basis)


def _lowest_levels(spec: TransmonSpec, E_J: float, k: int = 3) -> np.ndarray:
    diag, off = _charge_diagonals(spec, E_J)
    return sla.eigvalsh_tridiagonal(
        diag, off, select="i", select_range=(0, k - 1)
    )


def transmon_frequencies(spec: TransmonSpec, E_J: float) -> tuple[float, float]:
    """Exact ``(omega01, alpha)`` from the charge-basis spectrum.

    ``omega01 = E_1 - E_0`` and ``alpha = (E_2 - E_1) - (E_1 - E_0)``; no
    harmonic approximation is involved.
    """
    e = _lowest_levels(spec, E_J, 3)
    return float(e[1] - e[0]), float(e[2] - 2 * e[1] + e[0])


def _frequencies_batch(spec: TransmonSpec, EJ: np.ndarray):
    """Vectorized (omega01, alpha) for an array of Josephson energies."""
    EJ = np.asarray(EJ, dtype=float)
    m = np.arange(-spec.charge_cutoff, spec.charge_cutoff + 1, dtype=float)
    dim = spec.dim
    H = np.zeros(EJ.shape + (dim, dim))
    H[..., np.arange(dim), np.arange(dim)] = 4.0 * spec.E_C * m**2
    i = np.arange(dim - 1)
    H[..., i, i + 1] = -0.5 * EJ[..., None]
    H[..., i + 1, i] = -0.5 * EJ[..., None]
    w = np.linalg.eigvalsh(H)
    return w[..., 1] - w[..., 0], w[..., 2] - 2 * w[..., 1] + w[..., 0]


_EJ_BRACKET_FLOOR = 3.0  # in units of E_C; below this the map may lose monotonicity


def calibrate_EJ(spec: TransmonSpec, target_omega01: float) -> float:
    """Invert the exact map ``E_J -> omega01`` by bracketed root-finding.

    The map is monotone on the searched bracket
    ``[3 E_C, E_J_max]``; targets outside the attainable range raise
    :class:`CalibrationError`.
    """
    lo = _EJ_BRACKET_FLOOR * spec.E_C
    hi = spec.E_J_max
    if lo >= hi:
        raise CalibrationError("E_J_max too small for a transmon-regime search")
    w_lo = transmon_frequencies(spec, lo)[0]
    w_hi = transmon_frequencies(spec, hi)[0]
    if not (w_lo <= target_omega01 <= w_hi):
        raise CalibrationError(
            f"target omega01 = {target_omega01:.6f} rad/ns outside the "
            f"attainable range [{w_lo:.6f}, {w_hi:.6f}] for E_J in "
            f"[{lo:.3f}, {hi:.3f}]"
        )
    if target_omega01 == w_hi:
        return hi
    f = lambda EJ: transmon_frequencies(spec, EJ)[0] - target_omega01
    EJ = brentq(f, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    return float(EJ)


# ---------------------------------------------------------------------------
# flux maps


def flux_to_EJ(spec: TransmonSpec, phi: np.ndarray | float):
    """``E_J = E_J_max cos(2 phi / Phi0)`` on the first positive branch.

    ``phi`` is in units of Phi0, restricted to ``2 phi in [0, pi/2)``.
    """
    phi = np.asarray(phi, dtype=float)
    x = 2.0 * phi
    if np.any(x < 0) or np.any(x >= 0.5 * np.pi):
        raise ValueError("flux outside the first positive branch [0, pi/4)")
    out = spec.E_J_max * np.cos(x)
    return float(out) if out.ndim == 0 else out


def EJ_to_flux(spec: TransmonSpec, E_J: np.ndarray | float):
    """Inverse flux map, arccos on the first positive branch.

    Rejects ``E_J <= 0`` (the gate never closes the SQUID) and
    ``E_J > E_J_max``.
    """
    E_J = np.asarray(E_J, dtype=float)
    if np.any(E_J <= 0):
        raise ValueError("E_J <= 0 has no flux on the operating branch")
    ratio = E_J / spec.E_J_max
    if np.any(ratio > 1.0 + 1e-12):
        raise ValueError("E_J exceeds E_J_max")
    out = 0.5 * np.arccos(np.clip(ratio, -1.0, 1.0))
    return float(out) if out.ndim == 0 else out


class _EJOmegaMap:
    """Cached bidirectional map between E_J and the exact 0-1 splitting.

    ``omega`` is exact (batched diagonalization); ``ej`` interpolates a dense
    monotone table and polishes with Newton steps on the exact map, so the
    inverse is good to ~1e-12 relative.
    """

    def __init__(self, spec: TransmonSpec, nodes: int = 512):
        self.spec = spec
        lo = _EJ_BRACKET_FLOOR * spec.E_C
        self._ej_nodes = np.linspace(lo, spec.E_J_max, nodes)
        self._w_nodes, self._alpha_nodes = _frequencies_batch(spec, self._ej_nodes)
        if np.any(np.diff(self._w_nodes) <= 0):
            raise CalibrationError("omega01(E_J) is not monotone on the table")
        self._dw_nodes = self.domega_dEJ(self._ej_nodes)

    @property
    def omega_min(self) -> float:
        return float(self._w_nodes[0])

    @property
    def omega_max(self) -> float:
        return float(self._w_nodes[-1])

    def omega(self, EJ):
        w, _ = _frequencies_batch(self.spec, np.asarray(EJ, dtype=float))
        return w

    def omega_alpha(self, EJ):
        return _frequencies_batch(self.spec, np.asarray(EJ, dtype=float))

    def domega_dEJ(self, EJ):
        # Hellmann-Feynman: dE_i/dE_J = <i| dH/dE_J |i>, dH/dE_J = -K
        EJ = np.atleast_1d(np.asarray(EJ, dtype=float))
        spec = self.spec
        dim = spec.dim
        m = np.arange(-spec.charge_cutoff, spec.charge_cutoff + 1, dtype=float)
        H = np.zeros(EJ.shape + (dim, dim))
        H[..., np.arange(dim), np.arange(dim)] = 4.0 * spec.E_C * m**2
        i = np.arange(dim - 1)
        H[..., i, i + 1] = -0.5 * EJ[..., None]
        H[..., i + 1, i] = -0.5 * EJ[..., None]
        _, v = np.linalg.eigh(H)
        # <i|K|i> with K = 0.5 (shift + shift^T)
        v0, v1 = v[..., :, 0], v[..., :, 1]
        k0 = np.sum(v0[..., :-1] * v0[..., 1:], axis=-1)
        k1 = np.sum(v1[..., :-1] * v1[..., 1:], axis=-1)
        return -(k1 - k0)  # d(E1-E0)/dEJ with dH/dEJ = -K

    def ej(self, omega, newton_iters: int = 2):
        """Vectorized inverse map, Newton-polished on the exact spectrum.

        The Newton slope comes from the precomputed node table (the exact
        Hellmann-Feynman derivative varies slowly), so each iteration costs
        one batched eigenvalue solve.
        """
        omega = np.asarray(omega, dtype=float)
        scalar = omega.ndim == 0
        w = np.atleast_1d(omega)
        if np.any(w < self.omega_min - 1e-9) or np.any(w > self.omega_max + 1e-9):
            raise CalibrationError(
                f"omega01 outside attainable band "
                f"[{self.omega_min:.4f}, {self.omega_max:.4f}] rad/ns"
            )
        EJ = np.interp(w, self._w_nodes, self._ej_nodes)
        for _ in range(newton_iters):
            f = self.omega(EJ) - w
            df = np.interp(EJ, self._ej_nodes, self._dw_nodes)
            EJ = EJ - f / df
        EJ = np.clip(EJ, None, self.spec.E_J_max)
        return float(EJ[0]) if scalar else EJ


@lru_cache(maxsize=16)
def frequency_map(spec: TransmonSpec) -> _EJOmegaMap:
    """Cached exact E_J <-> omega01 map for one transmon."""
    return _EJOmegaMap(spec)


# ---------------------------------------------------------------------------
# coupled system


class _CoupledOps:
    """Precomputed pieces of the product-charge-basis coupled Hamiltonian."""

    def __init__(self, device: DeviceSpec):
        a, b = device.tunable, device.parked
        dim_a, dim_b = a.dim, b.dim
        ma = np.arange(-a.charge_cutoff, a.charge_cutoff + 1, dtype=float)
        mb = np.arange(-b.charge_cutoff, b.charge_cutoff + 1, dtype=float)
        ident_a = np.eye(dim_a)
        ident_b = np.eye(dim_b)

        Hb = build_transmon_hamiltonian(b, b.E_J_max).entries
        Ka = np.diag(np.full(dim_a - 1, 0.5), 1) + np.diag(
            np.full(dim_a - 1, 0.5), -1
        )
        # coupling (g/2)(n_a - n_b)^2 is diagonal in the product charge basis
        n_diff = ma[:, None] - mb[None, :]
        coupling_diag = 0.5 * device.g_C * (n_diff**2).ravel()

        self.dim = dim_a * dim_b
        self.static = (
            np.kron(np.diag(4.0 * a.E_C * ma**2), ident_b)
            + np.kron(ident_a, Hb)
            + np.diag(coupling_diag)
        )
        self.K_a = np.kron(Ka, ident_b)
        self.dims = (dim_a, dim_b)

    def hamiltonian(self, E_J_a: float) -> np.ndarray:
        return self.static - E_J_a * self.K_a


@lru_cache(maxsize=8)
def _coupled_ops(device: DeviceSpec) -> _CoupledOps:
    return _CoupledOps(device)


def build_coupled_hamiltonian(device: DeviceSpec, E_J_a: float) -> OperatorMatrix:
    """Coupled Hamiltonian ``H_a(E_J_a) + H_b + (g_C/2)(n_a - n_b)^2``.

    Product charge basis, qubit a as the slow index.
    """
    return OperatorMatrix(
        _coupled_ops(device).hamiltonian(E_J_a), basis="product-charge"
    )


def _coupled_levels(device: DeviceSpec, E_J_a: float, k: int) -> np.ndarray:
    H = _coupled_ops(device).hamiltonian(E_J_a)
    return sla.eigh(H, subset_by_index=(0, k - 1), eigvals_only=True)


def _product_states(device: DeviceSpec, labels) -> np.ndarray:
    """Columns: uncoupled eigenstate products |n_a n_b> in the charge basis."""
    a, b = device.tunable, device.parked
    spec_a = diagonalize(build_transmon_hamiltonian(a, a.E_J_max))
    spec_b = diagonalize(build_transmon_hamiltonian(b, b.E_J_max))
    cols = [
        np.kron(spec_a.vectors[:, na], spec_b.vectors[:, nb]) for na, nb in labels
    ]
    return np.array(cols).T


_SIX_LABELS = ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def _dressed_parking_levels(device: DeviceSpec) -> dict:
    """Energies of the six lowest dressed states at parking, by label.

    Labels by maximum overlap with the uncoupled product states; raises
    :class:`CalibrationError` when two labels claim the same eigenstate.
    """
    H = _coupled_ops(device).hamiltonian(device.tunable.E_J_max)
    w, v = sla.eigh(H, subset_by_index=(0, 9))
    prods = _product_states(device, _SIX_LABELS)
    overlaps = np.abs(prods.T @ v)  # (6, 10)
    assignment = {}
    taken = set()
    for i, label in enumerate(_SIX_LABELS):
        j = int(np.argmax(overlaps[i]))
        if j in taken:
            raise CalibrationError(
                f"ambiguous dressed-state labeling: index {j} claimed twice"
            )
        if overlaps[i, j] < 0.7:
            raise CalibrationError(
                f"dressed-state label {label} has weak overlap "
                f"{overlaps[i, j]:.3f}"
            )
        taken.add(j)
        assignment[label] = float(w[j])
    return assignment


def _measure_dressed(device: DeviceSpec) -> tuple[float, float, float, float]:
    lv = _dressed_parking_levels(device)
    e00 = lv[(0, 0)]
    omega_a = lv[(1, 0)] - e00
    omega_b = lv[(0, 1)] - e00
    alpha_a = lv[(2, 0)] - 2 * lv[(1, 0)] + e00
    alpha_b = lv[(0, 2)] - 2 * lv[(0, 1)] + e00
    return omega_a, omega_b, alpha_a, alpha_b


def _calibrate_bare(
    omega: float, alpha: float, charge_cutoff: int
) -> TransmonSpec:
    """E_C from the exact anharmonicity, E_J from the exact splitting."""
    alpha_mag = abs(alpha)

    def work_spec(E_C: float) -> TransmonSpec:
        # generous sweet-spot bound; the solved E_J fixes the real one
        bound = 3.0 * (omega**2 / (8.0 * E_C) + E_C)
        return TransmonSpec(E_C, bound, charge_cutoff)

    def residual(E_C: float) -> float:
        spec = work_spec(E_C)
        EJ = calibrate_EJ(spec, omega)
        return transmon_frequencies(spec, EJ)[1] - alpha

    lo, hi = 0.5 * alpha_mag, 1.3 * alpha_mag
    try:
        E_C = brentq(residual, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    except ValueError as exc:
        raise CalibrationError(
            f"could not bracket E_C for (omega, alpha) = ({omega}, {alpha})"
        ) from exc
    spec = work_spec(E_C)
    EJ = calibrate_EJ(spec, omega)
    return TransmonSpec(E_C, EJ, charge_cutoff)


def _one_excitation_min_gap(device: DeviceSpec, xatol: float = mhz(0.02)):
    """Minimum splitting of the 01/10 avoided crossing, sweeping omega_a."""
    fmap = frequency_map(device.tunable)
    omega_b = device.targets.omega_b
    window = mhz(120.0)

    def gap(omega_a: float) -> float:
        EJ = fmap.ej(omega_a)
        e = _coupled_levels(device, EJ, 3)
        return float(e[2] - e[1])

    res = minimize_scalar(
        gap,
        bounds=(omega_b - window, omega_b + window),
        method="bounded",
        options={"xatol": xatol},
    )
    return float(res.fun), float(res.x)


def _fit_g_C(
    device: DeviceSpec, J1_target: float, rtol: float = 1e-6
) -> DeviceSpec:
    """Tune g_C so the realized one-excitation half-splitting hits J_1."""

    def J1_of(g: float) -> float:
        gap, _ = _one_excitation_min_gap(replace(device, g_C=g))
        return 0.5 * gap

    # J1(g) is linear to high accuracy; secant from a matrix-element estimate
    g = device.g_C
    if g <= 0:
        spec_a, spec_b = device.tunable, device.parked
        va = diagonalize(build_transmon_hamiltonian(spec_a, spec_a.E_J_max))
        vb = diagonalize(build_transmon_hamiltonian(spec_b, spec_b.E_J_max))
        na = np.arange(-spec_a.charge_cutoff, spec_a.charge_cutoff + 1)
        nb = np.arange(-spec_b.charge_cutoff, spec_b.charge_cutoff + 1)
        n01_a = abs(np.sum(va.vectors[:, 0] * na * va.vectors[:, 1]))
        n01_b = abs(np.sum(vb.vectors[:, 0] * nb * vb.vectors[:, 1]))
        g = J1_target / (n01_a * n01_b)
    J = J1_of(g)
    for _ in range(30):
        if abs(J - J1_target) <= rtol * J1_target:
            break
        g_next = g * J1_target / J
        J_next = J1_of(g_next)
        g, J = g_next, J_next
    else:
        raise CalibrationError("g_C fit did not converge for J_1")
    return replace(device, g_C=g)


def calibrate_device(
    targets: SpectralTargets | None = None,
    *,
    charge_cutoff: int = 12,
    dressed_iters: int = 6,
) -> DeviceSpec:
    """Reconstruct circuit parameters so the full model hits the targets.

    Per qubit, ``E_C`` is initialized at ``-alpha`` and refined so the exact
    anharmonicity matches; ``E_J`` comes from :func:`calibrate_EJ`.  Both are
    then iterated so the *dressed* parking spectrum of the coupled model
    (which includes the coupling-induced frequency shifts) reproduces the
    targets.  ``g_C`` is fitted so the minimum 01/10 splitting equals
    ``2 J_1``.  The realized 11/20 splitting ``2 J_2`` is measured and
    reported, not imposed.
    """
    if targets is None:
        targets = SpectralTargets()

    # stage 1: bare calibration
    goal = dict(
        omega_a=targets.omega_a,
        omega_b=targets.omega_b,
        alpha_a=targets.alpha_a,
        alpha_b=targets.alpha_b,
    )
    bare = dict(goal)
    spec_a = _calibrate_bare(bare["omega_a"], bare["alpha_a"], charge_cutoff)
    spec_b = _calibrate_bare(bare["omega_b"], bare["alpha_b"], charge_cutoff)
    device = DeviceSpec(spec_a, spec_b, g_C=0.0, targets=targets)

    # stage 2: alternate the g_C fit with dressed refinement of the bare
    # targets; the two interact weakly (the coupling shifts the dressed
    # frequencies, the recalibrated E_J moves the charge matrix elements)
    scale = np.array(
        [goal["omega_a"], goal["omega_b"], -goal["alpha_a"], -goal["alpha_b"]]
    )
    for _ in range(3):
        device = _fit_g_C(device, targets.J_1, rtol=1e-8)
        for _ in range(dressed_iters):
            wa, wb, aa, ab = _measure_dressed(device)
            resid = np.array(
                [
                    wa - goal["omega_a"],
                    wb - goal["omega_b"],
                    aa - goal["alpha_a"],
                    ab - goal["alpha_b"],
                ]
            )
            if np.max(np.abs(resid / scale)) < 1e-11:
                break
            bare["omega_a"] -= resid[0]
            bare["omega_b"] -= resid[1]
            bare["alpha_a"] -= resid[2]
            bare["alpha_b"] -= resid[3]
            spec_a = _calibrate_bare(bare["omega_a"], bare["alpha_a"], charge_cutoff)
            spec_b = _calibrate_bare(bare["omega_b"], bare["alpha_b"], charge_cutoff)
            device = DeviceSpec(spec_a, spec_b, g_C=device.g_C, targets=targets)
        gap1, _ = _one_excitation_min_gap(device)
        if (
            abs(0.5 * gap1 - targets.J_1) < 1e-8 * targets.J_1
            and np.max(np.abs(resid / scale)) < 1e-10
        ):
            break

    wa, wb, _, _ = _measure_dressed(device)
    if wa < wb:
        raise CalibrationError("calibration produced omega_a < omega_b at parking")

    gap1, _ = _one_excitation_min_gap(device)
    star, gap2 = _find_resonance_raw(device)
    return replace(device, J1_realized=0.5 * gap1, J2_realized=0.5 * gap2)


def measure_targets(device: DeviceSpec) -> SpectralTargets:
    """Re-measure the spectral targets realized by a calibrated device."""
    wa, wb, aa, ab = _measure_dressed(device)
    gap1, _ = _one_excitation_min_gap(device)
    _, gap2 = _find_resonance_raw(device)
    return SpectralTargets(
        omega_a=wa, omega_b=wb, alpha_a=aa, alpha_b=ab,
        J_1=0.5 * gap1, J_2=0.5 * gap2,
    )


def _find_resonance_raw(
    device: DeviceSpec, *, window: tuple[float, float] | None = None
) -> tuple[float, float]:
    fmap = frequency_map(device.tunable)
    t = device.targets
    if window is None:
        lo = t.omega_b + 0.55 * abs(t.alpha_a)
        hi = t.omega_b + 1.45 * abs(t.alpha_a)
    else:
        lo, hi = window
    hi = min(hi, fmap.omega_max)

    def gap(omega_a: float) -> float:
        EJ = fmap.ej(omega_a)
        e = _coupled_levels(device, EJ, 6)
        return float(e[5] - e[4])

    res = minimize_scalar(
        gap, bounds=(lo, hi), method="bounded", options={"xatol": mhz(0.002)}
    )
    star = float(res.x)
    margin = 10.0 * mhz(0.002)
    if star - lo < margin or hi - star < margin:
        raise ResonanceError(
            "no interior gap minimum in the sweep window "
            f"[{lo:.4f}, {hi:.4f}] rad/ns"
        )
    return star, float(res.fun)


def find_resonance(device: DeviceSpec) -> tuple[float, float]:
    """Bare control value ``omega_a*`` minimizing the 11/20 dressed gap.

    Returns ``(omega_a_star, gap)`` where ``gap`` is the minimum splitting of
    the avoided crossing in the two-excitation sector of the full coupled
    Hamiltonian (approximately ``2 J_2``).
    """
    return _find_resonance_raw(device)


def parking_omega(device: DeviceSpec) -> float:
    """Bare 0-1 splitting of the tunable qubit at its sweet spot.

    This is the start value for every ramp; it differs from the dressed
    target frequency by the small coupling-induced shift.
    """
    return transmon_frequencies(device.tunable, device.tunable.E_J_max)[0]


@lru_cache(maxsize=8)
def resonance(device: DeviceSpec) -> tuple[float, float]:
    """Cached :func:`find_resonance`."""
    return _find_resonance_raw(device)


def effective_six_level(device: DeviceSpec, omega_a: float) -> OperatorMatrix:
    """Six-level matrix on (|00>, |01>, |10>, |02>, |11>, |20>).

    The two-photon diagonal entries are ``2 omega + alpha`` with the stored
    negative anharmonicities, which places the 11/20 crossing at
    ``omega_a = omega_b + |alpha_a|`` in agreement with the full model.
    """
    t = device.targets
    J1 = device.J1
    J2 = device.J2
    H = np.zeros((6, 6))
    H[1, 1] = t.omega_b
    H[2, 2] = omega_a
    H[3, 3] = 2.0 * t.omega_b + t.alpha_b
    H[4, 4] = omega_a + t.omega_b
    H[5, 5] = 2.0 * omega_a + t.alpha_a
    H[1, 2] = H[2, 1] = J1
    H[3, 4] = H[4, 3] = J2
    H[4, 5] = H[5, 4] = J2
    return OperatorMatrix(H, basis="six-level")
