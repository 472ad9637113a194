"""Gate quality metrics: leakage, phase decomposition, fidelities.

All metrics act on the 4x4 computational block of a propagator (or on the
16 dyad images of a channel) expressed over (|00>, |01>, |10>, |11>).  The
phase content of a near-diagonal block is decomposed as

    U = exp(i (phi0 + phi1 sz_a + phi2 sz_b + phi12 sz_a sz_b))

with ``sz|0> = +|0>``; a CZ gate corresponds to ``phi12 = pi/4`` modulo the
sign conventions absorbed by local Z rotations (``4 phi12 = pi`` mod 2 pi).
Local corrections use the normal form that zeroes the phases of |00>, |01>
and |10>, leaving the whole entangling phase ``4 phi12`` on |11>; fidelities
are insensitive to the global-phase split between the two conventions.

Leakage follows the column-averaged escaped probability
``L = |1 - (1/d) sum |U_ss'|^2|`` (normalized so the identity has zero
leakage), and average fidelities derive from entanglement fidelities via
``F_avg = (d F_e + 1) / (d + 1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .propagation import ChannelImage

__all__ = [
    "PhaseGate",
    "GateReport",
    "RampBlockDecomposition",
    "NonDiagonalBlockError",
    "leakage",
    "extract_phases",
    "local_correction",
    "entanglement_fidelity_unitary",
    "entanglement_fidelity_channel",
    "average_fidelity",
    "analyze_ramp_block",
    "CZ_TARGET",
]

CZ_TARGET = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex)

# sz_a, sz_b eigenvalue patterns on (|00>, |01>, |10>, |11>)
_SZ_A = np.array([1.0, 1.0, -1.0, -1.0])
_SZ_B = np.array([1.0, -1.0, 1.0, -1.0])


class NonDiagonalBlockError(ValueError):
    """The computational block is too far from diagonal to read phases."""


@dataclass(frozen=True)
class PhaseGate:
    """Diagonal two-qubit phase gate, angles in radians."""

    phi0: float
    phi1: float
    phi2: float
    phi12: float

    def diagonal(self) -> np.ndarray:
        theta = (
            self.phi0
            + self.phi1 * _SZ_A
            + self.phi2 * _SZ_B
            + self.phi12 * _SZ_A * _SZ_B
        )
        return np.exp(1j * theta)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def is_cz_equivalent(self, tol: float = 1e-6) -> bool:
        """CZ up to local Z rotations: 4 phi12 = pi (mod 2 pi), either sign."""
        residue = (4.0 * self.phi12 - math.pi) % (2.0 * math.pi)
        return min(residue, 2.0 * math.pi - residue) < tol


@dataclass(frozen=True)
class GateReport:
    """Summary of one simulated gate."""

    leakage: float
    phases: PhaseGate
    F_avg_best_phase_gate: float
    F_avg_cz: float
    T_gate: float

    def __post_init__(self) -> None:
        for name in ("F_avg_best_phase_gate", "F_avg_cz"):
            value = getattr(self, name)
            if not -1e-9 <= value <= 1.0 + 1e-9:
                raise ValueError(f"{name} = {value} outside [0, 1]")
        if not -1e-9 <= self.leakage <= 1.0 + 1e-9:
            raise ValueError(f"leakage = {self.leakage} outside [0, 1]")

    def csv_row(self) -> dict:
        return {
            "T_gate_ns": self.T_gate,
            "leakage": self.leakage,
            "phi0": self.phases.phi0,
            "phi1": self.phases.phi1,
            "phi2": self.phases.phi2,
            "phi12": self.phases.phi12,
            "F_avg_best_phase_gate": self.F_avg_best_phase_gate,
            "F_avg_cz": self.F_avg_cz,
        }

    def summary(self) -> str:
        p = self.phases
        return "\n".join(
            [
                f"gate time        : {self.T_gate:.3f} ns",
                f"leakage          : {self.leakage:.3e}",
                (
                    "phases (rad)     : "
                    f"phi0={p.phi0:+.6f} phi1={p.phi1:+.6f} "
                    f"phi2={p.phi2:+.6f} phi12={p.phi12:+.6f}"
                ),
                f"F_avg (best phase gate): {self.F_avg_best_phase_gate:.8f}",
                f"F_avg (CZ)             : {self.F_avg_cz:.8f}",
            ]
        )


def leakage(block: np.ndarray) -> float:
    """Column-averaged probability of leaving the computational subspace."""
    block = np.asarray(block)
    return float(abs(1.0 - np.sum(np.abs(block) ** 2) / block.shape[0]))


def _offdiagonal_mass(block: np.ndarray) -> float:
    total = float(np.sum(np.abs(block) ** 2))
    diag = float(np.sum(np.abs(np.diagonal(block)) ** 2))
    return (total - diag) / total if total > 0 else 1.0


def extract_phases(block: np.ndarray, max_offdiag: float = 0.1) -> PhaseGate:
    """Decompose the diagonal phases of a near-diagonal block.

    Raises :class:`NonDiagonalBlockError` when more than ``max_offdiag`` of
    the block's weight sits off the diagonal.
    """
    block = np.asarray(block, dtype=complex)
    if _offdiagonal_mass(block) >= max_offdiag:
        raise NonDiagonalBlockError(
            f"off-diagonal mass {_offdiagonal_mass(block):.3f} >= {max_offdiag}"
        )
    theta = np.angle(np.diagonal(block))
    t00, t01, t10, t11 = theta
    return PhaseGate(
        phi0=(t00 + t01 + t10 + t11) / 4.0,
        phi1=(t00 + t01 - t10 - t11) / 4.0,
        phi2=(t00 - t01 + t10 - t11) / 4.0,
        phi12=(t00 - t01 - t10 + t11) / 4.0,
    )


def local_correction(block: np.ndarray) -> np.ndarray:
    """Diagonal unitary removing all locally correctable phases.

    Applied as ``U_loc^dagger @ block``, the corrected block has zero phase
    on |00>, |01> and |10>; the remaining |11> phase is the entangling
    ``4 phi12``.
    """
    block = np.asarray(block, dtype=complex)
    theta = np.angle(np.diagonal(block))
    corrected = np.array(
        [theta[0], theta[1], theta[2], theta[1] + theta[2] - theta[0]]
    )
    return np.diag(np.exp(1j * corrected))


def _target_diagonal(target) -> np.ndarray:
    if isinstance(target, PhaseGate):
        return target.diagonal()
    if isinstance(target, str):
        if target.lower() == "cz":
            return CZ_TARGET
        raise ValueError(f"unknown target '{target}'")
    arr = np.asarray(target, dtype=complex)
    if arr.ndim == 2:
        arr = np.diagonal(arr)
    if arr.shape != (4,):
        raise ValueError("target must be a 4-entry diagonal")
    return arr


def entanglement_fidelity_unitary(block: np.ndarray, target="cz") -> float:
    """``F_e = |(1/d) sum_s <s| U_id^+ U_loc^+ U |s>|^2`` for a 4x4 block.

    ``target`` may be "cz", "best" (the optimal phase-gate target, which
    reduces to full diagonal-phase correction), a :class:`PhaseGate`, or an
    explicit diagonal.
    """
    block = np.asarray(block, dtype=complex)
    diag = np.diagonal(block)
    if isinstance(target, str) and target.lower() == "best":
        return float((np.sum(np.abs(diag)) / 4.0) ** 2)
    u_id = _target_diagonal(target)
    u_loc = np.diagonal(local_correction(block))
    amp = np.sum(u_id.conj() * u_loc.conj() * diag) / 4.0
    return float(abs(amp) ** 2)


def average_fidelity(F_e: float, d: int = 4) -> float:
    """Average fidelity from the entanglement fidelity, ``(d F_e + 1)/(d+1)``."""
    return (d * F_e + 1.0) / (d + 1.0)


def _channel_block(images: Union[ChannelImage, np.ndarray]) -> np.ndarray:
    if isinstance(images, ChannelImage):
        return images.block()
    G = np.asarray(images, dtype=complex)
    if G.shape != (4, 4):
        raise ValueError("expected a ChannelImage or its 4x4 coherence block")
    return G


def channel_local_phases(images: Union[ChannelImage, np.ndarray]) -> np.ndarray:
    """Locally correctable phases of a channel's unitary part.

    Read from the coherences of the dyads against |00>:
    ``theta_s = arg <s| E(|s><00|) |00>`` (zero for |00> itself), assembled
    into the same normal form as :func:`local_correction`.
    """
    G = _channel_block(images)
    theta = np.angle(G[:, 0])
    corrected = np.array(
        [theta[0], theta[1], theta[2], theta[1] + theta[2] - theta[0]]
    )
    return np.exp(1j * corrected)


def entanglement_fidelity_channel(
    images: Union[ChannelImage, np.ndarray], target="cz"
) -> float:
    """Entanglement fidelity of a non-unitary channel against a phase gate.

    ``F_e = (1/d^2) sum_ss' <s| U_id^+ U_loc^+ E(|s><s'|) U_loc U_id |s'>``
    computed from the coherence block ``G_ss' = <s|E(|s><s'|)|s'>``; the
    imaginary residue must stay below 1e-8.
    """
    G = _channel_block(images)
    u_id = _target_diagonal(target)
    u_loc = channel_local_phases(G)
    c = u_loc * u_id
    value = complex(np.einsum("i,ij,j->", c.conj(), G, c)) / 16.0
    if abs(value.imag) > 1e-8:
        raise ValueError(
            f"entanglement fidelity has imaginary residue {value.imag:.2e}"
        )
    return float(value.real)


def channel_leakage(images: ChannelImage) -> float:
    """Averaged population escaping the computational subspace."""
    P = images.populations()
    return float(abs(1.0 - np.sum(P) / 4.0))


def gate_report_from_block(block: np.ndarray, T_gate: float) -> GateReport:
    """Assemble the standard report for a unitary gate block."""
    Fe_best = entanglement_fidelity_unitary(block, "best")
    Fe_cz = entanglement_fidelity_unitary(block, "cz")
    return GateReport(
        leakage=leakage(block),
        phases=extract_phases(block, max_offdiag=0.999),
        F_avg_best_phase_gate=average_fidelity(Fe_best),
        F_avg_cz=average_fidelity(Fe_cz),
        T_gate=T_gate,
    )


# ---------------------------------------------------------------------------
# half-ramp block analysis


@dataclass(frozen=True)
class RampBlockDecomposition:
    """Structure of the down-ramp propagator between initial and final frames.

    The one-excitation and |02> states acquire phases ``xi``; the 11/20-like
    dressed pair undergoes the 2x2 sub-unitary [[alpha, gamma_], [beta,
    delta]].  Waiting near the crossing rotates the pair at the splitting
    rate, and the leaked amplitude refocuses when ``exp(i J2 t) || beta /
    alpha``; the first recovery time and the revival period are reported.
    """

    xi_01: float
    xi_10: float
    xi_02: float
    alpha: complex
    beta: complex
    gamma_: complex
    delta: complex
    t_wait_base: float
    t_wait_period: float
    block_unitarity_defect: float
    excess_leakage: bool

    def predicted_wait(
        self, near: Optional[float] = None, window: Optional[tuple] = None
    ) -> float:
        """Recovery time closest to ``near`` (or inside ``window``)."""
        if near is None and window is None:
            return self.t_wait_base
        candidates = [
            self.t_wait_base + k * self.t_wait_period for k in range(0, 8)
        ]
        if window is not None:
            lo, hi = window
            inside = [t for t in candidates if lo <= t <= hi]
            if inside:
                return inside[0]
        assert near is not None or window is not None
        ref = near if near is not None else 0.5 * (window[0] + window[1])
        return min(candidates, key=lambda t: abs(t - ref))


def analyze_ramp_block(
    U_mixed: np.ndarray,
    gap: float,
    *,
    idx_initial: Sequence[int] = (1, 2, 3, 4, 5),
    idx_final: Sequence[int] = (1, 2, 3, 4, 5),
    leakage_tol: float = 1e-3,
) -> RampBlockDecomposition:
    """Decompose a down-ramp propagator expressed between eigenframes.

    ``U_mixed[m, n] = <final eigenstate m | U | initial eigenstate n>``.
    ``idx_initial`` / ``idx_final`` list the frame indices of
    (|01>, |10>, |02>, |11>, |20>) in each frame; ``gap`` is the dressed
    splitting at the destination (twice the effective coupling).
    """
    U_mixed = np.asarray(U_mixed, dtype=complex)
    i01, i10, i02, i11, i20 = idx_initial
    f01, f10, f02, f11, f20 = idx_final
    xi_01 = -cmath.phase(U_mixed[f01, i01])
    xi_10 = -cmath.phase(U_mixed[f10, i10])
    xi_02 = -cmath.phase(U_mixed[f02, i02])
    # rows: dressed pair (lower = minus, upper = plus); columns: 11, 20
    alpha = U_mixed[f11, i11]
    beta = U_mixed[f20, i11]
    gamma_ = U_mixed[f11, i20]
    delta = U_mixed[f20, i20]
    two_by_two = np.array([[alpha, gamma_], [beta, delta]])
    defect = float(
        np.max(np.abs(two_by_two.conj().T @ two_by_two - np.eye(2)))
    )
    excess = defect > leakage_tol
    J2 = 0.5 * gap
    phase = cmath.phase(beta / alpha) if abs(alpha) > 0 and abs(beta) > 0 else 0.0
    base = (phase % math.pi) / J2
    return RampBlockDecomposition(
        xi_01=xi_01,
        xi_10=xi_10,
        xi_02=xi_02,
        alpha=complex(alpha),
        beta=complex(beta),
        gamma_=complex(gamma_),
        delta=complex(delta),
        t_wait_base=base,
        t_wait_period=math.pi / J2,
        block_unitarity_defect=defect,
        excess_leakage=excess,
    )
