"""Concrete cavity + Rydberg-bubble model systems.

Every model is a Hamiltonian plus ``(rate, L)`` collapse channels entering the
master equation as ``rate * (2 L rho L^+ - L^+ L rho - rho L^+ L)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import hilbert
from .hilbert import Basis, BasisKind
from .params import EffectiveParams, PhysicalParams, derive_effective


class Variant(str, enum.Enum):
    SPIN = "spin"
    BOSON_KBAR = "boson-kbar"
    BOSON_KBARPRIME = "boson-kbarprime"
    CAVITY = "cavity"


@dataclass(frozen=True, eq=False)
class ModelSystem:
    hamiltonian: sp.csr_matrix
    collapse_ops: tuple[tuple[float, sp.csr_matrix], ...]
    cavity_op: sp.csr_matrix
    basis: Basis
    variant: Variant
    drive: float = 0.0  # alpha; the drive term is drive * (a + a^+)

    def __post_init__(self):
        diff = self.hamiltonian - self.hamiltonian.conj().T
        if diff.nnz and abs(diff).max() > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        for rate, _ in self.collapse_ops:
            if not rate > 0:
                raise ValueError(f"collapse rate must be positive, got {rate}")

    @property
    def drive_op(self) -> sp.csr_matrix:
        a = self.cavity_op
        return (a + a.conj().T).tocsr()

    def undriven_hamiltonian(self) -> sp.csr_matrix:
        return (self.hamiltonian - self.drive * self.drive_op).tocsr()


@dataclass(frozen=True, eq=False)
class ThreeLevelModel:
    """Single-excitation non-Hermitian Hamiltonian on {|00>, |01>, |10>}."""

    matrix: np.ndarray

    def lower_block_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix[1:, 1:])

    def oscillation_frequency(self) -> float:
        """Angular frequency of the beat between the two single-excitation modes."""
        lam = self.lower_block_eigenvalues()
        return abs((lam[0] - lam[1]).real)


def _check_cutoff(cutoff: int):
    if cutoff < 2:
        raise ValueError("cutoff must be >= 2 to hold photon pairs")


def _cavity_part(basis: Basis, detuning: float, alpha: float):
    a = hilbert.cavity_annihilation(basis)
    ad = hilbert.adjoint(a)
    h = -detuning * (ad @ a) + alpha * (a + ad)
    return a, h


def build_spin_bubble(eff: EffectiveParams, p: PhysicalParams, cutoff: int = 6) -> ModelSystem:
    """Cavity mode coupled to the collective spin of ``N_b`` blockade bubbles.

    H = -Dc a^+a + alpha(a + a^+) - Dr (N_b/2 + J_z) + g_eff sqrt(n_b)(a J_+ + a^+ J_-)
    """
    _check_cutoff(cutoff)
    basis = hilbert.build_basis(BasisKind.SPIN_FOCK, cutoff, eff.bubble_count)
    a, h = _cavity_part(basis, eff.delta_c_eff, p.alpha)
    jm = hilbert.collective_lowering(basis)
    ad = hilbert.adjoint(a)
    coupling = eff.g_eff_sqrtN / np.sqrt(eff.bubble_count)  # g_eff sqrt(n_b)
    h = h - eff.delta_r_eff * hilbert.matter_number(basis)
    # a^+ J_- never leaves the truncated space midway; a J_+ would.
    exchange = (ad @ jm).tocsr()
    h = h + coupling * (exchange + hilbert.adjoint(exchange))
    collapse = ((eff.gamma_c_eff, a), (eff.gamma_r_eff, hilbert.matter_decay_jump(basis)))
    return ModelSystem(h.tocsr(), collapse, a, basis, Variant.SPIN, p.alpha)


def build_two_boson(eff: EffectiveParams, p: PhysicalParams, kappa_variant: Variant = Variant.BOSON_KBAR,
                    cutoff: int = 6, kappa: float | None = None) -> ModelSystem:
    """Cavity mode coupled to an anharmonic bubble boson b.

    H = -Dc a^+a + alpha(a + a^+) - Dr b^+b - (kappa/2) b^+b^+bb + g_eff sqrt(N)(a b^+ + a^+ b)

    ``kappa`` overrides the anharmonicity implied by ``kappa_variant``.
    """
    _check_cutoff(cutoff)
    if kappa is None:
        if kappa_variant is Variant.BOSON_KBAR:
            kappa = eff.kappa_bar
        elif kappa_variant is Variant.BOSON_KBARPRIME:
            kappa = eff.kappa_bar_prime
        else:
            raise ValueError(f"not a two-boson variant: {kappa_variant}")
    basis = hilbert.build_basis(BasisKind.BOSON_FOCK, cutoff)
    a, h = _cavity_part(basis, eff.delta_c_eff, p.alpha)
    b = hilbert.boson_annihilation(basis)
    ad = hilbert.adjoint(a)
    nr = hilbert.matter_number(basis)
    pairs = (nr @ nr - nr)  # b^+b^+bb, exact on the retained space
    h = h - eff.delta_r_eff * nr - 0.5 * kappa * pairs
    exchange = (ad @ b).tocsr()
    h = h + eff.g_eff_sqrtN * (exchange + hilbert.adjoint(exchange))
    collapse = ((eff.gamma_c_eff, a), (eff.gamma_r_eff, b))
    return ModelSystem(h.tocsr(), collapse, a, basis, kappa_variant, p.alpha)


def build_h3(eff: EffectiveParams, p: PhysicalParams) -> ThreeLevelModel:
    g = eff.g_eff_sqrtN
    m = np.array(
        [
            [0.0, p.alpha, 0.0],
            [p.alpha, -eff.delta_c_eff - 1j * eff.gamma_c_eff, g],
            [0.0, g, -eff.delta_r_eff - 1j * eff.gamma_r_eff],
        ],
        dtype=complex,
    )
    return ThreeLevelModel(m)


def build_cavity_only(p: PhysicalParams, cutoff: int = 6) -> ModelSystem:
    """Driven damped empty cavity at the bare detuning and decay rate."""
    _check_cutoff(cutoff)
    basis = hilbert.build_basis(BasisKind.BOSON_FOCK, cutoff, boson_cutoff=0)
    a, h = _cavity_part(basis, p.delta_c, p.alpha)
    return ModelSystem(h.tocsr(), ((p.gamma_c, a),), a, basis, Variant.CAVITY, p.alpha)


def build_model(variant: Variant | str, p: PhysicalParams, cutoff: int = 6) -> ModelSystem:
    variant = Variant(variant)
    if variant is Variant.CAVITY:
        return build_cavity_only(p, cutoff)
    eff = derive_effective(p)
    if variant is Variant.SPIN:
        return build_spin_bubble(eff, p, cutoff)
    return build_two_boson(eff, p, variant, cutoff)
