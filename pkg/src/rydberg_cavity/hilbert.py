"""Truncated excitation bases |N_r, n_c> and sparse operator matrices on them.

Operators are ``scipy.sparse.csr_matrix`` in the basis enumeration order.
Anything that would map a retained state outside the truncation is dropped
(projector-truncated), so ``a`` is exact while ``a^dagger`` loses its
boundary rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class BasisKind(enum.Enum):
    SPIN_FOCK = "spin-fock"
    BOSON_FOCK = "boson-fock"
    THREE_LEVEL = "three-level"


@dataclass(frozen=True)
class Basis:
    kind: BasisKind
    max_total_excitations: int
    states: tuple[tuple[int, int], ...]
    spin_levels: int | None = None
    boson_cutoff: int | None = None
    index: dict[tuple[int, int], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {s: i for i, s in enumerate(self.states)})

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def bubble_count(self) -> int:
        if self.spin_levels is None:
            raise AttributeError("only spin bases carry a bubble count")
        return self.spin_levels - 1

    def state(self, i: int) -> tuple[int, int]:
        return self.states[i]

    def matter_excitations(self) -> np.ndarray:
        return np.array([s[0] for s in self.states])

    def photon_numbers(self) -> np.ndarray:
        return np.array([s[1] for s in self.states])

    def ket(self, n_r: int, n_c: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[(n_r, n_c)]] = 1.0
        return v

    def projector(self, n_r: int, n_c: int) -> np.ndarray:
        v = self.ket(n_r, n_c)
        return np.outer(v, v.conj())


def build_basis(kind: BasisKind, max_total_excitations: int = 6, bubble_count: int | None = None,
                boson_cutoff: int | None = None) -> Basis:
    """Enumerate states lexicographically in (N_r, n_c) with N_r + n_c <= cutoff.

    ``SPIN_FOCK`` caps N_r at ``bubble_count``; ``BOSON_FOCK`` caps it at
    ``boson_cutoff`` (defaults to the total cutoff, ``0`` gives a bare cavity);
    ``THREE_LEVEL`` is always {|00>, |01>, |10>}.
    """
    if kind is BasisKind.THREE_LEVEL:
        return Basis(kind, 1, ((0, 0), (0, 1), (1, 0)))
    if max_total_excitations < 1:
        raise ValueError("max_total_excitations must be >= 1")
    if kind is BasisKind.SPIN_FOCK:
        if bubble_count is None or bubble_count < 1:
            raise ValueError("spin basis needs bubble_count >= 1")
        matter_max = bubble_count
    else:
        matter_max = max_total_excitations if boson_cutoff is None else boson_cutoff
        if matter_max < 0:
            raise ValueError("boson_cutoff must be >= 0")
    cutoff = max_total_excitations
    states = tuple(
        (n_r, n_c)
        for n_r in range(min(matter_max, cutoff) + 1)
        for n_c in range(cutoff - n_r + 1)
    )
    return Basis(
        kind,
        cutoff,
        states,
        spin_levels=bubble_count + 1 if kind is BasisKind.SPIN_FOCK else None,
        boson_cutoff=matter_max if kind is BasisKind.BOSON_FOCK else None,
    )


def _ladder(basis: Basis, step: tuple[int, int], coeff) -> sp.csr_matrix:
    """Matrix of |s + step><s| * coeff(s), skipping targets outside the basis."""
    rows, cols, vals = [], [], []
    for j, (n_r, n_c) in enumerate(basis.states):
        target = (n_r + step[0], n_c + step[1])
        i = basis.index.get(target)
        if i is None:
            continue
        c = coeff(n_r, n_c)
        if c != 0:
            rows.append(i)
            cols.append(j)
            vals.append(c)
    d = basis.dim
    return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(d, d))


def _diag(values) -> sp.csr_matrix:
    return sp.diags(np.asarray(values, dtype=complex), format="csr")


def identity(basis: Basis) -> sp.csr_matrix:
    return sp.identity(basis.dim, dtype=complex, format="csr")


def cavity_annihilation(basis: Basis) -> sp.csr_matrix:
    """a with <N_r, n_c - 1| a |N_r, n_c> = sqrt(n_c)."""
    return _ladder(basis, (0, -1), lambda n_r, n_c: np.sqrt(n_c))


def cavity_number(basis: Basis) -> sp.csr_matrix:
    return _diag(basis.photon_numbers())


def collective_lowering(basis: Basis) -> sp.csr_matrix:
    """J_- in the symmetric spin-N_b/2 sector, hbar = 1."""
    if basis.kind is not BasisKind.SPIN_FOCK:
        raise ValueError("collective spin operators need a SPIN_FOCK basis")
    nb = basis.bubble_count
    return _ladder(basis, (-1, 0), lambda n_r, n_c: np.sqrt(n_r * (nb - n_r + 1)))


def collective_raising(basis: Basis) -> sp.csr_matrix:
    return collective_lowering(basis).conj().T.tocsr()


def collective_z(basis: Basis) -> sp.csr_matrix:
    if basis.kind is not BasisKind.SPIN_FOCK:
        raise ValueError("collective spin operators need a SPIN_FOCK basis")
    return _diag(basis.matter_excitations() - basis.bubble_count / 2)


def boson_annihilation(basis: Basis) -> sp.csr_matrix:
    if basis.kind is not BasisKind.BOSON_FOCK:
        raise ValueError("boson operators need a BOSON_FOCK basis")
    return _ladder(basis, (-1, 0), lambda n_r, n_c: np.sqrt(n_r))


def matter_number(basis: Basis) -> sp.csr_matrix:
    """N_r, i.e. N_b/2 + J_z on a spin basis or b^dagger b on a boson basis."""
    return _diag(basis.matter_excitations())


def matter_decay_jump(basis: Basis) -> sp.csr_matrix:
    """Symmetric-sector jump operator with <N_r - 1|L|N_r> = sqrt(N_r).

    Paired with rate gamma in the ``gamma (2 L rho L^+ - ...)`` form, the
    state with N_r excited bubbles loses population at 2 gamma N_r, the same
    total rate as the sum of independent single-bubble channels.
    """
    return _ladder(basis, (-1, 0), lambda n_r, n_c: np.sqrt(n_r))


def adjoint(op: sp.spmatrix) -> sp.csr_matrix:
    return op.conj().T.tocsr()
