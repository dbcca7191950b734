"""Ladder operators, Hamiltonians, supercharges and Fock states.

Conventions: ħ = 1, no zero-point energy (H = ω N), and the truncated
bosonic creator annihilates the top retained level.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .hilbert import Basis, ModeKind, ModeSpec, Operator, StateVector, embed


class Kind(str, enum.Enum):
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"
    SUSY = "susy"


def bosonic_basis(cutoff: int, doubled: bool = False, label: str = "b") -> Basis:
    return Basis((ModeSpec.bosonic(cutoff, label),), doubled)


def fermionic_basis(doubled: bool = False, label: str = "f") -> Basis:
    return Basis((ModeSpec.fermionic(label),), doubled)


def susy_basis(cutoff: int, doubled: bool = False) -> Basis:
    """One bosonic mode ``b`` followed by one fermionic mode ``f``."""
    return Basis((ModeSpec.bosonic(cutoff, "b"), ModeSpec.fermionic("f")), doubled)


def basis_for(kind, cutoff: int = 0, doubled: bool = False) -> Basis:
    kind = Kind(kind)
    if kind is Kind.BOSONIC:
        return bosonic_basis(cutoff, doubled)
    if kind is Kind.FERMIONIC:
        return fermionic_basis(doubled)
    return susy_basis(cutoff, doubled)


def infer_kind(basis: Basis) -> Kind:
    """Classify the physical modes of ``basis`` as one of the three oscillators."""
    nb = len(basis.modes_of_kind(ModeKind.BOSONIC))
    nf = len(basis.modes_of_kind(ModeKind.FERMIONIC))
    if (nb, nf) == (1, 0):
        return Kind.BOSONIC
    if (nb, nf) == (0, 1):
        return Kind.FERMIONIC
    if (nb, nf) == (1, 1):
        return Kind.SUSY
    raise ConfigurationError(f"basis {basis.labels} is not a single bosonic, fermionic or susy oscillator")


def mode_label(basis: Basis, kind: ModeKind) -> str:
    """Label of the unique physical mode of the given statistics."""
    found = basis.modes_of_kind(kind)
    if len(found) != 1:
        raise ConfigurationError(f"expected exactly one {ModeKind(kind).value} mode in {basis.labels}, found {len(found)}")
    return found[0].label


def _local_annihilator(mode: ModeSpec) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, mode.dim, dtype=float)), k=1).astype(complex)


def annihilator(basis: Basis, label: str) -> Operator:
    return embed(basis, label, _local_annihilator(basis.mode(label)))


def creator(basis: Basis, label: str) -> Operator:
    return embed(basis, label, _local_annihilator(basis.mode(label)).T.copy())


def number_op(basis: Basis, label: str) -> Operator:
    """a†a, built from the exact occupation diagonal (√n·√n is not exactly n in floats)."""
    mode = basis.mode(label)
    return embed(basis, label, np.diag(np.arange(mode.dim, dtype=float)).astype(complex))


@dataclass(frozen=True)
class OscillatorSystem:
    basis: Basis
    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigurationError(f"omega must be positive, got {self.omega!r}")


def hamiltonian(system: OscillatorSystem, kind=None) -> Operator:
    """ω N_B, ω N_F or ω (N_B + N_F) on the system's basis."""
    basis = system.basis
    kind = infer_kind(basis) if kind is None else Kind(kind)
    parts = []
    if kind in (Kind.BOSONIC, Kind.SUSY):
        parts.append(number_op(basis, mode_label(basis, ModeKind.BOSONIC)))
    if kind in (Kind.FERMIONIC, Kind.SUSY):
        parts.append(number_op(basis, mode_label(basis, ModeKind.FERMIONIC)))
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return system.omega * total


def energies(basis: Basis, omega: float = 1.0) -> np.ndarray:
    """Diagonal of ω Σ N over the physical modes, indexed like ``basis.base``."""
    occ = basis.base.occupations
    return omega * occ.sum(axis=1).astype(float)


def supercharge(basis: Basis):
    """Return ``(Q, Qbar)`` with Q = a_B† a_F and Qbar = Q†."""
    lb = mode_label(basis, ModeKind.BOSONIC)
    lf = mode_label(basis, ModeKind.FERMIONIC)
    if len(basis.modes) != 2:
        raise ConfigurationError("supercharges need exactly one bosonic and one fermionic mode")
    q = creator(basis, lb) @ annihilator(basis, lf)
    return q, q.adjoint()


def fock_state(basis: Basis, occupation) -> StateVector:
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.index_of(occupation)] = 1.0
    return StateVector(basis, amps)


def vacuum(basis: Basis) -> StateVector:
    return fock_state(basis, (0,) * len(basis.dims))
