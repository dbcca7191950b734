"""Angle states, exponential phase operators and phase distributions.

Angle states are kept unnormalized, with exactly the coefficients
1/√(2π) e^{inθ} (bosonic, fermionic) and e^{i(n_B+n_F)θ}/(2^{3/2}π)
(supersymmetric), so that grid quadratures of |θ⟩⟨θ| reproduce the
resolutions of identity where they hold and expose the defect where they
do not.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .hilbert import AngleGrid, Basis, ModeKind, Operator, StateVector, angle_quadrature, embed
from .oscillators import Kind, infer_kind, mode_label

TWO_PI = 2 * math.pi
NORM_TOL = 1e-12

_PREFACTOR = {
    Kind.BOSONIC: 1 / math.sqrt(TWO_PI),
    Kind.FERMIONIC: 1 / math.sqrt(TWO_PI),
    Kind.SUSY: 1 / (2 ** 1.5 * math.pi),
}


def _resolve_kind(basis: Basis, kind) -> Kind:
    if basis.doubled:
        raise ConfigurationError("phase constructions live on the undoubled space")
    found = infer_kind(basis)
    if kind is not None and Kind(kind) is not found:
        raise ConfigurationError(f"basis {basis.labels} holds a {found.value} oscillator, not {Kind(kind).value}")
    return found


def _check_theta(theta):
    if not 0 <= theta < TWO_PI:
        raise DomainError(f"theta must lie in [0, 2π), got {theta!r}")


def _total_excitation(basis: Basis) -> np.ndarray:
    return basis.occupations.sum(axis=1)


@dataclass(frozen=True, eq=False)
class AngleState:
    theta: float
    state: StateVector
    kind: Kind


def angle_state(basis: Basis, theta: float, kind=None) -> AngleState:
    kind = _resolve_kind(basis, kind)
    _check_theta(theta)
    amps = _PREFACTOR[kind] * np.exp(1j * theta * _total_excitation(basis))
    return AngleState(float(theta), StateVector(basis, amps), kind)


def _angle_matrix(basis: Basis, kind: Kind, grid: AngleGrid) -> np.ndarray:
    """Rows are the angle states at the grid nodes."""
    n = _total_excitation(basis)
    return _PREFACTOR[kind] * np.exp(1j * np.outer(grid.nodes, n))


def completeness_defect(basis: Basis, kind=None, grid_size: int = None) -> float:
    """Spectral norm of  Σ_j (2π/M)|θ_j⟩⟨θ_j| − 1."""
    kind = _resolve_kind(basis, kind)
    max_exc = int(_total_excitation(basis).max())
    if grid_size is None:
        grid_size = 4 * (max_exc + 2)
    if grid_size < 2 * max_exc + 1:
        raise ConfigurationError(f"grid of {grid_size} nodes cannot resolve excitations up to {max_exc}")
    grid = AngleGrid(grid_size)
    rows = _angle_matrix(basis, kind, grid)
    resolution = grid.weight * (rows.T @ rows.conj())
    return float(np.linalg.norm(resolution - np.eye(basis.dim), 2))


def _bosonic_shift(dim: int) -> np.ndarray:
    return np.eye(dim, k=1, dtype=complex)


def _fermionic_phase_matrix(theta: float) -> np.ndarray:
    # |0><1| + e^{iθ}|1><0| + |1><1|
    return np.array([[0, 1], [np.exp(1j * theta), 1]], dtype=complex)


def exponential_phase_op(basis: Basis, kind=None, theta: float = None) -> Operator:
    """Bosonic one-sided shift, fermionic θ-family, or their tensor product."""
    kind = _resolve_kind(basis, kind)
    if kind is not Kind.BOSONIC and theta is None:
        raise ConfigurationError(f"the {kind.value} exponential phase operator is θ-dependent; pass theta")
    ops = []
    if kind in (Kind.BOSONIC, Kind.SUSY):
        lb = mode_label(basis, ModeKind.BOSONIC)
        ops.append(embed(basis, lb, _bosonic_shift(basis.mode(lb).dim)))
    if kind in (Kind.FERMIONIC, Kind.SUSY):
        lf = mode_label(basis, ModeKind.FERMIONIC)
        ops.append(embed(basis, lf, _fermionic_phase_matrix(theta)))
    out = ops[0]
    for op in ops[1:]:
        out = out @ op
    return out


def naive_phase_op(basis: Basis, kind=None) -> Operator:
    """The rejected first guesses: |0⟩⟨1| (fermionic), Σ|n,0⟩⟨n+1,1| (susy)."""
    kind = _resolve_kind(basis, kind)
    if kind is Kind.BOSONIC:
        return exponential_phase_op(basis, kind)
    lf = mode_label(basis, ModeKind.FERMIONIC)
    lower = embed(basis, lf, np.array([[0, 1], [0, 0]], dtype=complex))
    if kind is Kind.FERMIONIC:
        return lower
    lb = mode_label(basis, ModeKind.BOSONIC)
    return embed(basis, lb, _bosonic_shift(basis.mode(lb).dim)) @ lower


def eigen_residual(op: Operator, angle: AngleState, eigenvalue: complex) -> float:
    """‖op|θ⟩ − λ|θ⟩‖ / ‖|θ⟩‖."""
    v = angle.state
    return float(np.linalg.norm(op.matrix @ v.amplitudes - eigenvalue * v.amplitudes) / v.norm())


@dataclass(frozen=True, eq=False)
class PhaseDistribution:
    grid: AngleGrid
    density: np.ndarray
    kind: Kind

    def total(self) -> float:
        return angle_quadrature(self.density, self.grid).real

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("theta,density\n")
        for t, p in zip(self.grid.nodes, self.density):
            buf.write(f"{t:.17g},{p:.17g}\n")
        return buf.getvalue()


def _check_normalized(psi: StateVector):
    if abs(psi.norm() - 1) > NORM_TOL:
        raise DomainError(f"state must be normalized within {NORM_TOL:g}, norm is {psi.norm()!r}")


def phase_distribution(psi: StateVector, kind=None, grid: AngleGrid = None) -> PhaseDistribution:
    """Pr(θ) = |⟨θ|ψ⟩|² sampled on the grid.

    The supersymmetric density is taken as (1/2π)|Σ c_{n_B,n_F} e^{-i(n_B+n_F)θ}|²,
    i.e. 4π|⟨θ|ψ⟩|² with the 1/(2^{3/2}π) angle state, so that its integral is
    1 + 2·constraint_residual(ψ).
    """
    kind = _resolve_kind(psi.basis, kind)
    _check_normalized(psi)
    if grid is None:
        grid = AngleGrid(4 * (int(_total_excitation(psi.basis).max()) + 2))
    rows = _angle_matrix(psi.basis, kind, grid)
    overlaps = rows.conj() @ psi.amplitudes
    density = np.abs(overlaps) ** 2
    if kind is Kind.SUSY:
        density = density * (4 * math.pi)
    return PhaseDistribution(grid, density, kind)


def product_phase_distribution(psi_b: StateVector, psi_f: StateVector, grid: AngleGrid = None):
    """Joint density Pr_B(θ₁)·Pr_F(θ₂) of independent bosonic and fermionic phase readings.

    Returns ``(grid, density)`` with ``density[i, j]`` at ``(θ_i, θ_j)``.
    """
    pb = phase_distribution(psi_b, Kind.BOSONIC, grid)
    pf = phase_distribution(psi_f, Kind.FERMIONIC, pb.grid)
    return pb.grid, np.outer(pb.density, pf.density)


def constraint_residual(psi: StateVector) -> float:
    """Σ_n Re[c_{n,1} conj(c_{n+1,0})]; zero exactly on H_constraint."""
    if psi.basis.doubled or infer_kind(psi.basis) is not Kind.SUSY:
        raise ConfigurationError("constraint residual is defined on the undoubled susy basis")
    _check_normalized(psi)
    basis = psi.basis
    ib = basis.position(mode_label(basis, ModeKind.BOSONIC))
    top = basis.dims[ib] - 1
    total = 0.0
    for n in range(top):
        occ_1 = [0, 0]
        occ_0 = [0, 0]
        occ_1[ib], occ_1[1 - ib] = n, 1
        occ_0[ib], occ_0[1 - ib] = n + 1, 0
        total += (psi.amplitude(occ_1) * np.conj(psi.amplitude(occ_0))).real
    return float(total)


@dataclass(frozen=True)
class FermionicPhaseCoefficients:
    c00: complex
    c01: complex
    c10: complex
    c11: complex

    def matrix(self) -> np.ndarray:
        return np.array([[self.c00, self.c01], [self.c10, self.c11]], dtype=complex)


def unitarity_residuals(c: FermionicPhaseCoefficients) -> np.ndarray:
    """The eight unitarity equations, each written as ``lhs − rhs``."""
    c00, c01, c10, c11 = c.c00, c.c01, c.c10, c.c11
    conj = np.conj
    return np.array([
        abs(c00) ** 2 + abs(c10) ** 2 - 1,
        abs(c01) ** 2 + abs(c11) ** 2 - 1,
        conj(c00) * c01 + conj(c10) * c11,
        c00 * conj(c01) + c10 * conj(c11),
        abs(c00) ** 2 + abs(c01) ** 2 - 1,
        abs(c10) ** 2 + abs(c11) ** 2 - 1,
        c00 * conj(c10) + c01 * conj(c11),
        conj(c00) * c10 + c11 * conj(c01),
    ], dtype=complex)


def eigen_condition_residuals(c: FermionicPhaseCoefficients, theta: float) -> np.ndarray:
    """Residuals of  c00 + c01 e^{iθ} = e^{iθ}  and  c10 + c11 e^{iθ} = e^{2iθ}."""
    e = np.exp(1j * theta)
    return np.array([c.c00 + c.c01 * e - e, c.c10 + c.c11 * e - e * e])


def fermionic_coefficient_residual(
    coeffs: Union[FermionicPhaseCoefficients, Callable[[float], FermionicPhaseCoefficients]],
    grid: AngleGrid,
):
    """Worst eigen-condition and unitarity violations over the grid.

    ``coeffs`` may be a fixed set or a function of θ returning one.
    Returns ``(cond_residual, unit_residual)``.
    """
    cond = unit = 0.0
    for t in grid.nodes:
        c = coeffs(t) if callable(coeffs) else coeffs
        cond = max(cond, float(np.abs(eigen_condition_residuals(c, t)).sum()))
        unit = max(unit, float(np.abs(unitarity_residuals(c)).max()))
    return cond, unit


def phase_matrix_coefficients(theta: float) -> FermionicPhaseCoefficients:
    """(c00, c01, c10, c11) = (0, 1, e^{iθ}, 1), the coefficients of the fermionic phase matrix E_F(θ)."""
    return FermionicPhaseCoefficients(0, 1, np.exp(1j * theta), 1)
