"""Thermofield dynamics on truncated oscillators.

The thermal vacuum lives on the doubled basis and is normalized against
the truncated partition sum, so it has unit norm exactly and reproduces
truncated canonical averages to rounding.  Comparisons with the infinite
closed forms carry the geometric tail x^{N+1}/(1-x), x = e^{-βω}.

Tilde operators are ordinary tensor factors and commute with every
physical operator, fermionic ones included.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DimensionError, DivergenceError, NumericError
from .hilbert import (Basis, ModeKind, Operator, StateVector, apply_on_factor, embed_product, expm_action,
                      matrix_exponential)
from .oscillators import Kind, _local_annihilator, basis_for, energies, infer_kind, mode_label, vacuum

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class ThermalParams:
    omega: float
    beta: float

    def __post_init__(self):
        if not self.omega > 0 or not math.isfinite(self.omega):
            raise ConfigurationError(f"omega must be a positive finite number, got {self.omega!r}")
        if math.isnan(self.beta) or self.beta < 0:
            raise ConfigurationError(f"beta must lie in [0, inf], got {self.beta!r}")

    @property
    def x(self) -> float:
        """Boltzmann ratio e^{-βω}; 0 at zero temperature, 1 at β = 0."""
        return math.exp(-self.beta * self.omega)

    @property
    def half(self) -> float:
        return math.exp(-self.beta * self.omega / 2)

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)


@dataclass(frozen=True)
class BogoliubovParams:
    phi_B: float
    phi_F: float


def bogoliubov_params(tp: ThermalParams, check_tol: float = 1e-12) -> BogoliubovParams:
    """tanh φ_B = tan φ_F = e^{-βω/2}."""
    if tp.beta == 0:
        raise DivergenceError("phi_B diverges at beta = 0 (infinite squeezing)")
    h, x = tp.half, tp.x
    bp = BogoliubovParams(math.atanh(h), math.atan(h))
    checks = (
        (math.cosh(bp.phi_B), 1 / math.sqrt(1 - x)),
        (math.sinh(bp.phi_B), h / math.sqrt(1 - x)),
        (math.cos(bp.phi_F), 1 / math.sqrt(1 + x)),
        (math.sin(bp.phi_F), h / math.sqrt(1 + x)),
    )
    for got, want in checks:
        if abs(got - want) > check_tol * max(1.0, abs(want)):
            raise NumericError(f"Bogoliubov parameter check failed: {got!r} vs {want!r}")
    return bp


def adaptive_cutoff(x: float, tol: float = DEFAULT_TOL, minimum: int = 1) -> int:
    """Smallest N with x^{N+1}/(1-x) ≤ tol, i.e. ceil(log(tol(1-x))/log x)."""
    if x >= 1:
        raise DivergenceError("no finite cutoff captures the bosonic tail at beta = 0")
    if x <= 0:
        return minimum
    n = math.ceil(math.log(tol * (1 - x)) / math.log(x))
    return max(minimum, n)


def tail_bound(x: float, cutoff: int) -> float:
    """Geometric tail Σ_{n>N} x^n = x^{N+1}/(1-x)."""
    if x >= 1:
        return math.inf
    return x ** (cutoff + 1) / (1 - x)


def _boltzmann(e: np.ndarray, tp: ThermalParams) -> np.ndarray:
    if tp.zero_temperature:
        return (e == e.min()).astype(float)
    return np.exp(-tp.beta * (e - e.min()))


def thermal_vacuum(basis: Basis, tp: ThermalParams) -> StateVector:
    """Σ_n √(e^{-βE_n}/Z_trunc) |n, ñ⟩ with real positive coefficients."""
    if not basis.doubled:
        raise ConfigurationError("the thermal vacuum lives on a doubled basis")
    w = _boltzmann(energies(basis, tp.omega), tp)
    coeff = np.sqrt(w / w.sum())
    d = basis.factor_dim
    mat = np.zeros((d, d), dtype=complex)
    mat[np.arange(d), np.arange(d)] = coeff
    return StateVector(basis, mat.reshape(-1))


def canonical_average(op: Operator, tp: ThermalParams) -> complex:
    """tr(e^{-βH} A) / tr(e^{-βH}) over the truncated space."""
    if op.basis.doubled:
        raise ConfigurationError("canonical averages take operators on the undoubled space")
    w = _boltzmann(energies(op.basis, tp.omega), tp)
    return complex(np.dot(w, np.diag(op.matrix)) / w.sum())


def doubled_vacuum_expectation(op: Operator, tp: ThermalParams, vac: StateVector = None) -> complex:
    """⟨0;β| A ⊗ 1̃ |0;β⟩."""
    if vac is None:
        vac = thermal_vacuum(Basis(op.basis.modes, True), tp)
    elif vac.basis.base != op.basis:
        raise DimensionError("vacuum and operator live on different spaces")
    return vac.inner(apply_on_factor(op, vac))


def _pair_generator(basis: Basis, label: str, phi: float) -> Operator:
    local = _local_annihilator(basis.mode(label))
    x = embed_product(basis, {label: local, label + "~": local})  # ã a
    return -1j * phi * (x - x.adjoint())


def _phis(kind: Kind, bp: BogoliubovParams) -> dict:
    phis = {}
    if kind in (Kind.BOSONIC, Kind.SUSY):
        phis[ModeKind.BOSONIC] = bp.phi_B
    if kind in (Kind.FERMIONIC, Kind.SUSY):
        phis[ModeKind.FERMIONIC] = bp.phi_F
    return phis


def bogoliubov_generator(basis: Basis, kind, bp: BogoliubovParams) -> Operator:
    """G = -iφ_B(ã_B a_B - a_B† ã_B†) - iφ_F(ã_F a_F - a_F† ã_F†)."""
    if not basis.doubled:
        raise ConfigurationError("the Bogoliubov generator acts on a doubled basis")
    kind = Kind(kind)
    if infer_kind(basis) is not kind:
        raise ConfigurationError(f"basis {basis.labels} does not hold a {kind.value} oscillator")
    g = Operator.zeros(basis)
    for mk, phi in _phis(kind, bp).items():
        g = g + _pair_generator(basis, mode_label(basis, mk), phi)
    return g


def bogoliubov_unitary(basis: Basis, kind, bp: BogoliubovParams) -> Operator:
    return matrix_exponential(-1j * bogoliubov_generator(basis, kind, bp))


def bogoliubov_vacuum(basis: Basis, kind, bp: BogoliubovParams) -> StateVector:
    """exp(-iG)|0, 0̃⟩.

    G is a sum of commuting pieces, one per (mode, tilde mode) pair, so the
    exponential factorizes; each pair's action on its vacuum is computed
    separately and the results are tensored back into basis order.  This
    keeps the work at the size of a single doubled mode.
    """
    kind = Kind(kind)
    if not basis.doubled:
        raise ConfigurationError("the Bogoliubov vacuum lives on a doubled basis")
    if infer_kind(basis) is not kind:
        raise ConfigurationError(f"basis {basis.labels} does not hold a {kind.value} oscillator")
    phis = _phis(kind, bp)
    factors = []
    for mode in basis.modes:
        pair = Basis((mode,), True)
        g = _pair_generator(pair, mode.label, phis[mode.kind])
        v = expm_action(-1j * g, vacuum(pair))
        factors.append(v.amplitudes.reshape(mode.dim, mode.dim))
    k = len(factors)
    # outer product over pairs, axes ordered (n_1..n_k, ñ_1..ñ_k)
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    order = [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)]
    out = np.transpose(out, order) if k > 1 else out
    return StateVector(basis, out.reshape(-1))


class ClosedVsTruncated(NamedTuple):
    closed: float
    truncated: float
    difference: float
    tail_bound: float


def partition_function(tp: ThermalParams, kind=Kind.SUSY, cutoff=None, tol: float = DEFAULT_TOL) -> ClosedVsTruncated:
    """Closed-form and truncated partition sums with their difference."""
    kind = Kind(kind)
    x = tp.x
    needs_boson = kind is not Kind.FERMIONIC
    if needs_boson and tp.beta == 0:
        raise DivergenceError("the bosonic partition function diverges at beta = 0")
    if cutoff is None or cutoff == "auto":
        cutoff = adaptive_cutoff(x, tol) if needs_boson else 1
    e = energies(basis_for(kind, cutoff), tp.omega)
    truncated = float(np.exp(-tp.beta * e).sum()) if not tp.zero_temperature else float((e == 0).sum())
    if kind is Kind.BOSONIC:
        closed, bound = 1 / (1 - x), tail_bound(x, cutoff)
    elif kind is Kind.FERMIONIC:
        closed, bound = 1 + x, 0.0
    else:
        closed, bound = (1 + x) / (1 - x), tail_bound(x, cutoff) * (1 + x)
    return ClosedVsTruncated(closed, truncated, closed - truncated, bound)


def internal_energy(tp: ThermalParams, cutoff=None, tol: float = DEFAULT_TOL) -> ClosedVsTruncated:
    """U = ω(sinh²φ_B + sin²φ_F) against ⟨0;β|H⊗1̃|0;β⟩ on the truncated susy space."""
    if tp.beta == 0:
        raise DivergenceError("the internal energy diverges at beta = 0")
    x = tp.x
    if cutoff is None or cutoff == "auto":
        cutoff = adaptive_cutoff(x, tol)
    bp = bogoliubov_params(tp)
    closed = tp.omega * (math.sinh(bp.phi_B) ** 2 + math.sin(bp.phi_F) ** 2)
    nb, nf = occupations(tp, cutoff)
    truncated = tp.omega * (nb + nf)
    # the bosonic law is the only truncated factor; its mean is short by at most
    # x^{N+1} (N+1 + x/(1-x))
    bound = tp.omega * x ** (cutoff + 1) * (cutoff + 1 + x / (1 - x))
    return ClosedVsTruncated(closed, truncated, closed - truncated, bound)


def vacuum_probabilities(basis: Basis, tp: ThermalParams) -> np.ndarray:
    """|c_n|² of the thermal vacuum, indexed like the physical basis."""
    w = _boltzmann(energies(basis, tp.omega), tp)
    return w / w.sum()


def occupations(tp: ThermalParams, cutoff: int) -> tuple:
    """(⟨N_B⟩, ⟨N_F⟩) in the thermal vacuum of the truncated susy space.

    The vacuum's factor matrix is diag(c), so for a diagonal A,
    ⟨0;β|A⊗1̃|0;β⟩ = Σ_n |c_n|² A_nn; this is evaluated directly rather than
    through doubled-space matrices, keeping sweeps linear in the cutoff.
    """
    basis = basis_for(Kind.SUSY, cutoff)
    p = vacuum_probabilities(basis, tp)
    occ = basis.occupations
    nb = float(np.dot(p, occ[:, basis.position("b")]))
    nf = float(np.dot(p, occ[:, basis.position("f")]))
    return nb, nf


SWEEP_COLUMNS = ("beta", "x", "phi_B", "phi_F", "N_B", "N_F", "Z_closed", "Z_trunc", "U_internal")
DIVERGENT = "divergent"


def sweep_row(tp: ThermalParams, cutoff=None, tol: float = DEFAULT_TOL) -> dict:
    """One thermal-sweep record; divergent quantities at β = 0 are marked, not dropped."""
    x = tp.x
    if tp.beta == 0:
        return {
            "beta": tp.beta, "x": x, "phi_B": DIVERGENT, "phi_F": math.atan(1.0),
            "N_B": DIVERGENT, "N_F": 0.5, "Z_closed": DIVERGENT, "Z_trunc": DIVERGENT,
            "U_internal": DIVERGENT,
        }
    if cutoff is None or cutoff == "auto":
        cutoff = adaptive_cutoff(x, tol)
    bp = bogoliubov_params(tp)
    nb, nf = occupations(tp, cutoff)
    z = partition_function(tp, Kind.SUSY, cutoff)
    return {
        "beta": tp.beta, "x": x, "phi_B": bp.phi_B, "phi_F": bp.phi_F,
        "N_B": nb, "N_F": nf, "Z_closed": z.closed, "Z_trunc": z.truncated,
        "U_internal": tp.omega * (nb + nf),
    }
