"""Supersymmetry breaking at finite temperature.

Two evaluations of the thermal average of [Q, exp(iθ̂)] are kept side by
side.  ``numeric_full`` is the truncated trace of the whole commutator.
``restricted_sum`` keeps only the n_F = 0 diagonal family, the selection
behind the polylogarithm closed form.  The n_F = 1 family cancels it
exactly because [Q, H] = 0, so the two disagree at every finite β > 0;
``discrepancy_report`` tabulates that.
"""
from __future__ import annotations

import cmath
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .errors import DivergenceError, DomainError
from .hilbert import Basis, ModeKind
from .oscillators import energies, mode_label, susy_basis
from .thermal import ThermalParams, adaptive_cutoff

CONSISTENT = "CONSISTENT"
DISCREPANT = "DISCREPANT"


def polylog_neg_half_with_bound(x: float, tol: float = 1e-12):
    """Li_{-1/2}(x) = Σ_{k≥1} √k x^k and a certified bound on the omitted tail.

    After K terms the remainder is dominated by a geometric series with
    ratio r = x √((K+2)/(K+1)), giving tail ≤ √(K+1) x^{K+1} / (1 - r).
    Terms are summed with ``math.fsum``; each carries a few ulps of error
    from ``sqrt`` and ``pow``, which is added to the returned bound.  The
    series is continued until the tail is below both ``tol/2`` and the
    rounding level of the partial sum, so the value is as accurate as double
    precision allows.  Near x = 1 the rounding part dominates and the bound
    can exceed ``tol``.
    """
    if not 0 <= x:
        raise DomainError(f"polylog argument must be nonnegative, got {x!r}")
    if x >= 1:
        raise DivergenceError("Li_{-1/2}(x) diverges for x >= 1")
    if x == 0:
        return 0.0, 0.0
    eps = np.finfo(float).eps
    terms = []
    partial = 0.0
    k = 0
    while True:
        k += 1
        terms.append(math.sqrt(k) * x ** k)
        partial += terms[-1]
        r = x * math.sqrt((k + 2) / (k + 1))
        if r < 1:
            tail = math.sqrt(k + 1) * x ** (k + 1) / (1 - r)
            if tail < tol / 2 and tail < eps * partial:
                break
    total = math.fsum(terms)
    rounding = 4 * eps * total
    return total, tail + rounding


def polylog_neg_half(x: float, tol: float = 1e-12) -> float:
    return polylog_neg_half_with_bound(x, tol)[0]


def goldstone_closed_form(x: float, theta: float, tol: float = 1e-14) -> complex:
    """((1-x)/(1+x)) e^{iθ} Li_{-1/2}(x)."""
    return (1 - x) / (1 + x) * cmath.exp(1j * theta) * polylog_neg_half(x, tol)


# -- banded single-mode factors -------------------------------------------------
#
# Every operator in this module is x_B ⊗ x_F with banded single-mode factors, so
# diagonals of products and column norms follow from the bands alone.  That
# keeps the cost linear in the cutoff, which matters near x → 1 where the
# adaptive cutoff runs to tens of thousands of levels.  A band is stored as
# {offset k: d} with d[r] = M[r, r+k] (zero where r+k is out of range).

def _bands(m: np.ndarray) -> dict:
    dim = m.shape[0]
    out = {}
    for k in range(-dim + 1, dim):
        d = np.zeros(dim, dtype=complex)
        r = np.arange(max(0, -k), min(dim, dim - k))
        d[r] = m[r, r + k]
        if np.any(d):
            out[k] = d
    return out


def _bosonic_factors(cutoff: int) -> dict:
    dim = cutoff + 1
    root = np.zeros(dim, dtype=complex)
    root[:-1] = np.sqrt(np.arange(1, dim))
    lowered = np.zeros(dim, dtype=complex)
    lowered[1:] = root[:-1]
    shift = np.zeros(dim, dtype=complex)
    shift[:-1] = 1
    # a: M[r, r+1] = √(r+1);  a†: M[r, r-1] = √r;  E_B: M[r, r+1] = 1
    return {"a": {1: root}, "ad": {-1: lowered}, "E": {1: shift}}


def _fermionic_factors(theta: float) -> dict:
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    e = np.array([[0, 1], [np.exp(1j * theta), 1]], dtype=complex)
    return {"a": _bands(a), "ad": _bands(a.T), "E": _bands(e)}


def _diag_of_product(a: dict, b: dict, dim: int) -> np.ndarray:
    """diag(AB)[r] = Σ_k A[r, r+k] B[r+k, r]."""
    out = np.zeros(dim, dtype=complex)
    r = np.arange(dim)
    for k, ak in a.items():
        bk = b.get(-k)
        if bk is None:
            continue
        ok = (r + k >= 0) & (r + k < dim)
        out[ok] += ak[ok] * bk[r[ok] + k]
    return out


def _column_norms_sq(a: dict, dim: int) -> np.ndarray:
    """Σ_r |A[r, c]|² for each column c."""
    out = np.zeros(dim)
    c = np.arange(dim)
    for k, ak in a.items():
        ok = (c - k >= 0) & (c - k < dim)
        out[ok] += np.abs(ak[c[ok] - k]) ** 2
    return out


def _weights(basis: Basis, tp: ThermalParams) -> np.ndarray:
    e = energies(basis, tp.omega)
    if tp.zero_temperature:
        return (e == 0).astype(float)
    return np.exp(-tp.beta * e)


def _vacuum_norms(cutoff: int, tp: ThermalParams):
    """‖(Q ⊗ 1̃)|0;β⟩‖ and ‖(Q̄ ⊗ 1̃)|0;β⟩‖.

    The thermal vacuum's factor matrix is diag(c), so the norm of
    (X ⊗ 1̃)|0;β⟩ is the Frobenius norm of X·diag(c), i.e.
    √(Σ_j c_j² ‖X e_j‖²); column norms of x_B ⊗ x_F are Kronecker products.
    """
    w = _weights(susy_basis(cutoff), tp)
    c2 = w / w.sum()
    dim = cutoff + 1
    bos, fer = _bosonic_factors(cutoff), _fermionic_factors(0.0)
    q = np.kron(_column_norms_sq(bos["ad"], dim), _column_norms_sq(fer["a"], 2))
    qbar = np.kron(_column_norms_sq(bos["a"], dim), _column_norms_sq(fer["ad"], 2))
    return math.sqrt(float(np.dot(c2, q))), math.sqrt(float(np.dot(c2, qbar)))


def supercharge_vacuum_action(tp: ThermalParams, cutoff=None, tol: float = 1e-13):
    """(‖Q|0;β⟩‖, ‖Q̄|0;β⟩‖) with the supercharges on the physical factor."""
    if tp.beta == 0:
        raise DivergenceError("the thermal vacuum is not normalizable at beta = 0")
    if cutoff is None or cutoff == "auto":
        cutoff = adaptive_cutoff(tp.x, tol)
    return _vacuum_norms(cutoff, tp)


def supercharge_norms_closed_form(tp: ThermalParams):
    """(cosh φ_B sin φ_F, sinh φ_B cos φ_F), both √(x/(1-x²))."""
    x, h = tp.x, tp.half
    return h / math.sqrt((1 - x) * (1 + x)), h / math.sqrt((1 - x) * (1 + x))


@dataclass(frozen=True)
class GoldstonePoint:
    beta: float
    theta: float
    numeric_full: complex
    restricted_sum: complex
    closed_form: complex
    q_vacuum_norm: float
    qbar_vacuum_norm: float
    numeric_full_bar: complex = 0j
    restricted_sum_bar: complex = 0j
    closed_form_bar: complex = 0j
    cutoff: int = 0
    tail_bound: float = 0.0
    flag: str = ""

    def to_record(self) -> dict:
        rec = asdict(self)
        for key, val in rec.items():
            if isinstance(val, complex):
                rec[key] = [val.real, val.imag]
        return rec


def _commutator_diagonal(x: str, theta: float, cutoff: int) -> np.ndarray:
    """diag([X, E(θ)]) on the susy basis for X = Q ("q") or Q̄ ("qbar")."""
    dim = cutoff + 1
    bos, fer = _bosonic_factors(cutoff), _fermionic_factors(theta)
    xb, xf = ("ad", "a") if x == "q" else ("a", "ad")
    xe = np.kron(_diag_of_product(bos[xb], bos["E"], dim), _diag_of_product(fer[xf], fer["E"], 2))
    ex = np.kron(_diag_of_product(bos["E"], bos[xb], dim), _diag_of_product(fer["E"], fer[xf], 2))
    return xe - ex


def commutator_diagonals(tp: ThermalParams, theta: float, cutoff: int):
    """Boltzmann-weighted diagonal families of [Q, E(θ)] and of [Q̄, E(θ)].

    Returns a dict with the n_F = 0 and n_F = 1 sums of the [Q, E] diagonal,
    the full weighted traces of both commutators, and Z_trunc.
    """
    basis = susy_basis(cutoff)
    w = _weights(basis, tp)
    nf = basis.occupations[:, basis.position(mode_label(basis, ModeKind.FERMIONIC))]
    diag = _commutator_diagonal("q", theta, cutoff)
    diag_bar = _commutator_diagonal("qbar", theta, cutoff)
    return {
        "nf0": complex(np.sum(w[nf == 0] * diag[nf == 0])),
        "nf1": complex(np.sum(w[nf == 1] * diag[nf == 1])),
        "trace_q": complex(np.dot(w, diag)),
        "trace_qbar": complex(np.dot(w, diag_bar)),
        "z": float(w.sum()),
    }


def goldstone_tail_bound(x: float, cutoff: int) -> float:
    """Bound on |restricted_sum - closed_form| from stopping the sums at the cutoff.

    Both the numerator Σ√m x^m and Z lose terms beyond N; each omitted part is
    at most √(N+1) x^{N+1}/(1-r)², r = x√((N+2)/(N+1)), relative to Z ≥ 1.
    """
    if x == 0:
        return 0.0
    r = x * math.sqrt((cutoff + 2) / (cutoff + 1))
    if r >= 1:
        return math.inf
    lead = math.sqrt(cutoff + 1) * x ** (cutoff + 1) / (1 - r) ** 2
    li = polylog_neg_half(x)
    return lead + li * 2 * x ** (cutoff + 1) / (1 - x)


def goldstone_expectation(tp: ThermalParams, theta: float, cutoff=None, tol: float = 1e-13,
                          flag_tol: float = 1e-6) -> GoldstonePoint:
    if tp.beta == 0:
        raise DivergenceError("Li_{-1/2}(e^{-βω}) diverges at beta = 0; the closed form grows without bound as beta -> 0")
    x = tp.x
    if cutoff is None or cutoff == "auto":
        cutoff = adaptive_cutoff(x, tol)
    d = commutator_diagonals(tp, theta, cutoff)
    z = d["z"]
    restricted = d["nf0"] / z
    closed = goldstone_closed_form(x, theta)
    numeric = d["trace_q"] / z
    qn, qbn = _vacuum_norms(cutoff, tp)
    flag = DISCREPANT if abs(numeric - closed) > flag_tol else CONSISTENT
    return GoldstonePoint(
        beta=tp.beta, theta=theta,
        numeric_full=numeric, restricted_sum=restricted, closed_form=closed,
        q_vacuum_norm=qn, qbar_vacuum_norm=qbn,
        # the Q̄ display's matrix elements are the n_F = 1 family of [Q, E]
        numeric_full_bar=d["trace_qbar"] / z,
        restricted_sum_bar=d["nf1"] / z,
        closed_form_bar=-closed,
        cutoff=cutoff, tail_bound=goldstone_tail_bound(x, cutoff), flag=flag,
    )


def discrepancy_report(betas: Iterable[float], theta: float, omega: float = 1.0, cutoff=None,
                       tol: float = 1e-13, flag_tol: float = 1e-6) -> list:
    return [goldstone_expectation(ThermalParams(omega, b), theta, cutoff, tol, flag_tol) for b in betas]


REPORT_COLUMNS = (
    "beta", "theta", "cutoff", "tail_bound",
    "numeric_full_re", "numeric_full_im", "restricted_sum_re", "restricted_sum_im",
    "closed_form_re", "closed_form_im", "numeric_full_bar_re", "numeric_full_bar_im",
    "restricted_sum_bar_re", "restricted_sum_bar_im", "closed_form_bar_re", "closed_form_bar_im",
    "q_vacuum_norm", "qbar_vacuum_norm", "flag",
)


def report_to_json(points) -> str:
    return json.dumps([p.to_record() for p in points], indent=1)


def report_to_csv(points) -> str:
    buf = io.StringIO()
    buf.write(",".join(REPORT_COLUMNS) + "\n")
    for p in points:
        row = []
        for col in REPORT_COLUMNS:
            if col.endswith("_re") or col.endswith("_im"):
                val = getattr(p, col[:-3])
                val = val.real if col.endswith("_re") else val.imag
            else:
                val = getattr(p, col)
            row.append(val if isinstance(val, str) else f"{val:.17g}")
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
