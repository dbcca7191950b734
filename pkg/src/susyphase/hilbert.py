"""Finite-dimensional Hilbert-space kernel.

Bases are ordered tensor products of bosonic (truncated) and fermionic
modes, optionally thermofield-doubled.  States and operators are dense
complex arrays tied to a basis.  Indices are row-major over the modes in
declaration order; in a doubled basis the tilde copies follow the
originals, so a doubled state vector reshapes to a ``(d, d)`` matrix whose
rows index the physical factor and whose columns index the tilde factor.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import ConfigurationError, DimensionError, DomainError, NumericError

TILDE = "~"


class ModeKind(str, enum.Enum):
    BOSONIC = "bosonic"
    FERMIONIC = "fermionic"


@dataclass(frozen=True)
class ModeSpec:
    """One oscillator mode.

    Parameters
    ----------
    kind : ModeKind
        Statistics of the mode.
    label : str
        Identifier used to address the mode's ladder operators.
    cutoff : int
        Largest retained occupation of a bosonic mode (ignored for
        fermions, whose occupation is 0 or 1).
    """

    kind: ModeKind
    label: str
    cutoff: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if self.kind is ModeKind.FERMIONIC:
            object.__setattr__(self, "cutoff", 1)
        elif int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ConfigurationError(f"bosonic cutoff must be a nonnegative integer, got {self.cutoff!r}")
        if not self.label or TILDE in self.label:
            raise ConfigurationError(f"invalid mode label {self.label!r}")

    @classmethod
    def bosonic(cls, cutoff, label="b"):
        return cls(ModeKind.BOSONIC, label, int(cutoff))

    @classmethod
    def fermionic(cls, label="f"):
        return cls(ModeKind.FERMIONIC, label)

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def tilde(self) -> "ModeSpec":
        # bypasses the label check on purpose: tilde labels are reserved
        copy = object.__new__(ModeSpec)
        object.__setattr__(copy, "kind", self.kind)
        object.__setattr__(copy, "label", self.label + TILDE)
        object.__setattr__(copy, "cutoff", self.cutoff)
        return copy


@dataclass(frozen=True)
class Basis:
    """Ordered tensor-product basis of occupation-number states."""

    modes: tuple
    doubled: bool = False

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ConfigurationError("a basis needs at least one mode")
        labels = [m.label for m in modes]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate mode labels in {labels}")
        object.__setattr__(self, "modes", modes)

    @cached_property
    def all_modes(self) -> tuple:
        if self.doubled:
            return self.modes + tuple(m.tilde() for m in self.modes)
        return self.modes

    @cached_property
    def dims(self) -> tuple:
        return tuple(m.dim for m in self.all_modes)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def factor_dim(self) -> int:
        """Dimension of the physical (non-tilde) factor."""
        return math.prod(m.dim for m in self.modes)

    @cached_property
    def base(self) -> "Basis":
        """The undoubled basis over the same physical modes."""
        return Basis(self.modes, False) if self.doubled else self

    def position(self, label: str) -> int:
        for i, m in enumerate(self.all_modes):
            if m.label == label:
                return i
        raise ConfigurationError(f"no mode labelled {label!r} in basis {self.labels}")

    @property
    def labels(self) -> list:
        return [m.label for m in self.all_modes]

    def mode(self, label: str) -> ModeSpec:
        return self.all_modes[self.position(label)]

    def modes_of_kind(self, kind) -> list:
        kind = ModeKind(kind)
        return [m for m in self.modes if m.kind is kind]

    def index_of(self, occupation) -> int:
        occ = tuple(int(n) for n in np.atleast_1d(occupation))
        if len(occ) != len(self.dims):
            raise DomainError(f"occupation {occ} does not match {len(self.dims)} modes")
        for n, d in zip(occ, self.dims):
            if not 0 <= n < d:
                raise DomainError(f"occupation {occ} out of range for dims {self.dims}")
        return int(np.ravel_multi_index(occ, self.dims))

    def occupation_of(self, index: int) -> tuple:
        if not 0 <= index < self.dim:
            raise DomainError(f"index {index} out of range for dimension {self.dim}")
        return tuple(int(n) for n in np.unravel_index(index, self.dims))

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, n_modes)`` integer table; row i is ``occupation_of(i)``."""
        grids = np.indices(self.dims).reshape(len(self.dims), -1)
        return grids.T.copy()

    def to_dict(self) -> dict:
        return {
            "modes": [{"kind": m.kind.value, "label": m.label, "cutoff": m.cutoff} for m in self.modes],
            "doubled": self.doubled,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Basis":
        modes = [ModeSpec(ModeKind(m["kind"]), m["label"], m.get("cutoff", 1)) for m in data["modes"]]
        return cls(tuple(modes), bool(data.get("doubled", False)))


def make_basis(modes: Sequence[ModeSpec], doubled: bool = False) -> Basis:
    return Basis(tuple(modes), doubled)


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{what} has non-finite entries")


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: Basis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise DimensionError(f"amplitudes of shape {amps.shape} on a basis of dimension {self.basis.dim}")
        _check_finite(amps, "state")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0:
            raise DomainError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>."""
        _same_basis(self.basis, other.basis)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def amplitude(self, occupation) -> complex:
        return complex(self.amplitudes[self.basis.index_of(occupation)])

    def as_factor_matrix(self) -> np.ndarray:
        """Reshape a doubled-basis vector to (physical, tilde) matrix form."""
        if not self.basis.doubled:
            raise ConfigurationError("factor matrix form needs a doubled basis")
        d = self.basis.factor_dim
        return self.amplitudes.reshape(d, d)

    def __add__(self, other):
        _same_basis(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other):
        _same_basis(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes - other.amplitudes)

    def __mul__(self, c):
        return StateVector(self.basis, self.amplitudes * c)

    __rmul__ = __mul__

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


def _same_basis(a: Basis, b: Basis):
    if a != b:
        raise DimensionError(f"basis mismatch: {a.labels} (dim {a.dim}) vs {b.labels} (dim {b.dim})")


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix acting on a basis."""

    basis: Basis
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        d = self.basis.dim
        if mat.shape != (d, d):
            raise DimensionError(f"matrix of shape {mat.shape} on a basis of dimension {d}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, basis: Basis) -> "Operator":
        return cls(basis, np.eye(basis.dim, dtype=complex))

    @classmethod
    def zeros(cls, basis: Basis) -> "Operator":
        return cls(basis, np.zeros((basis.dim, basis.dim), dtype=complex))

    def adjoint(self) -> "Operator":
        return Operator(self.basis, self.matrix.conj().T)

    @property
    def dag(self) -> "Operator":
        return self.adjoint()

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def norm(self, ord=2) -> float:
        return float(np.linalg.norm(self.matrix, ord))

    def expectation(self, psi: StateVector) -> complex:
        _same_basis(self.basis, psi.basis)
        return complex(np.vdot(psi.amplitudes, self.matrix @ psi.amplitudes))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _same_basis(self.basis, other.basis)
            return Operator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            _same_basis(self.basis, other.basis)
            return StateVector(self.basis, self.matrix @ other.amplitudes)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _same_basis(self.basis, other.basis)
        return Operator(self.basis, self.matrix - other.matrix)

    def __mul__(self, c):
        if isinstance(c, (Operator, StateVector)):
            return NotImplemented
        return Operator(self.basis, self.matrix * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Operator(self.basis, self.matrix / c)

    def __neg__(self):
        return Operator(self.basis, -self.matrix)

    def to_json(self) -> str:
        return operator_to_json(self)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a


def anticommutator(a: Operator, b: Operator) -> Operator:
    return a @ b + b @ a


def embed(basis: Basis, label: str, local: np.ndarray) -> Operator:
    """Lift a single-mode matrix to ``basis``, identity on every other mode.

    Tilde copies are ordinary tensor factors, so operators on different
    modes commute regardless of statistics.
    """
    pos = basis.position(label)
    local = np.asarray(local, dtype=complex)
    if local.shape != (basis.dims[pos],) * 2:
        raise DimensionError(f"local matrix {local.shape} for mode {label!r} of dimension {basis.dims[pos]}")
    left = math.prod(basis.dims[:pos])
    right = math.prod(basis.dims[pos + 1:])
    mat = np.kron(np.kron(np.eye(left), local), np.eye(right))
    return Operator(basis, mat)


def embed_product(basis: Basis, locals_: dict) -> Operator:
    """Lift a product of single-mode matrices on distinct modes, identity elsewhere.

    Equivalent to multiplying the individual ``embed`` results, without the
    dense matrix products.
    """
    factors = []
    for label, dim in zip(basis.labels, basis.dims):
        local = locals_.get(label)
        if local is None:
            factors.append(np.eye(dim, dtype=complex))
            continue
        local = np.asarray(local, dtype=complex)
        if local.shape != (dim, dim):
            raise DimensionError(f"local matrix {local.shape} for mode {label!r} of dimension {dim}")
        factors.append(local)
    unknown = set(locals_) - set(basis.labels)
    if unknown:
        raise ConfigurationError(f"unknown mode labels {sorted(unknown)}")
    mat = factors[0]
    for f in factors[1:]:
        mat = np.kron(mat, f)
    return Operator(basis, mat)


def apply_on_factor(op: Operator, psi: StateVector) -> StateVector:
    """Act with ``op ⊗ 1̃`` on a doubled-basis state without forming the kron."""
    if psi.basis.base != op.basis or not psi.basis.doubled:
        raise DimensionError("operator must live on the physical factor of the state's doubled basis")
    out = op.matrix @ psi.as_factor_matrix()
    return StateVector(psi.basis, out.reshape(-1))


# -- matrix exponential --------------------------------------------------------
# Scaling and squaring with diagonal Pade approximants (Higham 2005).

_PADE_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE_B = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}


def _pade_uv(a, m):
    b = _PADE_B[m]
    ident = np.eye(a.shape[0], dtype=a.dtype)
    a2 = a @ a
    if m == 13:
        a4 = a2 @ a2
        a6 = a4 @ a2
        u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
                 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
        v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
             + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
        return u, v
    powers = [ident, a2]
    for _ in range(2, (m + 1) // 2):
        powers.append(powers[-1] @ a2)
    u = a @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
    v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
    return u, v


def _expm_dense(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    _check_finite(a, "matrix")
    if a.shape[0] == 0:
        return a.copy()
    norm1 = np.linalg.norm(a, 1)
    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _PADE_THETA[m]:
            break
    else:
        m = 13
        if norm1 > _PADE_THETA[13]:
            s = max(0, int(math.ceil(math.log2(norm1 / _PADE_THETA[13]))))
    u, v = _pade_uv(a / 2.0 ** s, m)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def matrix_exponential(a: Union[Operator, np.ndarray]):
    """exp(A) by scaling and squaring; returns the same type it was given."""
    if isinstance(a, Operator):
        return Operator(a.basis, _expm_dense(a.matrix))
    return _expm_dense(a)


def expm_action(a: Union[Operator, np.ndarray], v, tol: float = 1e-16):
    """exp(A) v without forming exp(A).

    Taylor series on ``s`` sub-steps with ``‖A‖₁/s ≤ 1``; each sub-step is
    summed until the next term is below ``tol`` relative to the iterate.
    """
    mat = a.matrix if isinstance(a, Operator) else np.asarray(a, dtype=complex)
    vec = v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=complex)
    _check_finite(mat, "matrix")
    norm1 = np.linalg.norm(mat, 1)
    steps = max(1, int(math.ceil(norm1)))
    scaled = mat / steps
    out = vec.astype(complex)
    for _ in range(steps):
        term = out
        acc = out.copy()
        k = 1
        while True:
            term = scaled @ term / k
            acc += term
            if np.linalg.norm(term) <= tol * np.linalg.norm(acc) or k > 200:
                break
            k += 1
        out = acc
    if isinstance(v, StateVector):
        return StateVector(v.basis, out)
    return out


# -- angle quadrature ----------------------------------------------------------

@dataclass(frozen=True)
class AngleGrid:
    """Uniform periodic grid on [0, 2π) with equal weights 2π/M."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ConfigurationError(f"angle grid needs a positive node count, got {self.size!r}")

    @property
    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.size

    @property
    def weight(self) -> float:
        return 2 * np.pi / self.size

    @classmethod
    def for_cutoff(cls, cutoff: int) -> "AngleGrid":
        return cls(4 * (int(cutoff) + 2))


def angle_quadrature(f: Union[Callable, Iterable], grid: AngleGrid) -> complex:
    """(2π/M) Σ_j f(θ_j).

    ``f`` is either a callable of θ or the sampled values at the nodes.
    Exact for trigonometric polynomials of degree < M.
    """
    if not isinstance(grid, AngleGrid):
        grid = AngleGrid(grid)
    if callable(f):
        values = np.array([f(t) for t in grid.nodes], dtype=complex)
    else:
        values = np.asarray(f, dtype=complex)
        if values.shape[0] != grid.size:
            raise DimensionError(f"{values.shape[0]} samples for a grid of {grid.size} nodes")
    return complex(grid.weight * values.sum(axis=0))


# -- fixture serialization -----------------------------------------------------

def operator_to_json(op: Operator) -> str:
    payload = {
        "basis": op.basis.to_dict(),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in op.matrix],
    }
    return json.dumps(payload)


def operator_from_json(text: str) -> Operator:
    payload = json.loads(text)
    basis = Basis.from_dict(payload["basis"])
    pairs = np.asarray(payload["matrix"], dtype=float)
    return Operator(basis, pairs[..., 0] + 1j * pairs[..., 1])


def state_to_json(psi: StateVector) -> str:
    return json.dumps({
        "basis": psi.basis.to_dict(),
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.amplitudes],
    })


def state_from_json(text: str) -> StateVector:
    payload = json.loads(text)
    pairs = np.asarray(payload["amplitudes"], dtype=float).reshape(-1, 2)
    return StateVector(Basis.from_dict(payload["basis"]), pairs[:, 0] + 1j * pairs[:, 1])
