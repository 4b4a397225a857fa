"""Dense states and sparse operators on tensor products of group-labelled qudits.

Basis states ``|g_1, ..., g_n>`` are indexed big-endian in radix ``d``: qudit 1 is the
most significant digit. Sites passed to :func:`embed` are 1-based.
"""
from __future__ import annotations

import math
from itertools import product
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .group import S3, FiniteGroup

__all__ = ['PRUNE_TOL', 'QuditError', 'StateVector', 'LinearOperator', 'basis_index', 'basis_tuple',
           'single_qudit_operator', 'embed', 'compose', 'adjoint', 'add', 'scale', 'apply', 'inner',
           'tensor']

PRUNE_TOL = 1e-14
DEFAULT_TOL = 1e-10

_KIND_ALIASES = {
    'L+': 'L+', 'Lplus': 'L+', 'L-': 'L-', 'Lminus': 'L-',
    'T+': 'T+', 'Tplus': 'T+', 'T-': 'T-', 'Tminus': 'T-',
}


class QuditError(ValueError):
    """Dimension mismatch, bad site list or out-of-range basis index."""


def basis_index(labels: Sequence, dim: int = 6) -> int:
    """Big-endian radix-``dim`` index of a tuple of element indices (or S3 names)."""
    idx = 0
    for g in labels:
        g = S3.element(g) if isinstance(g, str) else int(g)
        if not 0 <= g < dim:
            raise QuditError(f"label {g} out of range for qudit dimension {dim}")
        idx = idx * dim + g
    return idx


def basis_tuple(index: int, n: int, dim: int = 6) -> tuple[int, ...]:
    if not 0 <= index < dim ** n:
        raise QuditError(f"basis index {index} out of range for {n} qudits of dimension {dim}")
    out = []
    for _ in range(n):
        index, r = divmod(index, dim)
        out.append(r)
    return tuple(reversed(out))


def _prune(m: sp.spmatrix) -> sp.csr_matrix:
    m = sp.csr_matrix(m, dtype=complex)
    if m.nnz:
        m.data[np.abs(m.data) < PRUNE_TOL] = 0
        m.eliminate_zeros()
    m.sort_indices()
    return m


class StateVector:
    """Dense complex amplitudes over the ``dim**num_qudits`` product basis."""

    __slots__ = ('amplitudes', 'num_qudits', 'dim')

    def __init__(self, amplitudes, num_qudits: int, dim: int = 6):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.size != dim ** num_qudits:
            raise QuditError(f"expected {dim ** num_qudits} amplitudes for {num_qudits} qudits, got {amps.size}")
        amps.setflags(write=False)
        self.amplitudes = amps
        self.num_qudits = num_qudits
        self.dim = dim

    @classmethod
    def basis(cls, labels: Sequence, dim: int = 6) -> StateVector:
        amps = np.zeros(dim ** len(labels), dtype=complex)
        amps[basis_index(labels, dim)] = 1
        return cls(amps, len(labels), dim)

    @classmethod
    def uniform(cls, num_qudits: int, dim: int = 6) -> StateVector:
        size = dim ** num_qudits
        return cls(np.full(size, 1 / math.sqrt(size), dtype=complex), num_qudits, dim)

    def __len__(self):
        return self.amplitudes.size

    def __repr__(self):
        return f"StateVector(num_qudits={self.num_qudits}, norm={self.norm():.6g})"

    def _check(self, other: StateVector):
        if not isinstance(other, StateVector):
            return NotImplemented
        if (self.num_qudits, self.dim) != (other.num_qudits, other.dim):
            raise QuditError("state dimension mismatch")

    def __add__(self, other):
        self._check(other)
        return StateVector(self.amplitudes + other.amplitudes, self.num_qudits, self.dim)

    def __sub__(self, other):
        self._check(other)
        return StateVector(self.amplitudes - other.amplitudes, self.num_qudits, self.dim)

    def __mul__(self, z):
        return StateVector(complex(z) * self.amplitudes, self.num_qudits, self.dim)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> StateVector:
        nrm = self.norm()
        if nrm == 0:
            raise QuditError("cannot normalize the zero vector")
        return self * (1 / nrm)

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() - 1) < tol

    def inner(self, other: StateVector) -> complex:
        return inner(self, other)

    def distance(self, other: StateVector) -> float:
        return (self - other).norm()

    def allclose(self, other: StateVector, tol: float = DEFAULT_TOL) -> bool:
        return self.distance(other) < tol

    def to_json(self) -> dict:
        return {'num_qudits': self.num_qudits, 'dim': self.dim,
                'amplitudes': [[float(z.real), float(z.imag)] for z in self.amplitudes]}

    @classmethod
    def from_json(cls, data: dict) -> StateVector:
        amps = [complex(re, im) for re, im in data['amplitudes']]
        return cls(amps, data['num_qudits'], data.get('dim', 6))


class LinearOperator:
    """Sparse complex operator on ``num_qudits`` qudits, stored as CSR.

    Entries below :data:`PRUNE_TOL` in magnitude are dropped after every operation.
    ``a @ b`` composes, ``a @ state`` applies.
    """

    __slots__ = ('matrix', 'num_qudits', 'dim')
    __array_priority__ = 20

    def __init__(self, matrix, num_qudits: int, dim: int = 6):
        size = dim ** num_qudits
        m = _prune(matrix)
        if m.shape != (size, size):
            raise QuditError(f"matrix shape {m.shape} does not match {num_qudits} qudits of dimension {dim}")
        self.matrix = m
        self.num_qudits = num_qudits
        self.dim = dim

    @classmethod
    def from_entries(cls, entries: Iterable, num_qudits: int, dim: int = 6) -> LinearOperator:
        """Build from ``(row, col, value)`` triples; repeated positions are summed."""
        entries = list(entries)
        size = dim ** num_qudits
        if not entries:
            return cls.zero(num_qudits, dim)
        rows, cols, vals = zip(*entries)
        if max(rows) >= size or max(cols) >= size or min(rows) < 0 or min(cols) < 0:
            raise QuditError("entry index out of range")
        return cls(sp.coo_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(size, size)),
                   num_qudits, dim)

    @classmethod
    def from_dense(cls, array, num_qudits: int | None = None, dim: int = 6) -> LinearOperator:
        array = np.asarray(array, dtype=complex)
        if num_qudits is None:
            num_qudits = round(math.log(array.shape[0], dim))
        return cls(sp.csr_matrix(array), num_qudits, dim)

    @classmethod
    def identity(cls, num_qudits: int, dim: int = 6) -> LinearOperator:
        return cls(sp.identity(dim ** num_qudits, dtype=complex, format='csr'), num_qudits, dim)

    @classmethod
    def zero(cls, num_qudits: int, dim: int = 6) -> LinearOperator:
        size = dim ** num_qudits
        return cls(sp.csr_matrix((size, size), dtype=complex), num_qudits, dim)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __repr__(self):
        return f"LinearOperator(num_qudits={self.num_qudits}, dim={self.dim}, nnz={self.nnz})"

    def entries(self) -> list[tuple[int, int, complex]]:
        """Nonzero entries in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[k]), int(coo.col[k]), complex(coo.data[k])) for k in order]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def _check(self, other: LinearOperator):
        if (self.num_qudits, self.dim) != (other.num_qudits, other.dim):
            raise QuditError(f"dimension mismatch: {self.num_qudits} vs {other.num_qudits} qudits")

    def __matmul__(self, other):
        if isinstance(other, LinearOperator):
            return compose(self, other)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return add(self, other)

    def __sub__(self, other):
        if not isinstance(other, LinearOperator):
            return NotImplemented
        return add(self, scale(-1, other))

    def __neg__(self):
        return scale(-1, self)

    def __mul__(self, z):
        if isinstance(z, (LinearOperator, StateVector)):
            return NotImplemented
        return scale(z, self)

    __rmul__ = __mul__

    def __truediv__(self, z):
        return scale(1 / z, self)

    def __pow__(self, k: int):
        out = LinearOperator.identity(self.num_qudits, self.dim)
        for _ in range(k):
            out = out @ self
        return out

    @property
    def H(self) -> LinearOperator:
        return adjoint(self)

    def adjoint(self) -> LinearOperator:
        return adjoint(self)

    def norm(self) -> float:
        """Frobenius norm."""
        return float(sp.linalg.norm(self.matrix)) if self.nnz else 0.0

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def sum_entries(self) -> complex:
        return complex(self.matrix.sum())

    def commutator(self, other: LinearOperator) -> LinearOperator:
        return self @ other - other @ self

    def allclose(self, other: LinearOperator, tol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        diff = self.matrix - other.matrix
        return diff.nnz == 0 or float(np.abs(diff.data).max()) < tol

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.allclose(self.adjoint(), tol)

    def is_projector(self, tol: float = 1e-12) -> bool:
        return self.is_hermitian(tol) and self.allclose(self @ self, tol)

    def to_json(self) -> dict:
        return {'num_qudits': self.num_qudits, 'dim': self.dim,
                'entries': [[r, c, float(z.real), float(z.imag)] for r, c, z in self.entries()]}

    @classmethod
    def from_json(cls, data: dict) -> LinearOperator:
        entries = [(int(r), int(c), complex(re, im)) for r, c, re, im in data['entries']]
        return cls.from_entries(entries, data['num_qudits'], data.get('dim', 6))


def compose(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    """Operator product ``a b`` (``b`` acts first)."""
    a._check(b)
    return LinearOperator(a.matrix @ b.matrix, a.num_qudits, a.dim)


def adjoint(a: LinearOperator) -> LinearOperator:
    return LinearOperator(a.matrix.conj().T, a.num_qudits, a.dim)


def add(a: LinearOperator, b: LinearOperator) -> LinearOperator:
    a._check(b)
    return LinearOperator(a.matrix + b.matrix, a.num_qudits, a.dim)


def scale(z: complex, a: LinearOperator) -> LinearOperator:
    return LinearOperator(a.matrix * complex(z), a.num_qudits, a.dim)


def apply(op: LinearOperator, state: StateVector) -> StateVector:
    if (op.num_qudits, op.dim) != (state.num_qudits, state.dim):
        raise QuditError(f"operator on {op.num_qudits} qudits applied to state on {state.num_qudits}")
    return StateVector(op.matrix @ state.amplitudes, state.num_qudits, state.dim)


def inner(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    if (a.num_qudits, a.dim) != (b.num_qudits, b.dim):
        raise QuditError("state dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor(*ops: LinearOperator) -> LinearOperator:
    """Kronecker product, first factor on the most significant qudits."""
    if not ops:
        raise QuditError("tensor of no operators")
    out = ops[0].matrix
    for op in ops[1:]:
        if op.dim != ops[0].dim:
            raise QuditError("qudit dimension mismatch in tensor product")
        out = sp.kron(out, op.matrix, format='csr')
    return LinearOperator(out, sum(op.num_qudits for op in ops), ops[0].dim)


def single_qudit_operator(kind: str, g, group: FiniteGroup = S3) -> LinearOperator:
    """One of ``L+ L- T+ T-`` for element ``g``:

    ``L+|z> = |gz>``, ``L-|z> = |z g^-1>``, ``T+|z> = delta(g, z)|z>``,
    ``T-|z> = delta(g^-1, z)|z>``.
    """
    try:
        kind = _KIND_ALIASES[kind]
    except KeyError:
        raise QuditError(f"unknown single-qudit operator kind {kind!r}") from None
    g = group.element(g)
    d = group.order
    if kind == 'L+':
        rows = [group.multiply(g, z) for z in range(d)]
        cols = list(range(d))
    elif kind == 'L-':
        gi = group.inverse(g)
        rows = [group.multiply(z, gi) for z in range(d)]
        cols = list(range(d))
    else:
        z = g if kind == 'T+' else group.inverse(g)
        rows = cols = [z]
    m = sp.coo_matrix((np.ones(len(rows), dtype=complex), (rows, cols)), shape=(d, d))
    return LinearOperator(m, 1, d)


def embed(op: LinearOperator, sites: Sequence[int], n: int) -> LinearOperator:
    """Place ``op`` (on ``k`` qudits) on the 1-based ``sites`` of an ``n``-qudit register.

    ``sites[i]`` receives the ``i``-th tensor factor of ``op``; identity elsewhere.
    """
    sites = [int(s) for s in sites]
    k, d = op.num_qudits, op.dim
    if len(sites) != k:
        raise QuditError(f"operator acts on {k} qudits but {len(sites)} sites were given")
    if len(set(sites)) != k:
        raise QuditError(f"duplicate sites in {sites}")
    if any(not 1 <= s <= n for s in sites):
        raise QuditError(f"sites {sites} out of range 1..{n}")
    if k == n and sites == list(range(1, n + 1)):
        return op
    weights = np.array([d ** (n - s) for s in sites], dtype=np.int64)
    coo = op.matrix.tocoo()
    local_rows = np.array(basis_digits(coo.row, k, d)) if coo.nnz else np.zeros((0, k), dtype=np.int64)
    local_cols = np.array(basis_digits(coo.col, k, d)) if coo.nnz else np.zeros((0, k), dtype=np.int64)
    row_off = local_rows @ weights
    col_off = local_cols @ weights
    others = [s for s in range(1, n + 1) if s not in sites]
    if others:
        other_w = np.array([d ** (n - s) for s in others], dtype=np.int64)
        grid = np.array(list(product(range(d), repeat=len(others))), dtype=np.int64)
        base = grid @ other_w
    else:
        base = np.zeros(1, dtype=np.int64)
    rows = (base[:, None] + row_off[None, :]).ravel()
    cols = (base[:, None] + col_off[None, :]).ravel()
    vals = np.tile(coo.data, base.size)
    size = d ** n
    return LinearOperator(sp.coo_matrix((vals, (rows, cols)), shape=(size, size)), n, d)


def basis_digits(indices, k: int, dim: int = 6) -> np.ndarray:
    """Vectorized :func:`basis_tuple`: shape ``(len(indices), k)``."""
    idx = np.asarray(indices, dtype=np.int64).copy()
    out = np.zeros((idx.size, k), dtype=np.int64)
    for pos in range(k - 1, -1, -1):
        idx, out[:, pos] = np.divmod(idx, dim)
    return out
