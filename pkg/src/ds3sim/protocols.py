"""Braiding and fusion protocols on a prepared vacuum.

Every protocol quantity is an overlap ``<zeta| W_bra^dag W_ket |zeta>`` of two operator
words applied to the vacuum. A :class:`ProtocolContext` evaluates such overlaps either on
the full lattice state or, for the single plaquette, through the two-qudit uniform-state
reduction, so the same protocol code runs on both.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .group import OMEGA, OMEGA_BAR, S3
from .lattice import (GroundState, LatticeLayout, LayoutError, anyon_projector, embed_on_links, ground_state,
                      resolve_layout)
from .qudit import DEFAULT_TOL, LinearOperator, StateVector, single_qudit_operator, tensor
from .ribbons import builtin_G_ribbons, string_operator

__all__ = ['ProtocolError', 'LABELS', 'NORMALIZATION', 'GJ_PHASES', 'RResult', 'FResult', 'SignFamilyResult',
           'Check', 'ProtocolReport', 'ProtocolContext', 'extract_R', 'verify_exchange_relation', 'fusion_check',
           'extract_F_squared', 'phase_identity_residuals', 'enumerate_sign_family', 'commutator_norm',
           'two_qudit_overlap', 'two_qudit_overlap_sum', 'uniform_two_qudit_state', 'run_dense_protocols',
           'full_report', 'R_MATRIX_EXPECTED', 'F_SQUARED_EXPECTED', 'F_SIGNED_REFERENCE']

log = logging.getLogger(__name__)

LABELS = ('A', 'B', 'G')
NORMALIZATION = {'A': 2.0, 'B': 2.0, 'G': math.sqrt(2.0)}
# braiding phase of G around each fusion channel j, used to undo the phase picked up in psi_2(j)
GJ_PHASES = {'A': 1.0 + 0j, 'B': 1.0 + 0j, 'G': OMEGA}

R_MATRIX_EXPECTED = np.array([OMEGA_BAR, OMEGA_BAR, OMEGA])
F_SQUARED_EXPECTED = np.array([[1, 1, 2], [1, 1, 2], [2, 2, 0]]) / 4
_S = math.sqrt(2)
F_SIGNED_REFERENCE = np.array([[1, 1, _S], [1, 1, -_S], [_S, -_S, 0]]) / 2


class ProtocolError(RuntimeError):
    """A protocol state vanished, which means the ribbons sit at the wrong place."""


@dataclass(frozen=True)
class RResult:
    diagonal: np.ndarray          # R^GG_i for i in A, B, G
    raw_overlaps: np.ndarray      # <phi12(i)|phi21(i)> before any rescaling (same values here)
    normalizations: tuple[float, float, float]
    cross_overlaps: np.ndarray    # <phi12(i)|phi21(j)>
    state_norms: np.ndarray       # |phi12(i)|, |phi21(i)|

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)


@dataclass(frozen=True)
class FResult:
    f_matrix: np.ndarray          # complex; real part is the squared F matrix
    raw_coefficients: np.ndarray  # f_ij
    raw_overlaps: np.ndarray      # <psi2(j)|psi1(i)>
    phases: tuple[complex, complex, complex]

    @property
    def real(self) -> np.ndarray:
        return self.f_matrix.real


@dataclass(frozen=True)
class SignFamilyResult:
    candidates: list[np.ndarray]
    commutators: list[np.ndarray]
    min_commutator_norm: float


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float

    def to_json(self) -> dict:
        return {'name': self.name, 'pass': bool(self.passed), 'residual': float(self.residual)}


@dataclass
class ProtocolReport:
    r: RResult | None = None
    f: FResult | None = None
    sign_family: SignFamilyResult | None = None
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        out = {}
        if self.r is not None:
            out['r_matrix'] = [[float(z.real), float(z.imag)] for z in self.r.diagonal]
        if self.f is not None:
            out['f_squared'] = [[float(x) for x in row] for row in self.f.real]
        if self.sign_family is not None:
            out['sign_family'] = {'count': len(self.sign_family.candidates),
                                  'min_commutator_norm': float(self.sign_family.min_commutator_norm)}
        out['checks'] = [c.to_json() for c in self.checks]
        return out


def uniform_two_qudit_state() -> StateVector:
    """``(1/sqrt(216)) sum |g3, g4>``; deliberately not unit norm (norm^2 = 1/6)."""
    return StateVector(np.full(36, 1 / math.sqrt(216), dtype=complex), 2)


def two_qudit_overlap(op: LinearOperator) -> complex:
    """``6 <xi|O|xi>`` for an operator on the two ribbon qudits."""
    if op.num_qudits != 2 or op.dim != 6:
        raise ProtocolError(f"two-qudit overlap needs an operator on 2 six-level qudits, got {op.num_qudits}")
    xi = uniform_two_qudit_state()
    return 6 * xi.inner(op @ xi)


def two_qudit_overlap_sum(op: LinearOperator) -> complex:
    """Same quantity as :func:`two_qudit_overlap`, written as the sum of all matrix entries over 36."""
    if op.num_qudits != 2 or op.dim != 6:
        raise ProtocolError(f"two-qudit overlap needs an operator on 2 six-level qudits, got {op.num_qudits}")
    return complex(op.sum_entries()) / 36


class ProtocolContext:
    """Ribbons, projectors and an overlap evaluator for one layout.

    ``dense=False`` evaluates overlaps on the full ground state. ``dense=True`` keeps every
    operator on the two ribbon links and evaluates ``<zeta|O|zeta>`` as ``6 <xi|O|xi>``; this
    requires the protocol vertex to touch exactly those two links.
    """

    def __init__(self, layout: LatticeLayout | str = 'plaquette1', *, dense: bool = False,
                 vacuum: GroundState | None = None):
        self.layout = resolve_layout(layout)
        sites = self.layout.protocol
        if sites is None:
            raise LayoutError(f"layout {self.layout.name!r} declares no protocol sites")
        self.sites = sites
        self.dense = dense
        a, b = sites.ribbon_links
        f1, f2 = builtin_G_ribbons()
        fb = string_operator('B', '-')
        if dense:
            links = {l for l, _ in self.layout.vertex_links(sites.vertex)}
            if links != {a, b}:
                raise LayoutError("dense evaluation needs the protocol vertex to touch only the two ribbon links")
            self.vacuum = None
            self.f1, self.f2 = f1, f2
            self.fb1 = tensor(fb, LinearOperator.identity(1))
            self.fb2 = tensor(LinearOperator.identity(1), fb)
            self._proj = {x: self._local_projector(x) for x in LABELS}
        else:
            self.vacuum = vacuum if vacuum is not None else ground_state(self.layout, check_degeneracy=False)
            self.f1 = embed_on_links(self.layout, f1, (a, b))
            self.f2 = embed_on_links(self.layout, f2, (a, b))
            self.fb1 = embed_on_links(self.layout, fb, (a,))
            self.fb2 = embed_on_links(self.layout, fb, (b,))
            self._proj = {x: anyon_projector(self.layout, sites.vertex, x) for x in LABELS}

    def _local_projector(self, label):
        # vertex projector restricted to the vertex's own two links, in ribbon-link order
        ls = dict(self.layout.vertex_links(self.sites.vertex))
        a, b = self.sites.ribbon_links
        coeffs = {'A': [1] * 6, 'B': [1, 1, 1, -1, -1, -1], 'G': [4, -2, -2, 0, 0, 0]}[label]
        out = LinearOperator.zero(2)
        for g, w in enumerate(coeffs):
            if w:
                out = out + (w / 6) * tensor(single_qudit_operator(ls[a], g), single_qudit_operator(ls[b], g))
        return out

    def projector(self, label: str) -> LinearOperator:
        return self._proj[label]

    def identity(self) -> LinearOperator:
        return LinearOperator.identity(2 if self.dense else self.layout.num_qudits)

    def word(self, factors: Sequence[LinearOperator]) -> LinearOperator:
        """Product of ``factors`` written left to right (the rightmost acts first)."""
        out = factors[-1]
        for f in reversed(factors[:-1]):
            out = f @ out
        return out

    def expectation(self, op: LinearOperator) -> complex:
        """``<zeta|O|zeta>``."""
        if self.dense:
            return two_qudit_overlap(op)
        psi = self.vacuum.state
        return psi.inner(op @ psi)

    def overlap(self, bra: Sequence[LinearOperator], ket: Sequence[LinearOperator]) -> complex:
        """``<zeta| word(bra)^dag word(ket) |zeta>``."""
        if not self.dense:
            psi = self.vacuum.state
            return self._apply(bra, psi).inner(self._apply(ket, psi))
        return self.expectation(self.word(bra).H @ self.word(ket))

    @staticmethod
    def _apply(factors, psi):
        for f in reversed(factors):
            psi = f @ psi
        return psi

    def norm(self, factors: Sequence[LinearOperator]) -> float:
        return math.sqrt(max(self.overlap(factors, factors).real, 0.0))


def _context(layout, dense=False):
    if isinstance(layout, ProtocolContext):
        return layout
    return ProtocolContext(layout, dense=dense)


def extract_R(layout: LatticeLayout | str | ProtocolContext = 'plaquette1', *, tol: float = DEFAULT_TOL) -> RResult:
    """Diagonal braiding matrix from ``R_i = <phi12(i)|phi21(i)>``."""
    ctx = _context(layout)
    f1, f2 = ctx.f1, ctx.f2
    words12, words21 = {}, {}
    norms = np.zeros((3, 2))
    for k, x in enumerate(LABELS):
        n = NORMALIZATION[x]
        words12[x] = [n * ctx.projector(x), f1, f2]
        words21[x] = [n * ctx.projector(x), f2, f1]
        norms[k] = ctx.norm(words12[x]), ctx.norm(words21[x])
        if min(norms[k]) < tol:
            raise ProtocolError(f"fusion channel {x} state vanishes; ribbons do not meet at vertex {ctx.sites.vertex}")
    cross = np.array([[ctx.overlap(words12[x], words21[y]) for y in LABELS] for x in LABELS])
    diag = np.diag(cross).copy()
    return RResult(diag, diag.copy(), tuple(NORMALIZATION[x] for x in LABELS), cross, norms)


def extract_F_squared(layout: LatticeLayout | str | ProtocolContext = 'plaquette1', *,
                      tol: float = DEFAULT_TOL) -> FResult:
    """Squared F matrix ``F^i_j = conj(R^{Gj}_G) <psi2(j)|psi1(i)> / <psi2(j)|psi2(j)>``."""
    ctx = _context(layout)
    f1, f2, pg = ctx.f1, ctx.f2, ctx.projector('G')
    psi1 = {i: [pg, f2, ctx.projector(i), f2, f1] for i in LABELS}
    psi2 = {j: [pg, f1, ctx.projector(j), f2, f2] for j in LABELS}
    raw = np.zeros((3, 3), dtype=complex)
    coeff = np.zeros((3, 3), dtype=complex)
    fm = np.zeros((3, 3), dtype=complex)
    for b, j in enumerate(LABELS):
        nn = ctx.overlap(psi2[j], psi2[j])
        if abs(nn) < tol:
            raise ProtocolError(f"psi2({j}) vanishes; ribbons do not meet at vertex {ctx.sites.vertex}")
        for a, i in enumerate(LABELS):
            raw[a, b] = ctx.overlap(psi2[j], psi1[i])
            coeff[a, b] = raw[a, b] / nn
            fm[a, b] = np.conj(GJ_PHASES[j]) * coeff[a, b]
    return FResult(fm, coeff, raw, tuple(GJ_PHASES[x] for x in LABELS))


def phase_identity_residuals(layout: LatticeLayout | str | ProtocolContext = 'plaquette1') -> np.ndarray:
    """``|<psi2(j)|psi1(i)> - R^{Gj}_G <zeta|F1 F^j_2 A^G F2 A^i F2 F1|zeta>|`` for all (i, j).

    ``F^j_2`` is the identity for A, the reflection-sign string on the direct triangle of
    the second ribbon for B, and the second G ribbon itself for G.
    """
    ctx = _context(layout)
    f1, f2, pg = ctx.f1, ctx.f2, ctx.projector('G')
    string = {'A': ctx.identity(), 'B': ctx.fb2, 'G': f2}
    out = np.zeros((3, 3))
    for (a, i), (b, j) in product(enumerate(LABELS), repeat=2):
        lhs = ctx.overlap([pg, f1, ctx.projector(j), f2, f2], [pg, f2, ctx.projector(i), f2, f1])
        rhs = GJ_PHASES[j] * ctx.expectation(ctx.word([f1, string[j], pg, f2, ctx.projector(i), f2, f1]))
        out[a, b] = abs(lhs - rhs)
    return out


def fusion_check(layout: LatticeLayout | str | ProtocolContext = 'plaquette1') -> dict[str, float]:
    """Distances for the three G x G fusion identities at the far endpoint of the first ribbon."""
    ctx = _context(layout)
    if ctx.dense:
        raise ProtocolError("fusion check needs the full lattice state")
    v = ctx.sites.fusion_vertex
    psi = ctx.vacuum.state
    sq = ctx.f1 @ (ctx.f1 @ psi)
    targets = {'A': psi, 'B': ctx.fb1 @ psi, 'G': ctx.f1 @ psi}
    return {x: (anyon_projector(ctx.layout, v, x) @ sq).distance(targets[x]) for x in LABELS}


def _position_products():
    f1, f2 = builtin_G_ribbons()
    return (f1 @ f2), (f2 @ f1)


def verify_exchange_relation(tol: float = DEFAULT_TOL) -> dict:
    """Entrywise phase rule between ``F1 F2`` and ``F2 F1`` on the two ribbon qudits.

    Each nonzero ``|g1,g2><h1,h2|`` of ``F2 F1`` must equal ``conj(omega)`` times the ``F1 F2``
    entry when ``g1 g2 = h1 h2`` and ``omega`` times it otherwise.
    """
    p12, p21 = _position_products()
    d12, d21 = p12.to_dense(), p21.to_dense()
    s12, s21 = np.abs(d12) > tol, np.abs(d21) > tol
    rows, cols = np.nonzero(s12)
    worst = 0.0
    for r, c in zip(rows, cols):
        g1, g2 = divmod(int(r), 6)
        h1, h2 = divmod(int(c), 6)
        phase = OMEGA_BAR if S3.multiply(g1, g2) == S3.multiply(h1, h2) else OMEGA
        worst = max(worst, abs(d21[r, c] - phase * d12[r, c]))
    same_pattern = bool(np.array_equal(s12, s21))
    return {'positions': int(s12.sum()), 'same_pattern': same_pattern, 'max_residual': float(worst),
            'passed': bool(same_pattern and worst < tol)}


def commutator_norm(r: np.ndarray, f: np.ndarray) -> float:
    r, f = np.asarray(r), np.asarray(f)
    if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape != f.shape:
        raise ValueError(f"commutator needs equal square matrices, got {r.shape} and {f.shape}")
    return float(np.linalg.norm(r @ f - f @ r))


_EXACT_ROOTS = ((0.0, 0.0), (0.25, 0.5), (0.5, 1 / math.sqrt(2)), (1.0, 1.0))


def _root(x: float, tol: float) -> float:
    for sq, rt in _EXACT_ROOTS:
        if abs(x - sq) < tol:
            return rt
    return math.sqrt(x)


def enumerate_sign_family(f_squared, r_matrix=None, *, tol: float = DEFAULT_TOL) -> SignFamilyResult:
    """Real symmetric orthogonal matrices whose entrywise square is ``f_squared``."""
    fs = np.real_if_close(np.asarray(f_squared, dtype=complex), tol=1e6).real
    if fs.shape != (3, 3) or np.any(fs < -tol):
        raise ValueError("f_squared must be a 3x3 matrix with nonnegative entries")
    r = np.diag(R_MATRIX_EXPECTED) if r_matrix is None else np.asarray(r_matrix)
    if r.ndim == 1:
        r = np.diag(r)
    mag = np.array([[_root(max(x, 0.0), tol) for x in row] for row in fs])
    slots = [(i, j) for i in range(3) for j in range(i, 3) if mag[i, j] > 0]
    candidates, commutators = [], []
    for signs in product((1, -1), repeat=len(slots)):
        m = np.zeros((3, 3))
        for (i, j), s in zip(slots, signs):
            m[i, j] = m[j, i] = s * mag[i, j]
        if np.max(np.abs(m @ m.T - np.eye(3))) < tol:
            candidates.append(m)
            commutators.append(r @ m - m @ r)
    norms = [float(np.linalg.norm(c)) for c in commutators]
    return SignFamilyResult(candidates, commutators, min(norms) if norms else 0.0)


def run_dense_protocols(layout: LatticeLayout | str = 'plaquette1') -> tuple[RResult, FResult]:
    """R and squared F computed with two-qudit operators and the uniform-state reduction only."""
    ctx = ProtocolContext(layout, dense=True)
    return extract_R(ctx), extract_F_squared(ctx)


def _check(name, residual, tol):
    residual = float(residual)
    return Check(name, bool(residual < tol), residual)


def full_report(layout: LatticeLayout | str = 'plaquette1', *, tol: float = DEFAULT_TOL,
                include_dense: bool | None = None) -> ProtocolReport:
    """Run every protocol on ``layout`` and collect pass/fail checks."""
    layout = resolve_layout(layout)
    ctx = ProtocolContext(layout)
    rep = ProtocolReport()
    gs = ctx.vacuum
    rep.checks.append(_check('ground_state_stabilizers', max(gs.stabilizer_residuals().values()), tol))
    rep.r = extract_R(ctx, tol=tol)
    rep.checks.append(_check('r_matrix', np.max(np.abs(rep.r.diagonal - R_MATRIX_EXPECTED)), tol))
    rep.f = extract_F_squared(ctx, tol=tol)
    rep.checks.append(_check('f_squared', np.max(np.abs(rep.f.f_matrix - F_SQUARED_EXPECTED)), tol))
    rep.sign_family = enumerate_sign_family(rep.f.real, rep.r.diagonal, tol=tol)
    rep.checks.append(_check('sign_family_count', abs(len(rep.sign_family.candidates) - 8), 0.5))
    rep.checks.append(_check('commutator_norm', abs(rep.sign_family.min_commutator_norm - math.sqrt(6)), tol))
    fus = fusion_check(ctx)
    rep.checks.append(_check('fusion', max(fus.values()), tol))
    ex = verify_exchange_relation(tol)
    rep.checks.append(Check('exchange_relation', ex['passed'], ex['max_residual']))
    rep.checks.append(_check('phase_identity', phase_identity_residuals(ctx).max(), tol))
    if include_dense is None:
        include_dense = layout.name == 'plaquette1'
    if include_dense:
        dr, df = run_dense_protocols(layout)
        rep.checks.append(_check('dense_r_matrix', np.max(np.abs(dr.diagonal - rep.r.diagonal)), tol))
        rep.checks.append(_check('dense_f_squared', np.max(np.abs(df.f_matrix - rep.f.f_matrix)), tol))
    return rep
