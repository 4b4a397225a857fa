"""Ribbon operators: triangle families, gluing, Abelian and non-Abelian anyon ribbons.

Operators are built on the ribbon's own support (its distinct links, in order of
first appearance) and embedded into a lattice with
:func:`ds3sim.lattice.embed_on_links`.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .group import S3, C, C2, E, OMEGA, OMEGA_BAR, AnyonLabel, anyon
from .qudit import LinearOperator, embed, single_qudit_operator, tensor

__all__ = ['RibbonError', 'Triangle', 'RibbonSpec', 'RibbonFamily', 'triangle_ribbon', 'triangle_family',
           'ribbon_family', 'glue', 'abelian_ribbon', 'nonabelian_ribbon', 'traced_nonabelian_ribbon',
           'builtin_G_ribbons', 'rho1_spec', 'rho2_spec', 'string_operator']


class RibbonError(ValueError):
    pass


@dataclass(frozen=True)
class Triangle:
    kind: str   # 'dual' (L operator) or 'direct' (T operator)
    site: int   # link id
    sign: str   # '+' or '-'

    def __post_init__(self):
        if self.kind not in ('dual', 'direct'):
            raise RibbonError(f"triangle kind must be 'dual' or 'direct', got {self.kind!r}")
        if self.sign not in ('+', '-'):
            raise RibbonError(f"triangle sign must be '+' or '-', got {self.sign!r}")
        object.__setattr__(self, 'site', int(self.site))


@dataclass(frozen=True)
class RibbonSpec:
    triangles: tuple[Triangle, ...]

    def __post_init__(self):
        tris = tuple(t if isinstance(t, Triangle) else Triangle(**t) for t in self.triangles)
        if not tris:
            raise RibbonError("a ribbon needs at least one triangle")
        # a link may carry one dual and one direct triangle, never two of the same kind
        seen = set()
        for t in tris:
            if (t.kind, t.site) in seen:
                raise RibbonError(f"ribbon self-crosses: two {t.kind} triangles on link {t.site}")
            seen.add((t.kind, t.site))
        object.__setattr__(self, 'triangles', tris)

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(dict.fromkeys(t.site for t in self.triangles))

    @property
    def is_proper(self) -> bool:
        kinds = {t.kind for t in self.triangles}
        return kinds == {'dual', 'direct'}

    def __add__(self, other: RibbonSpec) -> RibbonSpec:
        return RibbonSpec(self.triangles + other.triangles)

    def to_json(self) -> dict:
        return {'triangles': [{'kind': t.kind, 'site': t.site, 'sign': t.sign} for t in self.triangles]}

    @classmethod
    def from_json(cls, data: dict) -> RibbonSpec:
        try:
            return cls(tuple(Triangle(str(t['kind']), int(t['site']), str(t['sign'])) for t in data['triangles']))
        except (KeyError, TypeError) as exc:
            raise RibbonError(f"malformed ribbon data: {exc!r}") from exc


@dataclass(frozen=True)
class RibbonFamily:
    """All 36 operators ``F^{h,g}`` of one ribbon, on the ribbon's support."""
    ribbon: RibbonSpec
    operators: Mapping[tuple[int, int], LinearOperator]
    support: tuple[int, ...] = ()

    @property
    def sites(self) -> tuple[int, ...]:
        return self.support or self.ribbon.sites

    def __getitem__(self, hg) -> LinearOperator:
        h, g = hg
        return self.operators[S3.element(h), S3.element(g)]

    def widened(self, sites: Sequence[int]) -> RibbonFamily:
        """Same operators re-embedded on a larger ordered support."""
        sites = tuple(sites)
        pos = [sites.index(s) + 1 for s in self.sites]
        ops = {k: embed(op, pos, len(sites)) for k, op in self.operators.items()}
        return RibbonFamily(self.ribbon, ops, sites)


def triangle_ribbon(kind: str, h, g, sign: str = '+') -> LinearOperator:
    """Single triangle: dual ``F^{h,g} = delta(e, g) L^h``, direct ``F^{h,g} = T^g``."""
    tri = Triangle(kind, 0, sign)
    h, g = S3.element(h), S3.element(g)
    if tri.kind == 'dual':
        if g != S3.identity:
            return LinearOperator.zero(1)
        return single_qudit_operator('L' + sign, h)
    return single_qudit_operator('T' + sign, g)


def triangle_family(tri: Triangle) -> RibbonFamily:
    ops = {(h, g): triangle_ribbon(tri.kind, h, g, tri.sign) for h, g in product(S3, S3)}
    return RibbonFamily(RibbonSpec((tri,)), ops)


def glue(f1: RibbonFamily, f2: RibbonFamily) -> RibbonFamily:
    """``F^{h,g}_{r1 r2} = sum_k F^{h,k}_{r1} F^{k^-1 h k, k^-1 g}_{r2}``."""
    shared = set(f1.ribbon.triangles) & set(f2.ribbon.triangles)
    if shared:
        raise RibbonError(f"cannot glue ribbons sharing triangles {sorted(shared, key=repr)}")
    spec = f1.ribbon + f2.ribbon
    support = tuple(dict.fromkeys(f1.sites + f2.sites))
    w1, w2 = f1.widened(support), f2.widened(support)
    n = len(support)
    ops = {}
    for h, g in product(S3, S3):
        acc = LinearOperator.zero(n)
        for k in S3:
            ki = S3.inverse(k)
            a = w1.operators[h, k]
            if not a.nnz:
                continue
            b = w2.operators[S3.conjugate(ki, h), S3.multiply(ki, g)]
            if b.nnz:
                acc = acc + a @ b
        ops[h, g] = acc
    return RibbonFamily(spec, ops, support)


def ribbon_family(ribbon: RibbonSpec) -> RibbonFamily:
    """Family of a multi-triangle ribbon, glued left to right one triangle at a time."""
    fam = triangle_family(ribbon.triangles[0])
    for tri in ribbon.triangles[1:]:
        fam = glue(fam, triangle_family(tri))
    if fam.sites != ribbon.sites:
        fam = fam.widened(ribbon.sites)
    return fam


def _family(ribbon):
    return ribbon if isinstance(ribbon, RibbonFamily) else ribbon_family(ribbon)


def abelian_ribbon(chi, c, ribbon: RibbonSpec | RibbonFamily) -> LinearOperator:
    """``F^{chi,c} = sum_g conj(chi(g)) F^{c^-1, g}`` for a one-dimensional character ``chi``.

    ``chi`` is an anyon label (``'A'`` or ``'B'``) or a sequence of six character values.
    """
    if isinstance(chi, (str, AnyonLabel)):
        lab = anyon(chi)
        if lab.character is None or lab.quantum_dimension != 1 or lab.conjugacy_class != {E}:
            raise RibbonError(f"anyon {lab.tag} is not Abelian; use nonabelian_ribbon")
        values = lab.character
    else:
        values = tuple(chi)
        if len(values) != S3.order:
            raise RibbonError("a character needs one value per group element")
    fam = _family(ribbon)
    ci = S3.inverse(c)
    out = LinearOperator.zero(len(fam.sites))
    for g in S3:
        if values[g]:
            out = out + np.conj(values[g]) * fam.operators[ci, g]
    return out


def _class_data(lab: AnyonLabel):
    if lab.normalizer_irrep is None:
        raise RibbonError(f"no irrep data stored for anyon {lab.tag}")
    norm = sorted(lab.normalizer)
    reps = S3.coset_representatives(norm)
    r = lab.class_representative
    classes = [S3.conjugate(q, r) for q in reps]
    return norm, reps, classes


def nonabelian_ribbon(label, ribbon: RibbonSpec | RibbonFamily, u: tuple[int, int],
                      v: tuple[int, int]) -> LinearOperator:
    """``F^{RC;u,v} = n_R/|N| sum_n conj(Gamma_R(n)[j, j']) F^{c_i^-1, q_i n q_i'^-1}``.

    ``u = (i, j)``, ``v = (i', j')``: ``i, i'`` index the conjugacy class through the coset
    representatives ``q_i`` of the normalizer (smallest element of each coset, so
    ``q = (e, t)`` for the class of ``c``), ``j, j'`` index the normalizer irrep.
    """
    lab = anyon(label)
    norm, reps, classes = _class_data(lab)
    (i, j), (ip, jp) = u, v
    n_r = lab.irrep_dimension
    if not (0 <= i < len(reps) and 0 <= ip < len(reps) and 0 <= j < n_r and 0 <= jp < n_r):
        raise RibbonError(f"index pair {u}, {v} out of range for anyon {lab.tag}")
    fam = _family(ribbon)
    h = S3.inverse(classes[i])
    out = LinearOperator.zero(len(fam.sites))
    for n in norm:
        coeff = np.conj(lab.normalizer_irrep(n)[j, jp])
        g = S3.multiply(S3.multiply(reps[i], n), S3.inverse(reps[ip]))
        out = out + coeff * fam.operators[h, g]
    return out * (n_r / len(norm))


def traced_nonabelian_ribbon(label, ribbon: RibbonSpec | RibbonFamily) -> LinearOperator:
    """Anyon ribbon from tracing out ``u = v``, rescaled by ``|N|/n_R``.

    The rescaling removes the projector normalization so that for the class of ``c`` the
    result coincides with the hard-coded two-qudit G ribbons.
    """
    lab = anyon(label)
    norm, reps, _ = _class_data(lab)
    n_r = lab.irrep_dimension
    fam = _family(ribbon)
    out = LinearOperator.zero(len(fam.sites))
    for i in range(len(reps)):
        for j in range(n_r):
            out = out + nonabelian_ribbon(lab, fam, (i, j), (i, j))
    return out * (len(norm) / n_r)


def rho1_spec(a: int = 3, b: int = 4) -> RibbonSpec:
    """Direct triangle on ``a`` then dual triangle on ``b``, both with ``-`` orientation."""
    return RibbonSpec((Triangle('direct', a, '-'), Triangle('dual', b, '-')))


def rho2_spec(a: int = 3, b: int = 4) -> RibbonSpec:
    return RibbonSpec((Triangle('dual', a, '+'), Triangle('direct', b, '-')))


def _t_minus_combo(phase_c: complex, phase_c2: complex) -> LinearOperator:
    return (single_qudit_operator('T-', E) + phase_c * single_qudit_operator('T-', C)
            + phase_c2 * single_qudit_operator('T-', C2))


def builtin_G_ribbons() -> tuple[LinearOperator, LinearOperator]:
    """The two crossed two-qudit G ribbons ``(F_rho1, F_rho2)`` on sites (a, b)."""
    t_w = _t_minus_combo(OMEGA, OMEGA_BAR)
    t_wb = _t_minus_combo(OMEGA_BAR, OMEGA)
    f1 = tensor(t_w, single_qudit_operator('L-', C)) + tensor(t_wb, single_qudit_operator('L-', C2))
    f2 = tensor(single_qudit_operator('L+', C), t_w) + tensor(single_qudit_operator('L+', C2), t_wb)
    return f1, f2


def string_operator(label, sign: str = '+') -> LinearOperator:
    """Single direct-triangle string ``F^A`` (identity) or ``F^B`` (reflection sign)."""
    return abelian_ribbon(label, E, RibbonSpec((Triangle('direct', 0, sign),)))
