"""Oriented open lattices, vertex/plaquette operators, the Kitaev Hamiltonian and its vacuum."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .group import S3, AnyonLabel, anyon
from .qudit import LinearOperator, StateVector, embed, single_qudit_operator, tensor, basis_digits

__all__ = ['LayoutError', 'ProtocolSites', 'LatticeLayout', 'GroundState',
           'BUILTIN_LAYOUTS', 'get_layout', 'load_layout', 'resolve_layout', 'vertex_operator',
           'vertex_projector', 'plaquette_operator', 'plaquette_projector', 'hamiltonian', 'ground_state',
           'anyon_projector', 'embed_on_links']

log = logging.getLogger(__name__)

MAX_DENSE_LINKS = 8
_L_SIGNS = ('L+', 'L-')
_T_SIGNS = ('T+', 'T-')


class LayoutError(ValueError):
    """Malformed or inconsistent lattice layout, or unknown vertex/plaquette."""


@dataclass(frozen=True)
class ProtocolSites:
    """Where the two crossed G ribbons live on a layout.

    ``ribbon_links = (a, b)``: rho_1 is a direct triangle on ``a`` and a dual triangle
    on ``b``; rho_2 the reverse. ``vertex`` is the shared endpoint vertex at which fusion
    outcomes are measured; ``fusion_vertex`` is the other endpoint of rho_1.
    """
    vertex: int
    ribbon_links: tuple[int, int]
    fusion_vertex: int


@dataclass(frozen=True)
class LatticeLayout:
    """Explicit incidence data: every vertex/plaquette lists its links with their signs.

    Link order in ``links`` fixes the qudit numbering (first link is qudit 1). The order
    of a plaquette's link list is the order of the flux product.
    """
    links: tuple[int, ...]
    vertices: Mapping[int, tuple[tuple[int, str], ...]]
    plaquettes: Mapping[int, tuple[tuple[int, str], ...]]
    name: str = 'custom'
    protocol: ProtocolSites | None = None
    _qudit: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'links', tuple(int(l) for l in self.links))
        object.__setattr__(self, 'vertices', {int(v): tuple((int(l), s) for l, s in ls)
                                              for v, ls in self.vertices.items()})
        object.__setattr__(self, 'plaquettes', {int(p): tuple((int(l), s) for l, s in ls)
                                                for p, ls in self.plaquettes.items()})
        object.__setattr__(self, '_qudit', {l: i + 1 for i, l in enumerate(self.links)})
        self.validate()

    def __hash__(self):
        return hash((self.name, self.links, tuple(sorted(self.vertices.items())),
                     tuple(sorted(self.plaquettes.items()))))

    @property
    def num_qudits(self) -> int:
        return len(self.links)

    def qudit(self, link: int) -> int:
        try:
            return self._qudit[int(link)]
        except KeyError:
            raise LayoutError(f"unknown link {link}") from None

    def vertex_links(self, v: int) -> tuple[tuple[int, str], ...]:
        try:
            return self.vertices[int(v)]
        except KeyError:
            raise LayoutError(f"unknown vertex {v} in layout {self.name!r}") from None

    def plaquette_links(self, p: int) -> tuple[tuple[int, str], ...]:
        try:
            return self.plaquettes[int(p)]
        except KeyError:
            raise LayoutError(f"unknown plaquette {p} in layout {self.name!r}") from None

    def validate(self):
        if len(set(self.links)) != len(self.links) or not self.links:
            raise LayoutError("link ids must be unique and non-empty")
        known = set(self.links)
        vcount = {l: [] for l in self.links}
        pcount = {l: 0 for l in self.links}
        for v, ls in self.vertices.items():
            if len({l for l, _ in ls}) != len(ls):
                raise LayoutError(f"vertex {v} lists a link twice")
            for l, s in ls:
                if l not in known:
                    raise LayoutError(f"vertex {v} references unknown link {l}")
                if s not in _L_SIGNS:
                    raise LayoutError(f"vertex {v}: sign {s!r} is not one of {_L_SIGNS}")
                vcount[l].append(s)
        for p, ls in self.plaquettes.items():
            if len({l for l, _ in ls}) != len(ls):
                raise LayoutError(f"plaquette {p} lists a link twice")
            for l, s in ls:
                if l not in known:
                    raise LayoutError(f"plaquette {p} references unknown link {l}")
                if s not in _T_SIGNS:
                    raise LayoutError(f"plaquette {p}: sign {s!r} is not one of {_T_SIGNS}")
                pcount[l] += 1
        for l in self.links:
            if len(vcount[l]) > 2 or pcount[l] > 2:
                raise LayoutError(f"link {l} appears in more than two vertices or plaquettes")
            if len(vcount[l]) == 2 and vcount[l][0] == vcount[l][1]:
                raise LayoutError(f"link {l} must point into one endpoint vertex and out of the other")
        self._check_plaquette_orientation()
        if self.protocol is not None:
            pr = self.protocol
            for v in (pr.vertex, pr.fusion_vertex):
                self.vertex_links(v)
            for l in pr.ribbon_links:
                self.qudit(l)

    def _check_plaquette_orientation(self):
        # For consecutive links (l, m) of a plaquette sharing vertex v the flux product
        # is gauge invariant at v only if: T+ on l <-> L- at v, T- on l <-> L+ at v,
        # and T+ on m <-> L+ at v, T- on m <-> L- at v.
        at = {v: dict(ls) for v, ls in self.vertices.items()}
        for p, ls in self.plaquettes.items():
            k = len(ls)
            for i in range(k):
                (l, sl), (m, sm) = ls[i], ls[(i + 1) % k]
                for v, signs in at.items():
                    if l in signs and m in signs:
                        want_l = 'L-' if sl == 'T+' else 'L+'
                        want_m = 'L+' if sm == 'T+' else 'L-'
                        if signs[l] != want_l or signs[m] != want_m:
                            raise LayoutError(f"plaquette {p}: links {l},{m} at vertex {v} have signs "
                                              f"inconsistent with the orientation convention")

    def to_json(self) -> dict:
        out = {
            'name': self.name,
            'links': [{'id': l} for l in self.links],
            'vertices': [{'id': v, 'links': [[l, s] for l, s in ls]} for v, ls in self.vertices.items()],
            'plaquettes': [{'id': p, 'links': [[l, s] for l, s in ls]} for p, ls in self.plaquettes.items()],
        }
        if self.protocol is not None:
            out['protocol'] = {'vertex': self.protocol.vertex,
                               'ribbon_links': list(self.protocol.ribbon_links),
                               'fusion_vertex': self.protocol.fusion_vertex}
        return out

    @classmethod
    def from_json(cls, data: dict, name: str = 'custom') -> LatticeLayout:
        try:
            links = [int(rec['id']) for rec in data['links']]
            vertices = {int(rec['id']): tuple((int(l), str(s)) for l, s in rec['links'])
                        for rec in data.get('vertices', [])}
            plaquettes = {int(rec['id']): tuple((int(l), str(s)) for l, s in rec['links'])
                          for rec in data.get('plaquettes', [])}
            protocol = None
            if 'protocol' in data:
                pr = data['protocol']
                a, b = pr['ribbon_links']
                protocol = ProtocolSites(int(pr['vertex']), (int(a), int(b)), int(pr['fusion_vertex']))
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"malformed layout data: {exc!r}") from exc
        return cls(tuple(links), vertices, plaquettes, data.get('name', name), protocol)


# Four links circulating anticlockwise around one plaquette; vertex k joins link k
# (incoming) and link k+1 (outgoing).
_PLAQUETTE1 = LatticeLayout(
    links=(1, 2, 3, 4),
    vertices={1: ((1, 'L+'), (2, 'L-')),
              2: ((2, 'L+'), (3, 'L-')),
              3: ((3, 'L+'), (4, 'L-')),
              4: ((4, 'L+'), (1, 'L-'))},
    plaquettes={1: ((1, 'T-'), (2, 'T-'), (3, 'T-'), (4, 'T-'))},
    name='plaquette1',
    protocol=ProtocolSites(vertex=3, ribbon_links=(3, 4), fusion_vertex=2),
)

# 2x1 grid, horizontal links point right, vertical links up.
#   v4 --6--> v5 --7--> v6
#   ^         ^         ^
#   3   p1    4   p2    5
#   |         |         |
#   v1 --1--> v2 --2--> v3
_PLAQUETTE2 = LatticeLayout(
    links=(1, 2, 3, 4, 5, 6, 7),
    vertices={1: ((1, 'L-'), (3, 'L-')),
              2: ((1, 'L+'), (2, 'L-'), (4, 'L-')),
              3: ((2, 'L+'), (5, 'L-')),
              4: ((3, 'L+'), (6, 'L-')),
              5: ((4, 'L+'), (6, 'L+'), (7, 'L-')),
              6: ((5, 'L+'), (7, 'L+'))},
    plaquettes={1: ((1, 'T-'), (4, 'T-'), (6, 'T+'), (3, 'T+')),
                2: ((2, 'T-'), (5, 'T-'), (7, 'T+'), (4, 'T+'))},
    name='plaquette2',
    protocol=ProtocolSites(vertex=2, ribbon_links=(1, 4), fusion_vertex=1),
)

BUILTIN_LAYOUTS = {'plaquette1': _PLAQUETTE1, 'plaquette2': _PLAQUETTE2}


def get_layout(name: str) -> LatticeLayout:
    try:
        return BUILTIN_LAYOUTS[name]
    except KeyError:
        raise LayoutError(f"unknown built-in layout {name!r}; choose from {sorted(BUILTIN_LAYOUTS)}") from None


def load_layout(path) -> LatticeLayout:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise LayoutError(f"cannot read layout file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise LayoutError(f"layout file {path} must contain a JSON object")
    return LatticeLayout.from_json(data, name=path.stem)


def resolve_layout(layout: LatticeLayout | str) -> LatticeLayout:
    return layout if isinstance(layout, LatticeLayout) else get_layout(layout)


def embed_on_links(layout: LatticeLayout, op: LinearOperator, links: Sequence[int]) -> LinearOperator:
    return embed(op, [layout.qudit(l) for l in links], layout.num_qudits)


def vertex_operator(layout: LatticeLayout, v: int, g) -> LinearOperator:
    """``A^g(v)``: ``L^g_+`` on incoming links and ``L^g_-`` on outgoing links of ``v``."""
    ls = layout.vertex_links(v)
    local = tensor(*(single_qudit_operator(s, g) for _, s in ls))
    return embed_on_links(layout, local, [l for l, _ in ls])


def vertex_projector(layout: LatticeLayout, v: int) -> LinearOperator:
    return sum((vertex_operator(layout, v, g) for g in S3), LinearOperator.zero(layout.num_qudits)) / S3.order


def plaquette_operator(layout: LatticeLayout, p: int, h) -> LinearOperator:
    """``B^h(p)``: diagonal projector onto configurations with ordered flux product ``h``."""
    ls = layout.plaquette_links(p)
    h = S3.element(h)
    k = len(ls)
    digits = basis_digits(np.arange(6 ** k), k)
    inv = S3.inverses
    table = S3.table
    factors = [digits[:, i] if s == 'T+' else inv[digits[:, i]] for i, (_, s) in enumerate(ls)]
    flux = reduce(lambda acc, f: table[acc, f], factors, np.full(6 ** k, S3.identity))
    local = LinearOperator(sp.diags((flux == h).astype(complex)), k)
    return embed_on_links(layout, local, [l for l, _ in ls])


def plaquette_projector(layout: LatticeLayout, p: int) -> LinearOperator:
    return plaquette_operator(layout, p, S3.identity)


def hamiltonian(layout: LatticeLayout) -> LinearOperator:
    n = layout.num_qudits
    h = LinearOperator.zero(n)
    for v in layout.vertices:
        h = h - vertex_projector(layout, v)
    for p in layout.plaquettes:
        h = h - plaquette_projector(layout, p)
    return h


_ANYON_COEFFS = {
    'A': np.full(6, 1 / 6),
    'B': np.array([1, 1, 1, -1, -1, -1]) / 6,
    'G': np.array([2, -1, -1, 0, 0, 0]) / 3,
}


def anyon_projector(layout: LatticeLayout, v: int, label: AnyonLabel | str) -> LinearOperator:
    """Charge projector ``A^X(v)`` for ``X`` in {A, B, G} as a combination of ``A^g(v)``."""
    tag = anyon(label).tag
    if tag not in _ANYON_COEFFS:
        raise LayoutError(f"no vertex projector for anyon {tag}; only A, B, G are supported")
    out = LinearOperator.zero(layout.num_qudits)
    for g, w in enumerate(_ANYON_COEFFS[tag]):
        if w:
            out = out + w * vertex_operator(layout, v, g)
    return out


@dataclass(frozen=True)
class GroundState:
    layout: LatticeLayout
    state: StateVector
    energy: float
    degeneracy: int = 1

    def stabilizer_residuals(self) -> dict[str, float]:
        """``|P psi - psi|`` for every vertex projector and plaquette projector."""
        out = {}
        for v in self.layout.vertices:
            out[f'A(v{v})'] = (vertex_projector(self.layout, v) @ self.state - self.state).norm()
        for p in self.layout.plaquettes:
            out[f'B(p{p})'] = (plaquette_projector(self.layout, p) @ self.state - self.state).norm()
        return out


def _stabilizer_projectors(layout):
    return ([vertex_projector(layout, v) for v in layout.vertices]
            + [plaquette_projector(layout, p) for p in layout.plaquettes])


def _project(projectors, state):
    for P in projectors:
        state = P @ state
    return state


def ground_state(layout: LatticeLayout | str, *, check_degeneracy: bool = True, seed: int = 0) -> GroundState:
    """Simultaneous +1 eigenvector of every ``A(v)`` and ``B(p)``.

    The product of all stabilizer projectors is applied to ``|e,...,e>`` (falling back to
    later basis states if that projection vanishes) and normalized. With
    ``check_degeneracy`` the rank of the projected space is probed with random vectors.
    """
    layout = resolve_layout(layout)
    n = layout.num_qudits
    if n > MAX_DENSE_LINKS:
        raise LayoutError(f"layout has {n} links; dense ground states are limited to {MAX_DENSE_LINKS}")
    projectors = _stabilizer_projectors(layout)
    psi = None
    for idx in range(6 ** n):
        amps = np.zeros(6 ** n, dtype=complex)
        amps[idx] = 1
        cand = _project(projectors, StateVector(amps, n))
        if cand.norm() > 1e-8:
            psi = cand.normalized()
            break
        log.debug("reference basis state %d projects to zero, trying the next one", idx)
    if psi is None:
        raise LayoutError(f"layout {layout.name!r} has no frustration-free ground state")
    degeneracy = 1
    if check_degeneracy:
        rng = np.random.default_rng(seed)
        probes = [psi.amplitudes]
        for _ in range(2):
            r = rng.normal(size=6 ** n) + 1j * rng.normal(size=6 ** n)
            probes.append(_project(projectors, StateVector(r, n)).amplitudes)
        sv = np.linalg.svd(np.array(probes), compute_uv=False)
        degeneracy = int(np.sum(sv > 1e-8 * sv[0]))
        if degeneracy > 1:
            log.warning("layout %r has a degenerate ground space (rank >= %d)", layout.name, degeneracy)
    energy = -sum(np.vdot(psi.amplitudes, P.matrix @ psi.amplitudes).real for P in projectors)
    return GroundState(layout, psi, float(energy), degeneracy)
