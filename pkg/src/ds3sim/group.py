"""Finite group tables, conjugacy data and the {A, B, G} anyon metadata of D(S3)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

__all__ = ['GroupError', 'FiniteGroup', 'S3', 'E', 'C', 'C2', 'T', 'TC', 'TC2', 'OMEGA', 'OMEGA_BAR',
           'AnyonLabel', 'ANYONS', 'anyon', 'character', 'multiply', 'inverse', 'conjugacy_class',
           'normalizer', 'omega_power']

OMEGA = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
OMEGA_BAR = OMEGA.conjugate()


class GroupError(ValueError):
    """Raised for malformed multiplication tables or unknown elements/labels."""


class FiniteGroup:
    """A finite group given by an explicit multiplication table.

    Elements are the integers ``0 .. order-1``; ``table[a, b]`` is the index of ``a*b``.
    The table is checked for closure, a two-sided identity, inverses and associativity
    (full enumeration of all triples) on construction.
    """

    def __init__(self, table, names: Sequence[str] | None = None):
        table = np.array(table, dtype=np.intp)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise GroupError(f"multiplication table must be square and non-empty, got {table.shape}")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise GroupError("multiplication table is not closed")
        ids = [a for a in range(n) if np.all(table[a] == np.arange(n)) and np.all(table[:, a] == np.arange(n))]
        if len(ids) != 1:
            raise GroupError("multiplication table has no two-sided identity")
        identity = ids[0]
        inv = np.full(n, -1, dtype=np.intp)
        for a in range(n):
            hits = np.nonzero(table[a] == identity)[0]
            if len(hits) != 1 or table[hits[0], a] != identity:
                raise GroupError(f"element {a} has no two-sided inverse")
            inv[a] = hits[0]
        left = table[table[:, :, None], np.arange(n)[None, None, :]]   # (ab)c
        right = table[np.arange(n)[:, None, None], table[None, :, :]]  # a(bc)
        if not np.array_equal(left, right):
            raise GroupError("multiplication table is not associative")
        if names is None:
            names = [str(i) for i in range(n)]
        if len(names) != n or len(set(names)) != n:
            raise GroupError("names must be unique, one per element")
        table.setflags(write=False)
        inv.setflags(write=False)
        self._table = table
        self._inverse = inv
        self.identity = int(identity)
        self.names = tuple(names)
        self._index = {name: i for i, name in enumerate(self.names)}

    @property
    def order(self) -> int:
        return len(self.names)

    @property
    def table(self) -> np.ndarray:
        return self._table

    @property
    def inverses(self) -> np.ndarray:
        return self._inverse

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(range(self.order))

    def __repr__(self):
        return f"FiniteGroup(order={self.order}, names={self.names})"

    def element(self, g: int | str) -> int:
        """Normalize an element given by index or by name to its index."""
        if isinstance(g, str):
            try:
                return self._index[g]
            except KeyError:
                raise GroupError(f"unknown element name {g!r}") from None
        g = int(g)
        if not 0 <= g < self.order:
            raise GroupError(f"element index {g} out of range for group of order {self.order}")
        return g

    def name(self, g: int) -> str:
        return self.names[self.element(g)]

    def multiply(self, a, b) -> int:
        return int(self._table[self.element(a), self.element(b)])

    def inverse(self, a) -> int:
        return int(self._inverse[self.element(a)])

    def product_of(self, elements) -> int:
        out = self.identity
        for g in elements:
            out = self.multiply(out, g)
        return out

    def conjugate(self, h, g) -> int:
        """Return ``h g h^-1``."""
        return self.multiply(self.multiply(h, g), self.inverse(h))

    def conjugacy_class(self, g) -> frozenset[int]:
        g = self.element(g)
        return frozenset(self.conjugate(h, g) for h in self)

    def conjugacy_classes(self) -> list[frozenset[int]]:
        """All classes, ordered by their smallest element."""
        seen, classes = set(), []
        for g in self:
            if g not in seen:
                cls = self.conjugacy_class(g)
                seen |= cls
                classes.append(cls)
        return classes

    def normalizer(self, g) -> frozenset[int]:
        """Centralizer of ``g``: all ``h`` with ``gh = hg``."""
        g = self.element(g)
        return frozenset(h for h in self if self.multiply(g, h) == self.multiply(h, g))

    def is_subgroup(self, elements) -> bool:
        elements = set(elements)
        return (self.identity in elements
                and all(self.multiply(a, b) in elements for a, b in product(elements, repeat=2)))

    def coset_representatives(self, subgroup) -> tuple[int, ...]:
        """Left coset representatives of ``subgroup``, each the smallest index in its coset."""
        subgroup = frozenset(subgroup)
        seen, reps = set(), []
        for q in self:
            if q not in seen:
                reps.append(q)
                seen |= {self.multiply(q, n) for n in subgroup}
        return tuple(reps)


def _s3_table() -> np.ndarray:
    # element t^s c^r has index 3*s + r; uses c^r t = t c^-r
    table = np.zeros((6, 6), dtype=np.intp)
    for a, b in product(range(6), repeat=2):
        sa, ra = divmod(a, 3)
        sb, rb = divmod(b, 3)
        if sb == 0:
            table[a, b] = 3 * sa + (ra + rb) % 3
        else:
            table[a, b] = 3 * ((sa + 1) % 2) + (rb - ra) % 3
    return table


S3 = FiniteGroup(_s3_table(), names=('e', 'c', 'c2', 't', 'tc', 'tc2'))
E, C, C2, T, TC, TC2 = range(6)


def multiply(a, b) -> int:
    return S3.multiply(a, b)


def inverse(a) -> int:
    return S3.inverse(a)


def conjugacy_class(g) -> frozenset[int]:
    return S3.conjugacy_class(g)


def normalizer(g) -> frozenset[int]:
    return S3.normalizer(g)


@dataclass(frozen=True)
class AnyonLabel:
    """One row of the D(S3) anyon table.

    ``character`` is the per-element value list in canonical order, present only for
    the {A, B, G} labels. ``normalizer_irrep`` maps a normalizer element to its
    (1x1 here) irrep matrix and is what the generic ribbon construction consumes.
    """
    tag: str
    class_representative: int
    normalizer_label: str
    irrep: str
    quantum_dimension: int
    kind: str
    character: tuple[complex, ...] | None = None
    normalizer_irrep: Callable[[int], np.ndarray] | None = field(default=None, compare=False, repr=False)

    @property
    def conjugacy_class(self) -> frozenset[int]:
        return S3.conjugacy_class(self.class_representative)

    @property
    def normalizer(self) -> frozenset[int]:
        return S3.normalizer(self.class_representative)

    @property
    def irrep_dimension(self) -> int:
        if self.normalizer_irrep is None:
            raise GroupError(f"no irrep data stored for anyon {self.tag}")
        return self.normalizer_irrep(S3.identity).shape[0]


def _trivial(n):
    return np.ones((1, 1), dtype=complex)


def _sign(n):
    return np.full((1, 1), 1.0 if n < 3 else -1.0, dtype=complex)


def _z3_omega(n):
    if n not in (E, C, C2):
        raise GroupError(f"{S3.name(n)} is not in the normalizer {{e, c, c2}}")
    return np.full((1, 1), OMEGA ** n, dtype=complex)


ANYONS = {
    'A': AnyonLabel('A', E, 'S3', 'Gamma_1', 1, 'vacuum',
                    (1, 1, 1, 1, 1, 1), _trivial),
    'B': AnyonLabel('B', E, 'S3', 'Gamma_-1', 1, 'chargeon',
                    (1, 1, 1, -1, -1, -1), _sign),
    'C': AnyonLabel('C', E, 'S3', 'Gamma_2', 2, 'chargeon'),
    'D': AnyonLabel('D', T, 'Z2', 'Gamma_1', 3, 'fluxon'),
    'E': AnyonLabel('E', T, 'Z2', 'Gamma_-1', 3, 'dyon'),
    'F': AnyonLabel('F', C, 'Z3', 'Gamma_1', 2, 'fluxon'),
    'G': AnyonLabel('G', C, 'Z3', 'Gamma_omega', 2, 'dyon',
                    (1, OMEGA, OMEGA_BAR, 0, 0, 0), _z3_omega),
    'H': AnyonLabel('H', C, 'Z3', 'Gamma_omega_bar', 2, 'dyon'),
}


def anyon(label: AnyonLabel | str) -> AnyonLabel:
    if isinstance(label, AnyonLabel):
        return label
    try:
        return ANYONS[label]
    except KeyError:
        raise GroupError(f"unknown anyon label {label!r}") from None


def character(label: AnyonLabel | str, g) -> complex:
    """Tabulated character value of ``label`` at ``g``.

    For ``G`` this is the normalizer irrep ``Gamma_omega`` extended by zero off
    ``{e, c, c2}``; it is therefore not a class function of S3.
    """
    lab = anyon(label)
    if lab.character is None:
        raise GroupError(f"no character data stored for anyon {lab.tag}")
    return complex(lab.character[S3.element(g)])


def omega_power(z: complex, tol: float = 1e-10) -> int | None:
    """Return ``k`` if ``z`` equals ``OMEGA**k`` within ``tol``, else None."""
    for k in range(3):
        if abs(z - OMEGA ** k) < tol:
            return k
    return None
