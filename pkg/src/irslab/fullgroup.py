"""Class-preserving permutations of a finite space, with exact metric.

A full-group element is a bijection of the atoms that moves every atom
within its own class.  Elements store both permutation tables, compose
by array gather, and measure distance by the exact fraction of atoms on
which two elements disagree.  No floats anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .space import FiniteSpace, _frozen_array


@dataclass(frozen=True, eq=False)
class FullGroupElement:
    """A permutation of the atoms preserving the equivalence classes."""

    space: FiniteSpace
    forward: np.ndarray
    inverse: np.ndarray

    @classmethod
    def from_forward(cls, space: FiniteSpace, images) -> "FullGroupElement":
        """Build and validate an element from its forward table."""
        forward = np.asarray(images, dtype=np.int64)
        if forward.shape != (space.n_atoms,):
            raise ValueError("forward table must list one image per atom")
        if forward.min(initial=0) < 0 or forward.max(initial=0) >= space.n_atoms:
            raise ValueError("images out of range")
        counts = np.bincount(forward, minlength=space.n_atoms)
        if (counts != 1).any():
            raise ValueError("forward table is not a bijection")
        if (space.class_of[forward] != space.class_of).any():
            bad = int(np.nonzero(space.class_of[forward] != space.class_of)[0][0])
            raise ValueError(f"atom {bad} leaves its class; not a full-group element")
        inverse = np.empty_like(forward)
        inverse[forward] = np.arange(space.n_atoms)
        return cls(space, _frozen_array(forward), _frozen_array(inverse))

    @classmethod
    def identity(cls, space: FiniteSpace) -> "FullGroupElement":
        ident = _frozen_array(np.arange(space.n_atoms))
        return cls(space, ident, ident)

    @classmethod
    def odometer(cls, space: FiniteSpace) -> "FullGroupElement":
        """The standard single cycle x -> x+1 mod n_atoms."""
        if not space.is_single_class:
            raise ValueError("odometer needs a single-class relation")
        n = space.n_atoms
        forward = _frozen_array((np.arange(n) + 1) % n)
        inverse = _frozen_array((np.arange(n) - 1) % n)
        return cls(space, forward, inverse)

    # -- group operations ---------------------------------------------

    def __call__(self, atom: int) -> int:
        return int(self.forward[atom])

    def __mul__(self, other: "FullGroupElement") -> "FullGroupElement":
        """Composition: (a * b)(x) = a(b(x)), so b acts first."""
        if self.space != other.space:
            raise ValueError("elements live on different spaces")
        forward = _frozen_array(self.forward[other.forward])
        inverse = _frozen_array(other.inverse[self.inverse])
        return FullGroupElement(self.space, forward, inverse)

    def inv(self) -> "FullGroupElement":
        return FullGroupElement(self.space, self.inverse, self.forward)

    def __pow__(self, exponent: int) -> "FullGroupElement":
        base = self if exponent >= 0 else self.inv()
        k = abs(exponent)
        result = FullGroupElement.identity(self.space)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- structure ----------------------------------------------------

    def support(self) -> np.ndarray:
        """Atoms moved by the element, ascending."""
        return np.nonzero(self.forward != np.arange(self.space.n_atoms))[0]

    def cycles(self) -> list[tuple[int, ...]]:
        """All cycles (fixed points included), each starting at its least atom."""
        n = self.space.n_atoms
        seen = np.zeros(n, dtype=bool)
        out = []
        for start in range(n):
            if seen[start]:
                continue
            cyc = []
            x = start
            while not seen[x]:
                seen[x] = True
                cyc.append(x)
                x = int(self.forward[x])
            out.append(tuple(cyc))
        return out

    def __eq__(self, other):
        if not isinstance(other, FullGroupElement):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.forward, other.forward)

    def __hash__(self):
        return hash((self.space, self.forward.tobytes()))

    def __repr__(self):
        return f"FullGroupElement({self.forward.tolist()})"


@dataclass(frozen=True)
class CycleStructure:
    """Multiset of cycle lengths with the flags experiments care about."""

    lengths: tuple[int, ...]
    is_single_cycle: bool
    min_cycle_length: int


def uniform_metric(a: FullGroupElement, b: FullGroupElement) -> Fraction:
    """Measure of the set where two elements disagree, exactly."""
    if a.space != b.space:
        raise ValueError("metric needs elements on the same space")
    diff = int(np.count_nonzero(a.forward != b.forward))
    return Fraction(diff, a.space.n_atoms)


def cycle_structure(element: FullGroupElement) -> CycleStructure:
    """Cycle-length multiset of an element."""
    lengths = tuple(sorted(len(c) for c in element.cycles()))
    n = element.space.n_atoms
    return CycleStructure(lengths, lengths == (n,), lengths[0])


def conjugate_to_standard_cycle(element: FullGroupElement) -> FullGroupElement:
    """Return c with c * element * c.inv() equal to the odometer.

    Only defined for a single cycle through every atom of a single-class
    space; c relabels the cycle orbit starting from atom 0, so the
    odometer itself maps to the identity.
    """
    if not element.space.is_single_class:
        raise ValueError("conjugation to the standard cycle needs a single class")
    if not cycle_structure(element).is_single_cycle:
        raise ValueError("element is not a single cycle")
    n = element.space.n_atoms
    forward = np.empty(n, dtype=np.int64)
    x = 0
    for j in range(n):
        forward[x] = j
        x = int(element.forward[x])
    return FullGroupElement.from_forward(element.space, forward)
