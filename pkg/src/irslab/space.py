"""Finite uniform probability spaces carrying an equivalence relation.

Atoms are the integers 0..n_atoms-1, each of measure 1/n_atoms.  The
equivalence relation is stored as a class id per atom.  An optional
dyadic filtration marks the space as explicitly hyperfinite: level j
groups the atoms into consecutive blocks of size 2**j, level 0 is the
discrete partition, and every top-level block must lie inside a single
class.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


def _frozen_array(values, dtype=np.int64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _max_dyadic_levels(sizes: Sequence[int]) -> int:
    """Largest j such that every size is divisible by 2**j."""
    if not sizes or min(sizes) < 1:
        raise ValueError("class sizes must be positive")
    level = 0
    while all(s % (2 ** (level + 1)) == 0 for s in sizes):
        level += 1
    return level


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    """Uniform atoms 0..n_atoms-1 with a class id per atom."""

    n_atoms: int
    class_of: np.ndarray
    filtration_levels: int | None = None

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("space needs at least one atom")
        object.__setattr__(self, "class_of", _frozen_array(self.class_of))
        if self.class_of.shape != (self.n_atoms,):
            raise ValueError("class_of must assign one class id per atom")
        n_classes = int(self.class_of.max()) + 1
        if int(self.class_of.min()) < 0:
            raise ValueError("class ids must be nonnegative")
        counts = np.bincount(self.class_of, minlength=n_classes)
        if (counts == 0).any():
            raise ValueError("class ids must be 0..k-1 with no empty class")
        levels = self.filtration_levels
        if levels is not None:
            if levels < 0:
                raise ValueError("filtration level count must be nonnegative")
            width = 2 ** levels
            if self.n_atoms % width != 0:
                raise ValueError("atom count must be divisible by the top block size")
            blocks = self.class_of.reshape(-1, width)
            if (blocks != blocks[:, :1]).any():
                raise ValueError("top filtration blocks must lie inside one class")

    # -- constructors ------------------------------------------------

    @staticmethod
    def single_class(n_atoms: int, levels: int | None | str = "auto") -> "FiniteSpace":
        """Space whose relation has one class covering every atom."""
        if levels == "auto":
            levels = _max_dyadic_levels([n_atoms])
        return FiniteSpace(n_atoms, np.zeros(n_atoms, dtype=np.int64), levels)

    @staticmethod
    def from_class_sizes(sizes: Sequence[int], levels: int | None | str = "auto") -> "FiniteSpace":
        """Space with classes given by consecutive runs of the stated sizes."""
        if not sizes or any(s < 1 for s in sizes):
            raise ValueError("class sizes must be positive")
        ids = np.repeat(np.arange(len(sizes), dtype=np.int64), list(sizes))
        if levels == "auto":
            levels = _max_dyadic_levels(list(sizes))
        return FiniteSpace(int(sum(sizes)), ids, levels)

    # -- queries -----------------------------------------------------

    @property
    def class_count(self) -> int:
        return int(self.class_of.max()) + 1

    @property
    def is_single_class(self) -> bool:
        return self.class_count == 1

    @cached_property
    def _classes(self) -> tuple[tuple[int, ...], ...]:
        order = np.argsort(self.class_of, kind="stable")
        bounds = np.searchsorted(self.class_of[order], np.arange(self.class_count + 1))
        return tuple(
            tuple(int(a) for a in order[bounds[c]:bounds[c + 1]])
            for c in range(self.class_count)
        )

    def classes(self) -> tuple[tuple[int, ...], ...]:
        """Atoms of each class, sorted, indexed by class id."""
        return self._classes

    def block_index(self, level: int) -> np.ndarray:
        """Filtration block id of every atom at the given level."""
        if self.filtration_levels is None:
            raise ValueError("space has no filtration")
        if not 0 <= level <= self.filtration_levels:
            raise ValueError(f"level must be in 0..{self.filtration_levels}")
        return np.arange(self.n_atoms) // (2 ** level)

    def measure(self, atoms: Iterable[int] | int) -> Fraction:
        """Exact measure of an atom set (or of a count of atoms)."""
        count = atoms if isinstance(atoms, int) else len(set(atoms))
        return Fraction(count, self.n_atoms)

    def __eq__(self, other):
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return (
            self.n_atoms == other.n_atoms
            and self.filtration_levels == other.filtration_levels
            and np.array_equal(self.class_of, other.class_of)
        )

    def __hash__(self):
        return hash((self.n_atoms, self.filtration_levels, self.class_of.tobytes()))

    def __repr__(self):
        return (
            f"FiniteSpace(n_atoms={self.n_atoms}, classes={self.class_count}, "
            f"filtration_levels={self.filtration_levels})"
        )
