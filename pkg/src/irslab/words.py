"""Reduced words in a finitely generated free group.

A letter is a nonzero signed integer: k is the k-th generator, -k its
inverse.  Words are kept freely reduced.  The text form writes letters
as s1, s2^-1, and so on, separated by spaces.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word; the empty tuple is the identity."""

    rank: int
    letters: tuple[int, ...]

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        for letter in self.letters:
            if letter == 0 or abs(letter) > self.rank:
                raise ValueError(f"letter {letter} out of range for rank {self.rank}")
        for a, b in zip(self.letters, self.letters[1:]):
            if a == -b:
                raise ValueError("word is not reduced")

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        if self.rank != other.rank:
            raise ValueError("words have different ranks")
        return reduce_letters(self.rank, self.letters + other.letters)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(self.rank, tuple(-l for l in reversed(self.letters)))

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]

    def __str__(self):
        return format_word(self)


def reduce_letters(rank: int, letters) -> ReducedWord:
    """Freely reduce a letter sequence."""
    stack: list[int] = []
    for letter in letters:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return ReducedWord(rank, tuple(stack))


def cyclic_reduce(word: ReducedWord) -> tuple[ReducedWord, ReducedWord]:
    """Split word as conjugator * core * conjugator^-1 with core cyclically reduced."""
    letters = list(word.letters)
    stripped = 0
    while len(letters) >= 2 and letters[0] == -letters[-1]:
        letters = letters[1:-1]
        stripped += 1
    conjugator = ReducedWord(word.rank, word.letters[:stripped])
    core = ReducedWord(word.rank, tuple(letters))
    return conjugator, core


class FreeBall:
    """All reduced words of length at most radius, in length-lex order.

    Besides the word list, the ball stores for each word its first
    letter and the index of the word with that letter removed, so images
    of every ball word at an atom can be filled in one linear pass.
    """

    def __init__(self, rank: int, radius: int):
        if rank < 1 or radius < 0:
            raise ValueError("need rank >= 1 and radius >= 0")
        self.rank = rank
        self.radius = radius
        letter_order = [l for i in range(1, rank + 1) for l in (i, -i)]
        words: list[tuple[int, ...]] = [()]
        first_letter = [0]
        parent = [0]
        start, end = 0, 1
        for _ in range(radius):
            for letter in letter_order:
                for idx in range(start, end):
                    tail = words[idx]
                    if tail and tail[0] == -letter:
                        continue
                    words.append((letter,) + tail)
                    first_letter.append(letter)
                    parent.append(idx)
            start, end = end, len(words)
        self.words = tuple(ReducedWord(rank, w) for w in words)
        self.first_letter = np.array(first_letter, dtype=np.int64)
        self.parent = np.array(parent, dtype=np.int64)
        self.index = {w: i for i, w in enumerate(words)}
        inv = [self.index[tuple(-l for l in reversed(w))] for w in words]
        self.inverse_index = np.array(inv, dtype=np.int64)

    def __len__(self):
        return len(self.words)

    def word_index(self, word: ReducedWord) -> int:
        return self.index[word.letters]


@lru_cache(maxsize=32)
def ball(rank: int, radius: int) -> FreeBall:
    """Cached ball of reduced words of length <= radius."""
    return FreeBall(rank, radius)


def ball_size(rank: int, radius: int) -> int:
    """Closed-form count: 1 + sum over k of 2r(2r-1)^(k-1)."""
    return 1 + sum(2 * rank * (2 * rank - 1) ** (k - 1) for k in range(1, radius + 1))


_TOKEN_RE = re.compile(r"^s(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str, rank: int) -> ReducedWord:
    """Parse the text form, e.g. 's1 s2^-1 s1'; empty text is the identity."""
    letters: list[int] = []
    for token in text.split():
        match = _TOKEN_RE.match(token)
        if not match:
            raise ValueError(f"bad letter token {token!r}")
        index = int(match.group(1))
        power = int(match.group(2)) if match.group(2) else 1
        if index < 1 or index > rank:
            raise ValueError(f"generator index {index} out of range for rank {rank}")
        sign = 1 if power > 0 else -1
        letters.extend([sign * index] * abs(power))
    return reduce_letters(rank, letters)


def format_word(word: ReducedWord) -> str:
    """Inverse of parse_word, one token per letter."""
    return " ".join(f"s{l}" if l > 0 else f"s{-l}^-1" for l in word.letters)
