"""Canonical JSON, CSV, and DOT forms for spaces, actions, and reports.

All serialization is deterministic: sorted keys, two-space indent, one
trailing newline, rationals as "p/q" text.  Import of an exported
document re-exports byte-identically.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

import numpy as np

from .actions import EmpiricalIRS, Homomorphism, SchreierBall
from .fullgroup import FullGroupElement
from .space import FiniteSpace

_FRACTION_RE = re.compile(r"^(-?\d+)(?:/(\d+))?$")


def fraction_to_text(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    match = _FRACTION_RE.match(text.strip())
    if not match:
        raise ValueError(f"expected a rational like '2/3', got {text!r}")
    denominator = int(match.group(2) or 1)
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(match.group(1)), denominator)


def dumps_canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# -- spaces -----------------------------------------------------------------


def space_to_doc(space: FiniteSpace) -> dict:
    return {
        "n_atoms": space.n_atoms,
        "classes": [list(cls) for cls in space.classes()],
        "filtration_log2_levels": space.filtration_levels,
    }


def space_from_doc(doc: dict) -> FiniteSpace:
    n = int(doc["n_atoms"])
    class_of = np.full(n, -1, dtype=np.int64)
    for cid, atoms in enumerate(doc["classes"]):
        for atom in atoms:
            if not 0 <= atom < n or class_of[atom] != -1:
                raise ValueError("classes must partition the atoms")
            class_of[atom] = cid
    if (class_of == -1).any():
        raise ValueError("classes must cover every atom")
    levels = doc.get("filtration_log2_levels")
    return FiniteSpace(n, class_of, None if levels is None else int(levels))


# -- homomorphisms ----------------------------------------------------------


def hom_to_doc(hom: Homomorphism) -> dict:
    return {
        "n_atoms": hom.space.n_atoms,
        "rank": hom.rank,
        "gens": [g.forward.tolist() for g in hom.gens],
    }


def hom_from_doc(doc: dict, space: FiniteSpace | None = None) -> Homomorphism:
    """Rebuild an action; the document does not carry the relation.

    Without an explicit space a single-class space with the largest
    dyadic filtration is assumed, which accepts any permutation tables.
    """
    n = int(doc["n_atoms"])
    if space is None:
        space = FiniteSpace.single_class(n)
    elif space.n_atoms != n:
        raise ValueError("space size does not match the document")
    gens = doc["gens"]
    if len(gens) != int(doc["rank"]):
        raise ValueError("rank does not match the generator count")
    return Homomorphism(space, tuple(FullGroupElement.from_forward(space, g) for g in gens))


# -- distributions and graphs -----------------------------------------------


def irs_to_csv(irs: EmpiricalIRS) -> str:
    lines = ["trace,numerator,denominator"]
    for trace, weight in irs.weights:
        lines.append(f"{trace.hex()},{weight.numerator},{weight.denominator}")
    return "\n".join(lines) + "\n"


def schreier_ball_to_dot(ball: SchreierBall) -> str:
    """DOT text; only positively labeled edges, direction encodes inverses."""
    positive = [(v, l, t) for v, l, t in ball.edges if l > 0]
    inside = set(ball.vertices)
    nodes = sorted(inside | {v for v, _, t in positive} | {t for _, _, t in positive})
    lines = ["digraph schreier_ball {"]
    for v in nodes:
        attrs = [f'label="{v}"']
        if v == ball.root:
            attrs.append("shape=doublecircle")
        elif v not in inside:
            attrs.append("style=dashed")
        lines.append(f'  a{v} [{", ".join(attrs)}];')
    for v, letter, t in positive:
        lines.append(f'  a{v} -> a{t} [label="s{letter}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
