"""Diagnostics that certify properties of actions by exact computation.

Everything here returns exact rationals or booleans backed by full
enumeration at the scales the guards allow: Foelner-set search with
honest boundary ratios, transitivity degree by tuple-orbit closure,
realization of a prescribed tower permutation by bidirectional word
search, triviality of a word per orbit, the ball-stability bound, and
seeded genericity sweeps over perturbation balls.
"""

from __future__ import annotations

import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .actions import (
    Homomorphism,
    hom_metric,
    orbit,
    orbits,
    trace_code_matrix,
)
from .rng import STREAM_SWEEP, derive_rng, random_full_group_element
from .words import ReducedWord, ball_size, format_word, parse_word


class AnalysisError(ValueError):
    """A diagnostic's brute-force guard or precondition failed."""


# -- Foelner search ----------------------------------------------------------


def schreier_boundary_ratio(hom: Homomorphism, subset) -> Fraction:
    """max over generators g of |gF symm-diff F| / |F| for F = subset."""
    atoms = np.asarray(sorted(set(int(x) for x in subset)), dtype=np.int64)
    if atoms.size == 0:
        raise ValueError("boundary ratio needs a nonempty set")
    member = np.zeros(hom.space.n_atoms, dtype=bool)
    member[atoms] = True
    worst = Fraction(0)
    for g in hom.gens:
        escaped = int(np.count_nonzero(~member[g.forward[atoms]]))
        worst = max(worst, Fraction(2 * escaped, atoms.size))
    return worst


@dataclass(frozen=True)
class FolnerResult:
    subset: frozenset[int]
    ratio: Fraction
    success: bool


_GREEDY_STEP_BUDGET = 4096


def folner_search(hom: Homomorphism, root: int, l: int, radius: int) -> FolnerResult:
    """Search for a small-boundary set inside the orbit of the root.

    Candidates are nonempty connected subsets of the orbit of size at
    most half the orbit (whole-orbit sets are trivially invariant, so
    they are excluded): every cycle of the last generator meeting the
    radius-`radius` Schreier ball of the root, and every prefix of a
    greedy growth that starts at the root and repeatedly adds the
    adjacent pool atom minimizing the boundary ratio.  The pool is the
    ball plus those cycles.  Returns the best candidate's exact ratio;
    success means ratio < 1/l.  An orbit of size one has no valid
    candidate and reports failure with ratio 1.
    """
    if l < 1:
        raise ValueError("l must be at least 1")
    orb = orbit(hom, root)
    cap = len(orb) // 2
    if cap == 0:
        return FolnerResult(frozenset(), Fraction(1), False)
    threshold = Fraction(1, l)

    # plain vertex BFS; schreier_ball would also build the 2R+1 trace code,
    # which is astronomically large at search radii
    in_ball = {root}
    frontier_bfs = [root]
    for _ in range(radius):
        nxt = []
        for x in frontier_bfs:
            for g in hom.gens:
                for y in (int(g.forward[x]), int(g.inverse[x])):
                    if y not in in_ball:
                        in_ball.add(y)
                        nxt.append(y)
        frontier_bfs = nxt
    pool = set(in_ball)
    cycle_candidates = []
    for cyc in hom.gens[-1].cycles():
        if any(v in in_ball for v in cyc):
            pool.update(cyc)
            if 0 < len(cyc) <= cap:
                cycle_candidates.append(frozenset(cyc))

    best_set: frozenset[int] = frozenset([root])
    best_ratio = schreier_boundary_ratio(hom, best_set)
    for cand in sorted(cycle_candidates, key=lambda c: (len(c), sorted(c))):
        ratio = schreier_boundary_ratio(hom, cand)
        if ratio < best_ratio or (ratio == best_ratio and len(cand) < len(best_set)):
            best_set, best_ratio = cand, ratio

    # greedy growth with incremental per-generator escape counts
    n = hom.space.n_atoms
    member = np.zeros(n, dtype=bool)
    member[root] = True
    current = [root]
    out_count = []
    in_count = []
    for g in hom.gens:
        out_count.append(0 if g.forward[root] == root else 1)
        in_count.append(0 if g.inverse[root] == root else 1)

    def neighbors(x):
        for g in hom.gens:
            yield int(g.forward[x])
            yield int(g.inverse[x])

    frontier = {y for y in neighbors(root) if y in pool and y != root}
    evaluations = 0
    while len(current) < min(cap, len(pool)):
        if not frontier or evaluations > _GREEDY_STEP_BUDGET:
            break
        evaluations += len(frontier)
        pick = None
        for y in sorted(frontier):
            worst = Fraction(0)
            for gi, g in enumerate(hom.gens):
                out = out_count[gi] - (1 if member[g.inverse[y]] else 0)
                fy = int(g.forward[y])
                if not member[fy] and fy != y:
                    out += 1
                inc = in_count[gi] - (1 if member[g.forward[y]] else 0)
                by = int(g.inverse[y])
                if not member[by] and by != y:
                    inc += 1
                worst = max(worst, Fraction(out + inc, len(current) + 1))
            if pick is None or (worst, y) < pick[:2]:
                pick = (worst, y, None)
        ratio, y, _ = pick
        member[y] = True
        current.append(y)
        atoms = np.asarray(current, dtype=np.int64)
        for gi, g in enumerate(hom.gens):
            out_count[gi] = int(np.count_nonzero(~member[g.forward[atoms]]))
            in_count[gi] = int(np.count_nonzero(~member[g.inverse[atoms]]))
        frontier.discard(y)
        frontier.update(z for z in neighbors(y) if z in pool and not member[z])
        if ratio < best_ratio or (ratio == best_ratio and len(current) < len(best_set)):
            best_set, best_ratio = frozenset(current), ratio

    return FolnerResult(best_set, best_ratio, best_ratio < threshold)


# -- transitivity degree -----------------------------------------------------

_TUPLE_SPACE_LIMIT = 5_000_000


def transitivity_degree(hom: Homomorphism, root: int, k_max: int) -> int:
    """Largest k <= k_max with a transitive action on distinct k-tuples.

    Restricted to the orbit of the root; brute-force tuple closure with
    an orbit-size guard of 12.  Singleton orbits are vacuously
    1-transitive.
    """
    orb = sorted(orbit(hom, root))
    n = len(orb)
    if n > 12:
        raise AnalysisError(f"orbit of size {n} exceeds the brute-force guard of 12")
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    k_cap = min(k_max, n)
    relabel = {x: i for i, x in enumerate(orb)}
    tables = []
    for g in hom.gens:
        tables.append(tuple(relabel[int(g.forward[x])] for x in orb))
        tables.append(tuple(relabel[int(g.inverse[x])] for x in orb))

    degree = 1
    for k in range(2, k_cap + 1):
        total = 1
        for i in range(k):
            total *= n - i
        if total > _TUPLE_SPACE_LIMIT:
            raise AnalysisError(f"{total} ordered {k}-tuples exceed the enumeration limit")
        start = tuple(range(k))
        seen = {start}
        queue = [start]
        while queue:
            t = queue.pop()
            for table in tables:
                image = tuple(table[c] for c in t)
                if image not in seen:
                    seen.add(image)
                    queue.append(image)
        if len(seen) != total:
            break
        degree = k
    return degree


# -- tower-permutation realization -------------------------------------------


def _apply_diagonal(keys: np.ndarray, table: np.ndarray, n: int, m: int) -> np.ndarray:
    """Apply one generator to the tuple part of packed (tuple, tag) keys."""
    tags = keys % n
    code = keys // n
    out = np.zeros_like(keys)
    for i in range(m):
        coord = (code // n ** (m - 1 - i)) % n
        out = out * n + table[coord]
    return out * n + tags


def realizes_tau_fraction(hom: Homomorphism, m: int, tau, radius: int) -> Fraction:
    """Fraction of atoms where some ball word permutes the tower fiber by tau.

    An atom x qualifies when a reduced word w of length <= radius maps
    (x, sigma x, ..., sigma^(m-1) x) coordinatewise to
    (sigma^(tau(0)) x, ..., sigma^(tau(m-1)) x), sigma being the first
    generator.  Exact: bidirectional breadth-first closure over packed
    (tuple, source atom) states, expanding the smaller side; an atom is
    settled positively on the first meet and negatively when one of its
    frontiers dies or the combined depth reaches the radius.  Cost grows
    with the diagonal orbit of the fiber tuple; sized for small spaces.
    """
    if not hom.is_lean_aperiodic:
        raise AnalysisError("needs a single-cycle first generator")
    if m < 1:
        raise ValueError("m must be at least 1")
    tau = tuple(int(t) for t in tau)
    if sorted(tau) != list(range(m)):
        raise ValueError(f"tau must be a permutation of 0..{m - 1}")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    n = hom.space.n_atoms
    if n ** (m + 1) >= 2 ** 63:
        raise AnalysisError(f"packed state space n^(m+1) = {n}^{m + 1} overflows 64-bit keys")

    sigma = hom.gens[0]
    powers = np.empty((m, n), dtype=np.int64)
    powers[0] = np.arange(n)
    for i in range(1, m):
        powers[i] = sigma.forward[powers[i - 1]]

    def pack(rows) -> np.ndarray:
        out = np.zeros(n, dtype=np.int64)
        for i in range(m):
            out = out * n + rows[i]
        return out * n + np.arange(n)

    start = pack([powers[i] for i in range(m)])
    target = pack([powers[tau[i]] for i in range(m)])

    tables = [g.forward for g in hom.gens] + [g.inverse for g in hom.gens]
    realized = np.zeros(n, dtype=bool)
    dead = np.zeros(n, dtype=bool)

    visited = [np.sort(start), np.sort(target)]
    frontier = [visited[0].copy(), visited[1].copy()]
    met = np.intersect1d(visited[0], visited[1], assume_unique=True)
    realized[met % n] = True
    depth = [0, 0]

    def purge(side):
        keep = ~(realized | dead)
        visited[side] = visited[side][keep[visited[side] % n]]
        frontier[side] = frontier[side][keep[frontier[side] % n]]

    purge(0)
    purge(1)
    while not (realized | dead).all() and depth[0] + depth[1] < radius:
        side = 0 if frontier[0].size <= frontier[1].size else 1
        if frontier[side].size == 0:
            # closure complete on this side: the rest can never meet
            dead[~(realized | dead)] = True
            break
        grown = [_apply_diagonal(frontier[side], t, n, m) for t in tables]
        fresh = np.unique(np.concatenate(grown))
        fresh = fresh[~np.isin(fresh, visited[side], assume_unique=False)]
        depth[side] += 1
        visited[side] = np.union1d(visited[side], fresh)
        frontier[side] = fresh
        met = np.intersect1d(fresh, visited[1 - side], assume_unique=True)
        realized[met % n] = True
        live = np.unique(frontier[side] % n)
        stuck = ~(realized | dead)
        stuck[live] = False
        dead |= stuck
        purge(0)
        purge(1)
    return Fraction(int(np.count_nonzero(realized)), n)


# -- per-orbit word triviality ------------------------------------------------


def core_check(hom: Homomorphism, word: ReducedWord) -> Fraction:
    """Size-weighted fraction of orbits on which the word acts trivially."""
    if len(word) == 0:
        raise ValueError("word must be nonempty")
    g = hom.element_of(word)
    fixed = g.forward == np.arange(hom.space.n_atoms)
    trivial_atoms = 0
    for orb in orbits(hom):
        if fixed[np.asarray(orb, dtype=np.int64)].all():
            trivial_atoms += len(orb)
    return Fraction(trivial_atoms, hom.space.n_atoms)


# -- ball stability ------------------------------------------------------------


@dataclass(frozen=True)
class BallStability:
    observed: Fraction
    bound: Fraction


def ball_stability_check(a: Homomorphism, b: Homomorphism, radius: int) -> BallStability:
    """Fraction of atoms whose radius-R balls differ, against the union bound.

    observed = fraction of atoms x whose rooted balls under the two
    actions are non-isomorphic (trace codes at radius 2R+1 differ);
    bound = delta * (2R+1) * |B(2R+1)| with delta the metric between the
    actions.  The inequality observed <= bound always holds; a violation
    means a broken invariant and raises.
    """
    if a.space != b.space or a.rank != b.rank:
        raise ValueError("actions must share space and rank")
    word_radius = 2 * radius + 1
    codes_a = trace_code_matrix(a, word_radius)
    codes_b = trace_code_matrix(b, word_radius)
    differ = int(np.count_nonzero((codes_a != codes_b).any(axis=1)))
    observed = Fraction(differ, a.space.n_atoms)
    bound = hom_metric(a, b) * word_radius * ball_size(a.rank, word_radius)
    if observed > bound:
        raise RuntimeError(f"stability bound violated: observed {observed} > bound {bound}")
    return BallStability(observed, bound)


# -- classwise symmetric generation --------------------------------------------


def _closure(perms: list[tuple[int, ...]], limit: int) -> set[tuple[int, ...]]:
    degree = len(perms[0])
    identity = tuple(range(degree))
    group = {identity}
    queue = [identity]
    while queue:
        p = queue.pop()
        for q in perms:
            composed = tuple(q[p[i]] for i in range(degree))
            if composed not in group:
                if len(group) >= limit:
                    raise AnalysisError("group closure exceeded its limit")
                group.add(composed)
                queue.append(composed)
    return group


def generates_classwise_symmetric(hom: Homomorphism) -> bool:
    """Whether the generators restricted to each class generate its full Sym.

    Brute force, guarded to orbit sizes at most 8.  When the answer is
    true, every orbit equals its class and the transitivity degree
    reaches the orbit size; that consequence is re-checked here.
    """
    for orb in orbits(hom):
        if len(orb) > 8:
            raise AnalysisError(f"orbit of size {len(orb)} exceeds the brute-force guard of 8")
    for cls in hom.space.classes():
        if len(cls) == 1:
            continue
        if orbit(hom, cls[0]) != frozenset(cls):
            return False
        relabel = {x: i for i, x in enumerate(cls)}
        perms = [tuple(relabel[int(g.forward[x])] for x in cls) for g in hom.gens]
        if len(_closure(perms, factorial(len(cls)) + 1)) != factorial(len(cls)):
            return False
    for cls in hom.space.classes():
        if transitivity_degree(hom, cls[0], len(cls)) != len(cls):
            raise AssertionError("full symmetric generation must force full transitivity")
    return True


# -- genericity sweeps ----------------------------------------------------------


@dataclass(frozen=True)
class SweepProperty:
    """Parsed named predicate evaluated on each sampled perturbation."""

    name: str
    args: tuple

    @property
    def text(self) -> str:
        inner = ",".join(str(a) for a in self.args)
        return f"{self.name}({inner})"


def parse_property(text: str, rank: int) -> SweepProperty:
    """Parse folner(l,R), realizes(m,tau,R), corefree(word), periodic(j)."""
    match = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
    if not match:
        raise ValueError(f"cannot parse property {text!r}")
    name, inner = match.group(1), match.group(2)
    parts = [p.strip() for p in inner.split(",")] if inner.strip() else []
    if name == "folner":
        if len(parts) != 2:
            raise ValueError("folner takes (l, radius)")
        return SweepProperty("folner", (int(parts[0]), int(parts[1])))
    if name == "realizes":
        if len(parts) != 3:
            raise ValueError("realizes takes (m, tau, radius)")
        tau = tuple(int(t) for t in parts[1].split())
        return SweepProperty("realizes", (int(parts[0]), " ".join(map(str, tau)), int(parts[2])))
    if name == "corefree":
        if len(parts) != 1:
            raise ValueError("corefree takes (word)")
        return SweepProperty("corefree", (format_word(parse_word(parts[0], rank)),))
    if name == "periodic":
        if len(parts) != 1:
            raise ValueError("periodic takes (level)")
        return SweepProperty("periodic", (int(parts[0]),))
    raise ValueError(f"unknown property {name!r}")


def _property_holds(hom: Homomorphism, prop: SweepProperty, rng) -> bool:
    if prop.name == "folner":
        l, radius = prop.args
        root = int(rng.integers(hom.space.n_atoms))
        return folner_search(hom, root, l, radius).success
    if prop.name == "realizes":
        m, tau_text, radius = prop.args
        tau = tuple(int(t) for t in tau_text.split())
        return realizes_tau_fraction(hom, m, tau, radius) == 1
    if prop.name == "corefree":
        word = parse_word(prop.args[0], hom.rank)
        return core_check(hom, word) == 0
    if prop.name == "periodic":
        blocks = hom.space.block_index(prop.args[0])
        return all((blocks[g.forward] == blocks).all() for g in hom.gens)
    raise ValueError(f"unknown property {prop.name!r}")


def sample_perturbation(hom: Homomorphism, epsilon: Fraction, rng) -> Homomorphism:
    """One draw from the perturbation ball around hom.

    Keeps the first generator and splices every other generator against
    an independent random full-group element on a random set of measure
    at most epsilon/2, so the result stays within epsilon of hom.
    """
    from .constructions import splice

    n = hom.space.n_atoms
    size = (epsilon.numerator * n) // (2 * epsilon.denominator)
    gens = [hom.gens[0]]
    for g in hom.gens[1:]:
        subset = np.sort(rng.choice(n, size=size, replace=False)) if size else np.empty(0, np.int64)
        gens.append(splice(g, subset, random_full_group_element(hom.space, rng)))
    return Homomorphism(hom.space, tuple(gens))


def _sweep_chunk(payload) -> int:
    hom, epsilon, prop, seed, indices = payload
    hits = 0
    for k in indices:
        rng = derive_rng(seed, STREAM_SWEEP, k)
        sample = sample_perturbation(hom, epsilon, rng)
        if _property_holds(sample, prop, rng):
            hits += 1
    return hits


def genericity_sweep(
    hom: Homomorphism, epsilon, samples: int, prop, seed: int
) -> Fraction:
    """Fraction of sampled perturbations satisfying the property.

    Sampling is seeded per sample index, so the result is identical for
    any worker count; IRSLAB_WORKERS sets process parallelism.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    epsilon = Fraction(epsilon)
    if isinstance(prop, str):
        prop = parse_property(prop, hom.rank)
    workers = int(os.environ.get("IRSLAB_WORKERS", "1"))
    indices = list(range(samples))
    if workers <= 1 or samples == 1:
        hits = _sweep_chunk((hom, epsilon, prop, seed, indices))
    else:
        chunks = [
            (hom, epsilon, prop, seed, indices[w::workers])
            for w in range(min(workers, samples))
        ]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            hits = sum(pool.map(_sweep_chunk, chunks))
    return Fraction(hits, samples)
