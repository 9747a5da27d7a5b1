"""Finitely presented groups: words, Tietze moves, abelianization, coset
enumeration, and free/direct products.

Words are tuples of (generator, exponent) letters with exponents +1/-1.
The coset enumerator is the classic HLT strategy with coincidence handling
by union-find, after Holt, "Handbook of Computational Group Theory"; it is
deterministic and returns the exact group order whenever the table closes
within the coset cap.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .linalg import Matrix, smith_normal_form

Word = tuple[tuple[str, int], ...]


def free_reduce(word: Iterable[tuple[str, int]]) -> Word:
    stack: list[tuple[str, int]] = []
    for gen, exp in word:
        if exp not in (1, -1):
            raise ValueError(f"letter exponent must be +1 or -1, got {exp}")
        if stack and stack[-1][0] == gen and stack[-1][1] == -exp:
            stack.pop()
        else:
            stack.append((gen, exp))
    return tuple(stack)


def invert_word(word: Iterable[tuple[str, int]]) -> Word:
    return tuple((gen, -exp) for gen, exp in reversed(tuple(word)))


def cyclic_reduce(word: Word) -> Word:
    word = free_reduce(word)
    while len(word) >= 2 and word[0][0] == word[-1][0] and word[0][1] == -word[-1][1]:
        word = word[1:-1]
    return word


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]


def group_presentation(generators: Sequence[str],
                       relators: Iterable[Iterable[tuple[str, int]]]) -> GroupPresentation:
    """Normalize: freely reduce relators, drop the ones that vanish."""
    generators = tuple(generators)
    if len(set(generators)) != len(generators):
        raise ValueError("duplicate generator names")
    gset = set(generators)
    cleaned = []
    for rel in relators:
        word = free_reduce(rel)
        for gen, _ in word:
            if gen not in gset:
                raise ValueError(f"relator uses undeclared generator {gen!r}")
        if word:
            cleaned.append(word)
    return GroupPresentation(generators, tuple(cleaned))


TRIVIAL_PRESENTATION = GroupPresentation((), ())


@dataclass(frozen=True)
class AbelianInvariants:
    """Free rank plus torsion coefficients in divisibility order."""

    rank: int
    torsion: tuple[int, ...]

    def __str__(self):
        parts = ["Z"] * self.rank + [f"Z_{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "trivial"


def abelian_invariants(p: GroupPresentation) -> AbelianInvariants:
    """Invariants of the abelianization, via SNF of the exponent-sum matrix."""
    if not p.generators:
        return AbelianInvariants(0, ())
    index = {g: i for i, g in enumerate(p.generators)}
    if not p.relators:
        return AbelianInvariants(len(p.generators), ())
    rows = []
    for rel in p.relators:
        row = [0] * len(p.generators)
        for gen, exp in rel:
            row[index[gen]] += exp
        rows.append(row)
    factors = smith_normal_form(Matrix(rows))
    return AbelianInvariants(len(p.generators) - len(factors),
                             tuple(d for d in factors if d > 1))


def tietze_simplify(p: GroupPresentation, max_passes: int = 30) -> GroupPresentation:
    """Shrink a presentation by Tietze moves; defines the same group.

    Per pass: free + cyclic reduction, dropping empty relators, dropping
    duplicates, and eliminating a generator that occurs exactly once in some
    relator (substituting the solved word everywhere).  Stops at a fixpoint
    or after max_passes.
    """
    gens = list(p.generators)
    relators = [cyclic_reduce(r) for r in p.relators]

    def cleanup():
        seen = set()
        out = []
        for rel in relators:
            rel = cyclic_reduce(rel)
            if rel and rel not in seen:
                seen.add(rel)
                out.append(rel)
        return out

    relators = cleanup()
    for _ in range(max_passes):
        # pick the shortest relator exposing a single-occurrence generator
        candidate = None
        for rel in sorted(relators, key=len):
            counts: dict[str, int] = {}
            for gen, _ in rel:
                counts[gen] = counts.get(gen, 0) + 1
            for k, (gen, exp) in enumerate(rel):
                if counts[gen] == 1:
                    candidate = (rel, k, gen, exp)
                    break
            if candidate:
                break
        if candidate is None:
            break
        rel, k, gen, exp = candidate
        before, after = rel[:k], rel[k + 1:]
        # rel = u g^e v = 1  =>  g^e = u^-1 v^-1
        solved = free_reduce(invert_word(before) + invert_word(after))
        if exp == -1:
            solved = invert_word(solved)
        replacement = {1: solved, -1: invert_word(solved)}
        new_relators = []
        for other in relators:
            if other is rel:
                continue
            word: list[tuple[str, int]] = []
            for g, e in other:
                if g == gen:
                    word.extend(replacement[e])
                else:
                    word.append((g, e))
            new_relators.append(free_reduce(tuple(word)))
        gens.remove(gen)
        relators = new_relators
        relators = cleanup()
    return GroupPresentation(tuple(gens), tuple(relators))


def is_trivial_presentation(p: GroupPresentation) -> bool:
    simplified = tietze_simplify(p)
    if not simplified.generators:
        return True
    return todd_coxeter(simplified, max_cosets=10000) == 1


def todd_coxeter(p: GroupPresentation, max_cosets: int = 100000) -> Optional[int]:
    """Order of the presented group, or None when the enumeration hits the cap.

    Coset enumeration over the trivial subgroup; a returned order is exact.
    """
    if max_cosets < 1:
        raise ValueError("max_cosets must be >= 1")
    ngen = len(p.generators)
    if ngen == 0:
        return 1
    index = {g: i for i, g in enumerate(p.generators)}
    width = 2 * ngen

    def letter(gen: str, exp: int) -> int:
        return 2 * index[gen] + (0 if exp == 1 else 1)

    def inv(x: int) -> int:
        return x ^ 1

    relators = [tuple(letter(g, e) for g, e in rel) for rel in p.relators]

    table: list[list[Optional[int]]] = [[None] * width]
    parent = [0]

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    class CapExceeded(Exception):
        pass

    def define(a: int, x: int) -> int:
        if len(table) >= max_cosets:
            raise CapExceeded
        b = len(table)
        table.append([None] * width)
        parent.append(b)
        table[a][x] = b
        table[b][inv(x)] = a
        return b

    merge_queue: deque[int] = deque()

    def merge(a: int, b: int):
        a, b = find(a), find(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        parent[b] = a
        merge_queue.append(b)

    def process_coincidences():
        while merge_queue:
            gamma = merge_queue.popleft()
            row = table[gamma]
            for x in range(width):
                delta = row[x]
                if delta is None:
                    continue
                row[x] = None
                if table[delta][inv(x)] == gamma:
                    table[delta][inv(x)] = None
                mu, nu = find(gamma), find(delta)
                mx = table[mu][x]
                if mx is not None:
                    merge(nu, mx)
                    continue
                nx = table[nu][inv(x)]
                if nx is not None:
                    merge(mu, nx)
                else:
                    table[mu][x] = nu
                    table[nu][inv(x)] = mu

    def scan_and_fill(a: int, word: tuple[int, ...]):
        a = find(a)
        f, i = a, 0
        b, j = a, len(word) - 1
        while True:
            while i <= j and table[f][word[i]] is not None:
                f = find(table[f][word[i]])
                i += 1
            if i > j:
                if f != b:
                    merge(f, b)
                    process_coincidences()
                return
            while j >= i and table[b][inv(word[j])] is not None:
                b = find(table[b][inv(word[j])])
                j -= 1
            if j < i:
                merge(f, b)
                process_coincidences()
                return
            if j == i:
                table[f][word[i]] = b
                table[b][inv(word[i])] = f
                return
            f = define(f, word[i])
            i += 1

    try:
        alpha = 0
        while alpha < len(table):
            if find(alpha) != alpha:
                alpha += 1
                continue
            for rel in relators:
                if rel:
                    scan_and_fill(alpha, rel)
                if find(alpha) != alpha:
                    break
            if find(alpha) == alpha:
                for x in range(width):
                    if table[alpha][x] is None:
                        define(alpha, x)
            alpha += 1
    except CapExceeded:
        return None
    live = [a for a in range(len(table)) if find(a) == a]
    # closure check: the table must be a complete action satisfying every relator
    for a in live:
        for x in range(width):
            b = table[a][x]
            assert b is not None, "incomplete coset table"
            assert find(table[find(b)][inv(x)]) == a, "coset table inverse broken"
    for a in live:
        for rel in relators:
            c = a
            for x in rel:
                c = find(table[c][x])
            assert c == a, "relator does not close"
    return len(live)


def _disjoint_union(p1: GroupPresentation, p2: GroupPresentation):
    """Union of generator sets, renaming collisions on the right with primes."""
    taken = set(p1.generators)
    mapping: dict[str, str] = {}
    for g in p2.generators:
        name = g
        while name in taken:
            name += "'"
        taken.add(name)
        mapping[g] = name
    gens = p1.generators + tuple(mapping[g] for g in p2.generators)
    relators = list(p1.relators)
    relators += [tuple((mapping[g], e) for g, e in rel) for rel in p2.relators]
    return gens, relators, mapping


def free_product(p1: GroupPresentation, p2: GroupPresentation) -> GroupPresentation:
    gens, relators, _ = _disjoint_union(p1, p2)
    return GroupPresentation(gens, tuple(relators))


def direct_product(p1: GroupPresentation, p2: GroupPresentation) -> GroupPresentation:
    """Free product plus commutators g^-1 h^-1 g h across the factors."""
    gens, relators, mapping = _disjoint_union(p1, p2)
    for g in p1.generators:
        for h in p2.generators:
            h2 = mapping[h]
            relators.append(((g, -1), (h2, -1), (g, 1), (h2, 1)))
    return GroupPresentation(gens, tuple(relators))
