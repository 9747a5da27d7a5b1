"""Per-endpoint ideal subspaces, algebra bases, and homotopy partitions.

For a bound quiver (Q, relations, m) and each vertex pair (x, y), the ideal
slice I(x, y) is the span of all truncations of u * g * v with g a generator
and u, v paths, restricted to the paths x -> y of length < m (truncation is
legitimate because F^m is part of the ideal by definition).

The slice is held in *solved form*: a map pivot-path -> expression over the
surviving (non-pivot) paths, equivalent to the reduced row-echelon basis of
the slice with pivots chosen greedily in path order.  The solved form is
built by a worklist saturation: each generator is inserted, and every newly
independent row is extended by one arrow on the left and on the right and
re-inserted.  Extensions of a spanning set span the whole two-sided ideal,
so this computes the same subspace as enumerating all u, v pairs while
keeping the work proportional to the ideal's dimension.

Two facts make the homotopy partition cheap to read off the solved form:

* a pivot with an empty expression is a path lying in the ideal ("null");
* the support of each solved row is an inclusion-minimal support of the
  slice (a circuit), and the circuits obtained this way connect every other
  circuit, so union-find over row supports yields exactly the partition
  generated by all minimal relations.

`minimal_support_circuits` still enumerates circuits by brute force for
small classes, and `exhaustive_minimal_partition` re-derives the partition
over a prime field straight from the definition; both serve as oracles for
the fast path.
"""

from __future__ import annotations

import weakref
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

from .linalg import QQ_ONE, Matrix, PrimeScalar, prime_scalar_from_rational, rank
from .quiver import (BoundQuiver, Path, Quiver, path_sort_key, path_target,
                     relation_endpoints)


class ClassTooLargeError(RuntimeError):
    pass


class OracleError(RuntimeError):
    pass


class ParallelClassSpace:
    """Paths x -> y of length < m together with the solved form of I(x, y)."""

    def __init__(self, source: str, target: str, paths: list[Path]):
        self.source = source
        self.target = target
        self.paths = paths
        self.path_index = {p: i for i, p in enumerate(paths)}
        self.pivots: dict[int, dict] = {}
        self._uses: dict[int, set[int]] = {}

    # -- core elimination ------------------------------------------------

    def reduce(self, vec: dict) -> dict:
        """Substitute away every pivot coordinate.  Mutates and returns vec."""
        hits = [k for k in vec if k in self.pivots]
        for k in hits:
            c = vec.pop(k)
            if not c:
                continue
            for j, cj in self.pivots[k].items():
                acc = vec.get(j)
                acc = c * cj if acc is None else acc + c * cj
                if acc:
                    vec[j] = acc
                else:
                    vec.pop(j, None)
        return vec

    def insert(self, vec: dict) -> Optional[int]:
        """Reduce vec and, if independent, record it.  Returns the new pivot."""
        vec = self.reduce(dict(vec))
        vec = {k: c for k, c in vec.items() if c}
        if not vec:
            return None
        pivot = min(vec)
        lead = vec.pop(pivot)
        expr = {j: -c / lead for j, c in vec.items()}
        self.pivots[pivot] = expr
        for j in expr:
            self._uses.setdefault(j, set()).add(pivot)
        # pivot stopped being a survivor: substitute it out of older rows
        for q in self._uses.pop(pivot, ()):  # rows whose expression used it
            eq = self.pivots[q]
            c = eq.pop(pivot, None)
            if c is None:
                continue
            for j, cj in expr.items():
                acc = eq.get(j)
                acc = c * cj if acc is None else acc + c * cj
                if acc:
                    eq[j] = acc
                    self._uses.setdefault(j, set()).add(q)
                else:
                    eq.pop(j, None)
                    users = self._uses.get(j)
                    if users:
                        users.discard(q)
        return pivot

    # -- read-only views --------------------------------------------------

    @property
    def dimension(self) -> int:
        """Dimension of the ideal slice."""
        return len(self.pivots)

    def survivors(self) -> list[int]:
        return [i for i in range(len(self.paths)) if i not in self.pivots]

    def rref_rows(self) -> list[dict[Path, Fraction]]:
        """The reduced row-echelon basis of the slice, ordered by pivot."""
        rows = []
        for pivot in sorted(self.pivots):
            expr = self.pivots[pivot]
            lead = None
            for c in expr.values():
                lead = c / c
                break
            if lead is None:
                # dig a unit out of any stored coefficient; fall back to 1
                lead = QQ_ONE
            row = {self.paths[pivot]: lead}
            for j, c in expr.items():
                row[self.paths[j]] = -c
            rows.append(row)
        return rows

    def nulls(self) -> set[int]:
        return {p for p, expr in self.pivots.items() if not expr}

    def contains(self, vec: dict) -> bool:
        probe = self.reduce(dict(vec))
        return not any(probe.values())


@dataclass
class HomotopyPartition:
    """Per (source, target): blocks of mutually homotopic paths + null flags."""

    blocks: dict[tuple[str, str], tuple[tuple[Path, ...], ...]]
    nulls: dict[tuple[str, str], frozenset[Path]]

    def merged_blocks(self):
        for key in self.blocks:
            for block in self.blocks[key]:
                if len(block) > 1:
                    yield key, block


class IdealAnalysis:
    """All per-class solved forms of one bound quiver over one scalar field."""

    def __init__(self, bq: BoundQuiver, prime: Optional[int] = None):
        self.bq = bq
        self.prime = prime
        q = bq.quiver
        self._one = QQ_ONE if prime is None else PrimeScalar(1, prime)
        self.classes: dict[tuple[str, str], ParallelClassSpace] = {}
        self._targets: dict[Path, str] = {}
        self._build_path_table()
        self._saturate()

    # -- construction ------------------------------------------------------

    def _build_path_table(self):
        q = self.bq.quiver
        per_class: dict[tuple[str, str], list[Path]] = {}
        layer = [Path(v) for v in q.vertices]
        for p in layer:
            self._targets[p] = p.source
        for _ in range(self.bq.truncation - 1):
            nxt = []
            for p in layer:
                for a in q.out_arrows[self._targets[p]]:
                    child = Path(p.source, p.arrows + (a.name,))
                    self._targets[child] = a.target
                    nxt.append(child)
            layer = nxt
            if not layer:
                break
        ordered = sorted(self._targets, key=lambda p: path_sort_key(q, p))
        for p in ordered:
            per_class.setdefault((p.source, self._targets[p]), []).append(p)
        for key, paths in per_class.items():
            self.classes[key] = ParallelClassSpace(key[0], key[1], paths)

    def _coef(self, value: Fraction):
        if self.prime is None:
            return value
        scalar = prime_scalar_from_rational(value, self.prime)
        if not scalar:
            raise OracleError(f"coefficient {value} vanishes mod {self.prime}")
        return scalar

    def _relation_vector(self, rel) -> tuple[tuple[str, str], dict]:
        q = self.bq.quiver
        key = relation_endpoints(q, rel)
        space = self.classes[key]
        vec: dict = {}
        for c, p in rel.terms:
            if len(p) >= self.bq.truncation:
                continue  # lies in F^m, already in the ideal
            vec[space.path_index[p]] = self._coef(c)
        return key, vec

    def _saturate(self):
        q = self.bq.quiver
        m = self.bq.truncation
        tasks: deque = deque()

        def insert_and_extend(key, vec):
            space = self.classes[key]
            pivot = space.insert(vec)
            if pivot is None:
                return
            src, tgt = key
            for a in q.in_arrows[src]:
                tasks.append(("L", a, key, pivot))
            for a in q.out_arrows[tgt]:
                tasks.append(("R", a, key, pivot))

        for rel in self.bq.relations:
            key, vec = self._relation_vector(rel)
            if vec:
                insert_and_extend(key, vec)

        while tasks:
            side, arrow, key, pivot = tasks.popleft()
            space = self.classes[key]
            expr = space.pivots[pivot]
            items = [(pivot, self._one)] + [(j, -c) for j, c in expr.items()]
            new_key = (arrow.source, key[1]) if side == "L" else (key[0], arrow.target)
            target_space = self.classes.get(new_key)
            if target_space is None:
                continue
            vec: dict = {}
            for idx, coef in items:
                p = space.paths[idx]
                if len(p) + 1 >= m:
                    continue
                if side == "L":
                    child = Path(arrow.source, (arrow.name,) + p.arrows)
                else:
                    child = Path(p.source, p.arrows + (arrow.name,))
                j = target_space.path_index[child]
                acc = vec.get(j)
                vec[j] = coef if acc is None else acc + coef
            vec = {k: c for k, c in vec.items() if c}
            if vec:
                insert_and_extend(new_key, vec)

    # -- queries -----------------------------------------------------------

    def class_keys(self) -> list[tuple[str, str]]:
        q = self.bq.quiver
        return sorted(self.classes,
                      key=lambda k: (q.vertex_index[k[0]], q.vertex_index[k[1]]))

    def reduce_terms(self, terms: Iterable[tuple[Fraction, Path]]) -> dict[Path, Fraction]:
        """Normal form of a linear combination of paths, as path coordinates."""
        per_class: dict[tuple[str, str], dict] = {}
        q = self.bq.quiver
        for c, p in terms:
            if len(p) >= self.bq.truncation:
                continue
            key = (p.source, path_target(q, p))
            space = self.classes[key]
            vec = per_class.setdefault(key, {})
            idx = space.path_index[p]
            acc = vec.get(idx)
            coef = self._coef(c)
            vec[idx] = coef if acc is None else acc + coef
        out: dict[Path, Fraction] = {}
        for key, vec in per_class.items():
            space = self.classes[key]
            for idx, c in space.reduce(vec).items():
                if c:
                    out[space.paths[idx]] = c
        return out

    def partition(self) -> HomotopyPartition:
        blocks: dict[tuple[str, str], tuple[tuple[Path, ...], ...]] = {}
        nulls: dict[tuple[str, str], frozenset[Path]] = {}
        for key in self.class_keys():
            space = self.classes[key]
            n = len(space.paths)
            parent = list(range(n))

            def find(i):
                while parent[i] != i:
                    parent[i] = parent[parent[i]]
                    i = parent[i]
                return i

            null_ids = set()
            for pivot, expr in space.pivots.items():
                if not expr:
                    null_ids.add(pivot)
                    continue
                root = find(pivot)
                for j in expr:
                    parent[find(j)] = root
            grouped: dict[int, list[int]] = {}
            for i in range(n):
                grouped.setdefault(find(i), []).append(i)
            ordered = sorted(grouped.values(), key=lambda ids: ids[0])
            blocks[key] = tuple(tuple(space.paths[i] for i in ids) for ids in ordered)
            nulls[key] = frozenset(space.paths[i] for i in null_ids)
        return HomotopyPartition(blocks, nulls)


_CACHE: "weakref.WeakKeyDictionary[BoundQuiver, IdealAnalysis]" = weakref.WeakKeyDictionary()


def analyze(bq: BoundQuiver) -> IdealAnalysis:
    analysis = _CACHE.get(bq)
    if analysis is None:
        analysis = IdealAnalysis(bq)
        _CACHE[bq] = analysis
    return analysis


def ideal_subspace(bq: BoundQuiver, x: str, y: str) -> ParallelClassSpace:
    """The slice I(x, y) restricted to paths of length < m, in solved form."""
    for v in (x, y):
        if v not in bq.quiver.vertex_index:
            raise ValueError(f"unknown vertex {v!r}")
    return analyze(bq).classes[(x, y)]


def algebra_basis(bq: BoundQuiver) -> tuple[list[Path], int]:
    """Quotient-algebra basis (surviving paths) and total dimension."""
    analysis = analyze(bq)
    q = bq.quiver
    basis: list[Path] = []
    for key in analysis.class_keys():
        space = analysis.classes[key]
        basis.extend(space.paths[i] for i in space.survivors())
    basis.sort(key=lambda p: path_sort_key(q, p))
    return basis, len(basis)


def algebra_dimension(bq: BoundQuiver) -> int:
    return algebra_basis(bq)[1]


def normal_form(bq: BoundQuiver,
                terms: Iterable[tuple[Fraction, Path]]) -> dict[Path, Fraction]:
    """Coordinates of a path combination on the algebra basis (mod the ideal)."""
    return analyze(bq).reduce_terms(terms)


def homotopy_partition(bq: BoundQuiver) -> HomotopyPartition:
    """Equivalence classes of parallel paths generated by minimal relations."""
    return analyze(bq).partition()


def is_constricted(bq: BoundQuiver) -> bool:
    """True iff dim e_x A e_y = 1 for every arrow x -> y."""
    analysis = analyze(bq)
    for a in bq.quiver.arrows:
        space = analysis.classes.get((a.source, a.target))
        if space is None or len(space.paths) - space.dimension != 1:
            return False
    return True


def minimal_support_circuits(space: ParallelClassSpace,
                             max_paths: int = 20) -> list[frozenset[Path]]:
    """All inclusion-minimal supports of nonzero vectors of the slice.

    Enumerates candidate supports by increasing size with superset pruning;
    refuses classes above max_paths instead of hanging.
    """
    n = len(space.paths)
    if n > max_paths:
        raise ClassTooLargeError(
            f"{n} paths in class ({space.source}, {space.target}) exceeds cap {max_paths}")
    d = len(space.pivots)
    if d == 0:
        return []
    one = QQ_ONE
    for expr in space.pivots.values():
        for c in expr.values():
            one = c / c
            break
        else:
            continue
        break
    rows = []
    for pivot in sorted(space.pivots):
        vec = {pivot: one}
        for j, c in space.pivots[pivot].items():
            vec[j] = -c
        rows.append(vec)
    found: list[frozenset[int]] = []
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            sset = set(subset)
            if any(c <= sset for c in found):
                continue
            if _has_vector_supported_in(rows, d, n, sset, one):
                found.append(frozenset(subset))
    return [frozenset(space.paths[i] for i in c) for c in found]


def _has_vector_supported_in(rows, d, n, support: set[int], one) -> bool:
    """True iff some nonzero combination of rows vanishes outside `support`."""
    zero = one - one
    outside = [j for j in range(n) if j not in support]
    m = Matrix([[row.get(j, zero) for j in outside] for row in rows])
    return rank(m) < d


def partition_from_circuits(space: ParallelClassSpace,
                            circuits: list[frozenset[Path]]) -> list[frozenset[Path]]:
    """Close circuit supports of size >= 2 into a partition's merged blocks."""
    parent: dict[Path, Path] = {p: p for p in space.paths}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for circuit in circuits:
        members = sorted(circuit, key=lambda p: space.path_index[p])
        if len(members) < 2:
            continue
        root = find(members[0])
        for p in members[1:]:
            parent[find(p)] = root
    grouped: dict[Path, set[Path]] = {}
    for p in space.paths:
        grouped.setdefault(find(p), set()).add(p)
    return [frozenset(g) for g in grouped.values()]


def exhaustive_minimal_partition(bq: BoundQuiver, p: int = 5,
                                 max_class_paths: int = 6) -> HomotopyPartition:
    """Partition over the prime field, straight from the definition.

    Enumerates every nonzero vector of each slice (up to scalar), keeps the
    ones all of whose proper sub-restrictions fall outside the slice, and
    merges their supports.  Only usable when classes with relations have at
    most max_class_paths paths; meant as a test oracle, not a fast path.
    """
    analysis = IdealAnalysis(bq, prime=p)
    blocks: dict[tuple[str, str], tuple[tuple[Path, ...], ...]] = {}
    nulls: dict[tuple[str, str], frozenset[Path]] = {}
    for key in analysis.class_keys():
        space = analysis.classes[key]
        n = len(space.paths)
        d = len(space.pivots)
        if d == 0:
            blocks[key] = tuple((path,) for path in space.paths)
            nulls[key] = frozenset()
            continue
        if n > max_class_paths:
            raise OracleError(
                f"class {key} has {n} paths, above the oracle bound {max_class_paths}")
        one = PrimeScalar(1, p)
        zero = PrimeScalar(0, p)
        rows = []
        for pivot in sorted(space.pivots):
            vec = [zero] * n
            vec[pivot] = one
            for j, c in space.pivots[pivot].items():
                vec[j] = -c
            rows.append(vec)
        null_ids = {i for i in range(n) if space.contains({i: one})}
        merges: list[set[int]] = []
        for combo in _projective_tuples(d, p):
            vec = [zero] * n
            for c, row in zip(combo, rows):
                if c:
                    for j in range(n):
                        vec[j] = vec[j] + PrimeScalar(c, p) * row[j]
            support = [j for j in range(n) if vec[j]]
            if len(support) < 2:
                continue
            minimal = True
            for size in range(1, len(support)):
                for sub in combinations(support, size):
                    if space.contains({j: vec[j] for j in sub}):
                        minimal = False
                        break
                if not minimal:
                    break
            if minimal:
                merges.append(set(support))
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for support in merges:
            members = sorted(support)
            root = find(members[0])
            for j in members[1:]:
                parent[find(j)] = root
        grouped: dict[int, list[int]] = {}
        for i in range(n):
            grouped.setdefault(find(i), []).append(i)
        ordered = sorted(grouped.values(), key=lambda ids: ids[0])
        blocks[key] = tuple(tuple(space.paths[i] for i in ids) for ids in ordered)
        nulls[key] = frozenset(space.paths[i] for i in null_ids)
    return HomotopyPartition(blocks, nulls)


def _projective_tuples(d: int, p: int):
    """Nonzero coefficient tuples in F_p^d with leading nonzero entry 1."""
    for lead in range(d):
        for tail in _all_tuples(d - lead - 1, p):
            yield (0,) * lead + (1,) + tail


def _all_tuples(k: int, p: int):
    if k == 0:
        yield ()
        return
    for head in range(p):
        for tail in _all_tuples(k - 1, p):
            yield (head,) + tail
