"""Quivers, paths, walks, relations, and bound quivers.

Conventions:

* Paths compose left to right: in the arrow sequence (a1, ..., an) the target
  of a_i is the source of a_{i+1}.  The empty sequence is the stationary path
  at its source vertex.
* A bound quiver stores a generator list together with a truncation exponent
  m >= 2; the ideal it represents is, by definition, <generators> + F^m where
  F is the arrow ideal.  For quivers without oriented cycles the constructor
  can fill m automatically as (longest path length) + 1, which makes F^m = 0.
* All orderings are deterministic: declaration order for vertices and arrows,
  and (length, arrow-index sequence) for paths.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True)
class Arrow:
    name: str
    source: str
    target: str


@dataclass(frozen=True)
class Quiver:
    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("quiver needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValueError("duplicate arrow names")
        vset = set(self.vertices)
        for a in self.arrows:
            if a.source not in vset or a.target not in vset:
                raise ValueError(f"arrow {a.name} has undeclared endpoint")
        if not self._is_connected():
            raise ValueError("underlying graph is not connected")

    def _is_connected(self) -> bool:
        seen = {self.vertices[0]}
        queue = deque(seen)
        incident: dict[str, list[str]] = {v: [] for v in self.vertices}
        for a in self.arrows:
            incident[a.source].append(a.target)
            incident[a.target].append(a.source)
        while queue:
            v = queue.popleft()
            for w in incident[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def arrow_index(self) -> dict[str, int]:
        return {a.name: i for i, a in enumerate(self.arrows)}

    @cached_property
    def arrow_map(self) -> dict[str, Arrow]:
        return {a.name: a for a in self.arrows}

    @cached_property
    def out_arrows(self) -> dict[str, tuple[Arrow, ...]]:
        table: dict[str, list[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows:
            table[a.source].append(a)
        return {v: tuple(lst) for v, lst in table.items()}

    @cached_property
    def in_arrows(self) -> dict[str, tuple[Arrow, ...]]:
        table: dict[str, list[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows:
            table[a.target].append(a)
        return {v: tuple(lst) for v, lst in table.items()}

    @cached_property
    def incident_arrows(self) -> dict[str, tuple[Arrow, ...]]:
        """Arrows touching each vertex, in declaration order, loops once."""
        table: dict[str, list[Arrow]] = {v: [] for v in self.vertices}
        for a in self.arrows:
            table[a.source].append(a)
            if a.target != a.source:
                table[a.target].append(a)
        for v in table:
            table[v].sort(key=lambda a: self.arrow_index[a.name])
        return {v: tuple(lst) for v, lst in table.items()}


@dataclass(frozen=True)
class Path:
    """Composable arrow sequence; empty means the stationary path at source."""

    source: str
    arrows: tuple[str, ...] = ()

    def __len__(self):
        return len(self.arrows)


def path_target(q: Quiver, p: Path) -> str:
    at = p.source
    for name in p.arrows:
        a = q.arrow_map.get(name)
        if a is None:
            raise ValueError(f"unknown arrow {name!r}")
        if a.source != at:
            raise ValueError(f"path breaks at {name!r}: expected source {at}")
        at = a.target
    return at


def path_sort_key(q: Quiver, p: Path):
    if not p.arrows:
        return (0, (q.vertex_index[p.source],))
    return (len(p.arrows), tuple(q.arrow_index[a] for a in p.arrows))


def compose_paths(q: Quiver, p1: Path, p2: Path) -> Path:
    if path_target(q, p1) != p2.source:
        raise ValueError("paths do not compose")
    return Path(p1.source, p1.arrows + p2.arrows)


@dataclass(frozen=True)
class Walk:
    """Formal arrow sequence with exponents +1/-1, chained end to end."""

    source: str
    steps: tuple[tuple[str, int], ...] = ()


def walk_target(q: Quiver, w: Walk) -> str:
    at = w.source
    for name, exp in w.steps:
        a = q.arrow_map.get(name)
        if a is None:
            raise ValueError(f"unknown arrow {name!r}")
        if exp == 1:
            if a.source != at:
                raise ValueError(f"walk breaks at {name!r}")
            at = a.target
        elif exp == -1:
            if a.target != at:
                raise ValueError(f"walk breaks at {name!r}^-1")
            at = a.source
        else:
            raise ValueError(f"walk exponent must be +1 or -1, got {exp}")
    return at


def walk_inverse(q: Quiver, w: Walk) -> Walk:
    return Walk(walk_target(q, w),
                tuple((name, -exp) for name, exp in reversed(w.steps)))


def walk_concat(q: Quiver, w1: Walk, w2: Walk) -> Walk:
    if walk_target(q, w1) != w2.source:
        raise ValueError("walks do not compose")
    return Walk(w1.source, w1.steps + w2.steps)


def path_to_walk(p: Path) -> Walk:
    return Walk(p.source, tuple((a, 1) for a in p.arrows))


@dataclass(frozen=True)
class Relation:
    """Exact-scalar combination of parallel paths (shared source and target)."""

    terms: tuple[tuple[Fraction, Path], ...]


def relation(terms: Iterable[tuple[Fraction, Path]]) -> Relation:
    terms = tuple((Fraction(c), p) for c, p in terms)
    if not terms:
        raise ValueError("relation needs at least one term")
    if any(not c for c, _ in terms):
        raise ValueError("zero coefficient in relation")
    paths = [p for _, p in terms]
    if len(set(paths)) != len(paths):
        raise ValueError("duplicate path in relation")
    if len({p.source for p in paths}) != 1:
        raise ValueError("relation terms start at different vertices")
    return Relation(terms)


def relation_endpoints(q: Quiver, rel: Relation) -> tuple[str, str]:
    src = rel.terms[0][1].source
    targets = {path_target(q, p) for _, p in rel.terms}
    if len(targets) != 1:
        raise ValueError("relation terms are not parallel")
    return src, targets.pop()


@dataclass(frozen=True, eq=False)
class BoundQuiver:
    """Quiver + generator list + truncation exponent m + base point.

    The represented ideal is <relations> + F^truncation.
    """

    quiver: Quiver
    relations: tuple[Relation, ...]
    truncation: int
    basepoint: str


def bound_quiver(quiver: Quiver,
                 relations: Sequence[Relation] = (),
                 truncation: Optional[int] = None,
                 basepoint: Optional[str] = None) -> BoundQuiver:
    """Build a bound quiver, filling the truncation for acyclic quivers."""
    if truncation is None:
        if not is_triangular(quiver):
            raise ValueError("truncation is mandatory for quivers with oriented cycles")
        truncation = max(2, longest_path_length(quiver) + 1)
    if truncation < 2:
        raise ValueError("truncation must be >= 2")
    if basepoint is None:
        basepoint = quiver.vertices[0]
    if basepoint not in quiver.vertex_index:
        raise ValueError(f"unknown basepoint {basepoint!r}")
    return BoundQuiver(quiver, tuple(relations), truncation, basepoint)


def with_basepoint(bq: BoundQuiver, basepoint: str) -> BoundQuiver:
    if basepoint not in bq.quiver.vertex_index:
        raise ValueError(f"unknown basepoint {basepoint!r}")
    return BoundQuiver(bq.quiver, bq.relations, bq.truncation, basepoint)


def enumerate_paths(q: Quiver, source: Optional[str] = None,
                    target: Optional[str] = None, max_len: int = 0) -> list[Path]:
    """All paths of length <= max_len matching the endpoint filters.

    Deterministic order: by length, then lexicographically by arrow indices
    (stationary paths by vertex declaration order).
    """
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    for v in (source, target):
        if v is not None and v not in q.vertex_index:
            raise ValueError(f"unknown vertex {v!r}")
    starts = [source] if source is not None else list(q.vertices)
    layer = [Path(v) for v in starts]
    ends = {p: p.source for p in layer}
    found = list(layer)
    for _ in range(max_len):
        nxt = []
        for p in layer:
            for a in q.out_arrows[ends[p]]:
                child = Path(p.source, p.arrows + (a.name,))
                ends[child] = a.target
                nxt.append(child)
        found.extend(nxt)
        layer = nxt
        if not layer:
            break
    if target is not None:
        found = [p for p in found if ends[p] == target]
    return found


def longest_path_length(q: Quiver) -> int:
    """Length of the longest path; raises on quivers with oriented cycles."""
    order = _topological_order(q)
    if order is None:
        raise ValueError("quiver has an oriented cycle")
    longest = {v: 0 for v in q.vertices}
    for v in reversed(order):
        for a in q.out_arrows[v]:
            longest[v] = max(longest[v], 1 + longest[a.target])
    return max(longest.values())


def _topological_order(q: Quiver) -> Optional[list[str]]:
    indeg = {v: 0 for v in q.vertices}
    for a in q.arrows:
        indeg[a.target] += 1
    queue = deque(v for v in q.vertices if indeg[v] == 0)
    order = []
    while queue:
        v = queue.popleft()
        order.append(v)
        for a in q.out_arrows[v]:
            indeg[a.target] -= 1
            if indeg[a.target] == 0:
                queue.append(a.target)
    return order if len(order) == len(q.vertices) else None


def is_triangular(q: Quiver) -> bool:
    """True iff the quiver has no oriented cycle."""
    return _topological_order(q) is not None


def spanning_tree(q: Quiver, base: str) -> frozenset[str]:
    """Breadth-first spanning tree of the underlying graph, rooted at base.

    Ties are broken by arrow declaration order, so the result is stable.
    """
    if base not in q.vertex_index:
        raise ValueError(f"unknown vertex {base!r}")
    return frozenset(a.name for a in _tree_parents(q, base).values())


def _tree_parents(q: Quiver, base: str) -> dict[str, Arrow]:
    """Map vertex -> tree arrow connecting it towards the BFS root."""
    parents: dict[str, Arrow] = {}
    seen = {base}
    queue = deque([base])
    while queue:
        v = queue.popleft()
        for a in q.incident_arrows[v]:
            w = a.target if a.source == v else a.source
            if w not in seen:
                seen.add(w)
                parents[w] = a
                queue.append(w)
    return parents


def tree_walks(q: Quiver, base: str, tree: Optional[frozenset[str]] = None) -> dict[str, Walk]:
    """Walk from base to every vertex using tree arrows only."""
    if tree is None:
        parents = _tree_parents(q, base)
    else:
        parents = {}
        seen = {base}
        queue = deque([base])
        while queue:
            v = queue.popleft()
            for a in q.incident_arrows[v]:
                if a.name not in tree:
                    continue
                w = a.target if a.source == v else a.source
                if w not in seen:
                    seen.add(w)
                    parents[w] = a
                    queue.append(w)
        if len(seen) != len(q.vertices):
            raise ValueError("arrow set does not span the quiver")
    walks = {base: Walk(base)}

    def walk_to(v: str) -> Walk:
        if v in walks:
            return walks[v]
        a = parents[v]
        if a.target == v:
            prefix, step = walk_to(a.source), (a.name, 1)
        else:
            prefix, step = walk_to(a.target), (a.name, -1)
        walks[v] = Walk(base, prefix.steps + (step,))
        return walks[v]

    for v in q.vertices:
        walk_to(v)
    return walks


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems


def validate(bq: BoundQuiver) -> ValidationReport:
    """Check the admissibility bookkeeping of a bound quiver.

    Reports generator parallelism, path integrity, term lengths in [2, m),
    and, for acyclic quivers, that m exceeds the longest path so that the
    declared ideal really is <generators> alone.
    """
    report = ValidationReport()
    q = bq.quiver
    if bq.truncation < 2:
        report.problems.append(f"truncation {bq.truncation} < 2")
    if bq.basepoint not in q.vertex_index:
        report.problems.append(f"unknown basepoint {bq.basepoint!r}")
    for k, rel in enumerate(bq.relations):
        if not rel.terms:
            report.problems.append(f"generator {k}: empty relation")
            continue
        if any(not c for c, _ in rel.terms):
            report.problems.append(f"generator {k}: zero coefficient")
        paths = [p for _, p in rel.terms]
        if len(set(paths)) != len(paths):
            report.problems.append(f"generator {k}: duplicate path")
        endpoints = set()
        broken = False
        for _, p in rel.terms:
            try:
                endpoints.add((p.source, path_target(q, p)))
            except ValueError as exc:
                report.problems.append(f"generator {k}: {exc}")
                broken = True
        if not broken and len(endpoints) != 1:
            report.problems.append(f"generator {k}: not parallel")
        for _, p in rel.terms:
            if not 2 <= len(p) < bq.truncation:
                report.problems.append(
                    f"generator {k}: term length {len(p)} outside [2, {bq.truncation})")
    if is_triangular(q) and longest_path_length(q) >= bq.truncation:
        report.problems.append(
            f"truncation {bq.truncation} does not exceed the longest path "
            f"({longest_path_length(q)}) of an acyclic quiver")
    return report
