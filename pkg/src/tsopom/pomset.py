"""Finite pomsets of memory actions.

Pomsets are identified up to label-preserving order isomorphism; equality
and hashing go through a canonical form so that plain Python sets
deduplicate denotations correctly.  Node ids are contiguous integers
``0..n-1`` and the order is stored transitively closed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable, Iterable, Optional


# ---------------------------------------------------------------------------
# Actions

GW = "gw"      # global write  x:=v
BW = "bw"      # buffer write  bx:=v
RD = "rd"      # read          x=v
DELTA = "delta"


@dataclass(frozen=True)
class Action:
    kind: str
    loc: Optional[str] = None
    val: Optional[int] = None

    def __repr__(self):
        if self.kind == DELTA:
            return "d"
        if self.kind == GW:
            return f"{self.loc}:={self.val}"
        if self.kind == BW:
            return f"b{self.loc}:={self.val}"
        return f"{self.loc}={self.val}"

    def sort_key(self):
        return (self.kind, self.loc or "", self.val if self.val is not None else 0)


def gw(loc: str, val: int) -> Action:
    return Action(GW, loc, val)


def bw(loc: str, val: int) -> Action:
    return Action(BW, loc, val)


def rd(loc: str, val: int) -> Action:
    return Action(RD, loc, val)


DELTA_ACTION = Action(DELTA)


def is_write(a: Action) -> bool:
    return a.kind == GW


def is_buffer_write(a: Action) -> bool:
    return a.kind == BW


def is_read(a: Action) -> bool:
    return a.kind == RD


def is_delta(a: Action) -> bool:
    return a.kind == DELTA


def is_po_action(a: Action) -> bool:
    return a.kind in (GW, RD, DELTA)


# ---------------------------------------------------------------------------
# Pomsets


def transitive_closure(pairs: set[tuple[int, int]], n: int) -> frozenset[tuple[int, int]]:
    succ = [set() for _ in range(n)]
    for a, b in pairs:
        succ[a].add(b)
    changed = True
    while changed:
        changed = False
        for a in range(n):
            new = set()
            for b in succ[a]:
                new |= succ[b]
            if not new <= succ[a]:
                succ[a] |= new
                changed = True
    return frozenset((a, b) for a in range(n) for b in succ[a])


class NotSeriesParallel(ValueError):
    pass


class SizeGuardError(RuntimeError):
    pass


class Pomset:
    __slots__ = ("labels", "lt", "_canon", "_covers", "_hash")

    def __init__(self, labels: Iterable[Action], lt: Iterable[tuple[int, int]], *,
                 closed: bool = False):
        self.labels: tuple[Action, ...] = tuple(labels)
        n = len(self.labels)
        rel = set(lt)
        for a, b in rel:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge {(a, b)} out of range")
        if not closed:
            rel = set(transitive_closure(rel, n))
        for a, b in rel:
            if a == b:
                raise ValueError("order must be irreflexive")
            if (b, a) in rel:
                raise ValueError("order must be antisymmetric")
        self.lt: frozenset[tuple[int, int]] = frozenset(rel)
        self._canon = None
        self._covers = None
        self._hash = None

    # -- basics ------------------------------------------------------------

    def __len__(self):
        return len(self.labels)

    @property
    def nodes(self) -> range:
        return range(len(self.labels))

    def less(self, a: int, b: int) -> bool:
        return (a, b) in self.lt

    def comparable(self, a: int, b: int) -> bool:
        return a == b or (a, b) in self.lt or (b, a) in self.lt

    def preds(self, b: int) -> set[int]:
        return {a for (a, bb) in self.lt if bb == b}

    def succs(self, a: int) -> set[int]:
        return {b for (aa, b) in self.lt if aa == a}

    def minimal(self) -> list[int]:
        has_pred = {b for (_, b) in self.lt}
        return [v for v in self.nodes if v not in has_pred]

    def covers(self) -> frozenset[tuple[int, int]]:
        """Transitive reduction."""
        if self._covers is None:
            lt = self.lt
            self._covers = frozenset(
                (a, b) for (a, b) in lt
                if not any((a, c) in lt and (c, b) in lt for c in self.nodes))
        return self._covers

    def __repr__(self):
        if not self.labels:
            return "Pomset(0)"
        parts = [repr(l) for l in self.labels]
        edges = sorted(self.covers())
        return "Pomset[" + ", ".join(parts) + "; " + \
            " ".join(f"{a}<{b}" for a, b in edges) + "]"

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def empty() -> "Pomset":
        return Pomset((), ())

    @staticmethod
    def single(action: Action) -> "Pomset":
        return Pomset((action,), ())

    @staticmethod
    def chain(actions: Iterable[Action]) -> "Pomset":
        acts = tuple(actions)
        n = len(acts)
        return Pomset(acts, [(i, j) for i in range(n) for j in range(i + 1, n)],
                      closed=True)

    def induced(self, keep: Iterable[int]) -> tuple["Pomset", dict[int, int]]:
        """Sub-pomset on `keep`, plus the old-node -> new-node map."""
        keep = sorted(set(keep))
        remap = {old: new for new, old in enumerate(keep)}
        labels = tuple(self.labels[v] for v in keep)
        lt = [(remap[a], remap[b]) for (a, b) in self.lt
              if a in remap and b in remap]
        return Pomset(labels, lt, closed=True), remap

    # -- canonical form / isomorphism ----------------------------------------

    def canon(self):
        if self._canon is None:
            self._canon = _canonical_key(self)
        return self._canon

    def __eq__(self, other):
        if not isinstance(other, Pomset):
            return NotImplemented
        if len(self) != len(other) or len(self.lt) != len(other.lt):
            return False
        return self.canon() == other.canon()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.canon())
        return self._hash


def _canonical_key(P: Pomset, class_limit: int = 362880):
    n = len(P)
    if n == 0:
        return ((), ())
    preds = [[] for _ in range(n)]
    succs = [[] for _ in range(n)]
    for a, b in P.lt:
        succs[a].append(b)
        preds[b].append(a)
    color = {v: P.labels[v].sort_key() for v in range(n)}
    while True:
        sig = {v: (color[v],
                   tuple(sorted(color[u] for u in preds[v])),
                   tuple(sorted(color[u] for u in succs[v])))
               for v in range(n)}
        ranking = {s: i for i, s in enumerate(sorted(set(sig.values())))}
        new = {v: ranking[sig[v]] for v in range(n)}
        if len(set(new.values())) == len(set(color.values())):
            color = new
            break
        color = new
    classes: dict[int, list[int]] = {}
    for v in range(n):
        classes.setdefault(color[v], []).append(v)
    ordered_classes = [classes[c] for c in sorted(classes)]
    label_row = tuple(P.labels[cls[0]].sort_key() for cls in ordered_classes
                      for _ in cls)
    total = 1
    for cls in ordered_classes:
        for k in range(2, len(cls) + 1):
            total *= k
        if total > class_limit:
            raise SizeGuardError("canonical labeling class explosion")
    best = None
    for perm_combo in product(*(permutations(cls) for cls in ordered_classes)):
        pos = {}
        i = 0
        for group in perm_combo:
            for v in group:
                pos[v] = i
                i += 1
        edges = tuple(sorted((pos[a], pos[b]) for (a, b) in P.lt))
        if best is None or edges < best:
            best = edges
    return (label_row, best)


def iso_eq(P: Pomset, Q: Pomset) -> bool:
    return P == Q


def find_iso(P: Pomset, Q: Pomset) -> Optional[dict[int, int]]:
    """An explicit label-preserving order isomorphism P -> Q, or None."""
    n = len(P)
    if n != len(Q) or len(P.lt) != len(Q.lt):
        return None
    by_label: dict = {}
    for v in Q.nodes:
        by_label.setdefault(Q.labels[v], []).append(v)

    assignment: dict[int, int] = {}
    used: set[int] = set()

    order = sorted(P.nodes, key=lambda v: (P.labels[v].sort_key(), v))

    def ok(v: int, w: int) -> bool:
        for u, x in assignment.items():
            if ((u, v) in P.lt) != ((x, w) in Q.lt):
                return False
            if ((v, u) in P.lt) != ((w, x) in Q.lt):
                return False
        return True

    def rec(i: int) -> bool:
        if i == n:
            return True
        v = order[i]
        for w in by_label.get(P.labels[v], ()):
            if w not in used and ok(v, w):
                assignment[v] = w
                used.add(w)
                if rec(i + 1):
                    return True
                del assignment[v]
                used.remove(w)
        return False

    return dict(assignment) if rec(0) else None


# ---------------------------------------------------------------------------
# Composition


def seq(P: Pomset, Q: Pomset) -> Pomset:
    """Sequential composition: every node of P below every node of Q."""
    n, m = len(P), len(Q)
    labels = P.labels + Q.labels
    lt = set(P.lt)
    lt |= {(a + n, b + n) for (a, b) in Q.lt}
    lt |= {(a, b + n) for a in range(n) for b in range(m)}
    return Pomset(labels, lt, closed=True)


def par(P: Pomset, Q: Pomset) -> Pomset:
    """Parallel composition: disjoint union, no cross edges."""
    n = len(P)
    labels = P.labels + Q.labels
    lt = set(P.lt) | {(a + n, b + n) for (a, b) in Q.lt}
    return Pomset(labels, lt, closed=True)


def restrict(P: Pomset, keep: Callable[[Action], bool]) -> Pomset:
    sub, _ = P.induced([v for v in P.nodes if keep(P.labels[v])])
    return sub


def delta_normalize(P: Pomset) -> Pomset:
    """Delete delta nodes; an all-delta nonempty pomset collapses to {d}."""
    keep = [v for v in P.nodes if not is_delta(P.labels[v])]
    if not keep and len(P) > 0:
        return Pomset.single(DELTA_ACTION)
    if len(keep) == len(P):
        return P
    sub, _ = P.induced(keep)
    return sub


def lower_closure(P: Pomset, n: int) -> set[int]:
    if n not in P.nodes:
        raise ValueError(f"node {n} not in pomset")
    return {a for a in P.nodes if (a, n) in P.lt} | {n}


# ---------------------------------------------------------------------------
# Linearisations


def linearisations(P: Pomset, node_max: int = 12) -> list[tuple[int, ...]]:
    """All topological orders, as tuples of node ids."""
    if len(P) > node_max:
        raise SizeGuardError(
            f"refusing to linearise {len(P)} nodes (bound {node_max})")
    n = len(P)
    preds = [set() for _ in range(n)]
    for a, b in P.lt:
        preds[b].add(a)
    out: list[tuple[int, ...]] = []
    seq_acc: list[int] = []
    placed: set[int] = set()

    def rec():
        if len(seq_acc) == n:
            out.append(tuple(seq_acc))
            return
        for v in range(n):
            if v not in placed and preds[v] <= placed:
                placed.add(v)
                seq_acc.append(v)
                rec()
                seq_acc.pop()
                placed.remove(v)

    rec()
    return out


def linear_extensions_of_subset(P: Pomset, nodes: list[int]) -> list[tuple[int, ...]]:
    """All orderings of `nodes` consistent with P's order."""
    preds = {v: {u for u in nodes if (u, v) in P.lt} for v in nodes}
    out: list[tuple[int, ...]] = []
    acc: list[int] = []
    placed: set[int] = set()

    def rec():
        if len(acc) == len(nodes):
            out.append(tuple(acc))
            return
        for v in nodes:
            if v not in placed and preds[v] <= placed:
                placed.add(v)
                acc.append(v)
                rec()
                acc.pop()
                placed.remove(v)

    rec()
    return out


# ---------------------------------------------------------------------------
# Series-parallel decomposition


@dataclass(frozen=True)
class Leaf:
    nodes: tuple[int, ...]


@dataclass(frozen=True)
class SeqNode:
    left: "SPTerm"
    right: "SPTerm"


@dataclass(frozen=True)
class ParNode:
    left: "SPTerm"
    right: "SPTerm"


SPTerm = Leaf | SeqNode | ParNode


def sp_decompose(P: Pomset) -> Optional[SPTerm]:
    """SP term whose evaluation is iso-equal to P, or None if P is not SP
    (contains the N-shaped suborder)."""
    if len(P) == 0:
        return Leaf(())
    term = _decompose(P, list(P.nodes))
    if term is None:
        return None
    return _merge_linear_runs(term, P)


def _is_chain(P: Pomset, nodes: list[int]) -> Optional[tuple[int, ...]]:
    for a in nodes:
        for b in nodes:
            if a < b and not P.comparable(a, b):
                return None
    return tuple(sorted(nodes, key=lambda v: sum((u, v) in P.lt for u in nodes)))


def _decompose(P: Pomset, nodes: list[int]) -> Optional[SPTerm]:
    if len(nodes) == 1:
        return Leaf((nodes[0],))
    chain = _is_chain(P, nodes)
    if chain is not None:
        return Leaf(chain)
    # parallel split: connected components of the comparability graph
    comp = _comparability_components(P, nodes)
    if len(comp) > 1:
        term = _decompose(P, comp[0])
        if term is None:
            return None
        rest = [v for group in comp[1:] for v in group]
        other = _decompose(P, rest)
        if other is None:
            return None
        return ParNode(term, other)
    # series split: a prefix A with A x B fully ordered
    in_set = set(nodes)
    npred = {v: sum((u, v) in P.lt for u in in_set) for v in nodes}
    by_pred = sorted(nodes, key=lambda v: (npred[v], v))
    n = len(nodes)
    for k in range(1, n):
        a_set, b_set = by_pred[:k], by_pred[k:]
        if all((a, b) in P.lt for a in a_set for b in b_set):
            left = _decompose(P, a_set)
            right = _decompose(P, b_set)
            if left is None or right is None:
                return None
            return SeqNode(left, right)
    return None


def _comparability_components(P: Pomset, nodes: list[int]) -> list[list[int]]:
    remaining = set(nodes)
    comps = []
    while remaining:
        seed = min(remaining)
        group = {seed}
        frontier = [seed]
        while frontier:
            v = frontier.pop()
            for u in list(remaining - group):
                if P.comparable(u, v):
                    group.add(u)
                    frontier.append(u)
        comps.append(sorted(group))
        remaining -= group
    return comps


def _merge_linear_runs(term: SPTerm, P: Pomset) -> SPTerm:
    """Flatten sequential spines and merge adjacent Leafs so leaves are the
    maximal linear segments."""
    if isinstance(term, Leaf):
        return term
    if isinstance(term, ParNode):
        return ParNode(_merge_linear_runs(term.left, P),
                       _merge_linear_runs(term.right, P))
    spine: list[SPTerm] = []

    def collect(t: SPTerm):
        if isinstance(t, SeqNode):
            collect(t.left)
            collect(t.right)
        else:
            spine.append(_merge_linear_runs(t, P))

    collect(term)
    merged: list[SPTerm] = []
    for t in spine:
        if merged and isinstance(t, Leaf) and isinstance(merged[-1], Leaf):
            merged[-1] = Leaf(merged[-1].nodes + t.nodes)
        else:
            merged.append(t)
    out = merged[-1]
    for t in reversed(merged[:-1]):
        out = SeqNode(t, out)
    return out


def sp_nodes(term: SPTerm) -> tuple[int, ...]:
    if isinstance(term, Leaf):
        return term.nodes
    return sp_nodes(term.left) + sp_nodes(term.right)


def sp_eval(term: SPTerm, P: Pomset) -> Pomset:
    """Rebuild a pomset from an SP term over P's nodes (for validation)."""
    if isinstance(term, Leaf):
        return Pomset.chain([P.labels[v] for v in term.nodes])
    left = sp_eval(term.left, P)
    right = sp_eval(term.right, P)
    return seq(left, right) if isinstance(term, SeqNode) else par(left, right)


def sp_components(term: SPTerm) -> list[tuple[int, ...]]:
    """The maximal linear segments (leaf node sequences)."""
    if isinstance(term, Leaf):
        return [term.nodes]
    return sp_components(term.left) + sp_components(term.right)


# ---------------------------------------------------------------------------
# DOT output


def to_dot(P: Pomset, name: str = "pomset") -> str:
    lines = [f"digraph \"{name}\" {{", "  rankdir=TB;"]
    for v in P.nodes:
        lines.append(f"  n{v} [label=\"{P.labels[v]!r}\", shape=box];")
    for a, b in sorted(P.covers()):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines)
