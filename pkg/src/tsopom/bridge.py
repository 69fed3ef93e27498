"""Cross-validation between the buffered (TSO-pomset) semantics and the
axiomatic account.

`underlying` erases buffering from a TSO pomset; `s_construct` goes the
other way, merging global writes into a program order along a consistent
total order.  `T_of` collects, per program order, the action orders realized
by executable linearisations of the program's TSO pomsets; the soundness and
completeness harnesses check that this set coincides with the brute-force
axiomatic enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import lang, tso_sem
from .axiom import (CandidateOrder, check_axioms, consistent_total,
                    consistent_total_node_orders)
from .execution import _leaf_envs, _nodes, _WriteOrderRunner, write_orders
from .po_sem import Bounds, denote_program
from .pomset import (BW, DELTA, GW, RD, Action, Leaf, Pomset, SeqNode,
                     NotSeriesParallel, find_iso, gw, sp_decompose)
from .state_foot import Footstep, per_loc_n_max, zeta


class NotWellBalanced(ValueError):
    pass


@dataclass(frozen=True)
class Balance:
    """Pairing of each buffer write with its draining global write."""
    omega: tuple[tuple[int, int], ...]

    def as_dict(self) -> dict[int, int]:
        return dict(self.omega)


def well_balanced(P: Pomset) -> Balance:
    """Match, within each maximal linear segment, the k-th buffer write to a
    location with the k-th global write to it."""
    if len(P) == 0:
        return Balance(())
    term = sp_decompose(P)
    if term is None:
        raise NotWellBalanced("pomset is not series-parallel")
    pairs: list[tuple[int, int]] = []

    def walk(t):
        if isinstance(t, Leaf):
            by_loc: dict[str, tuple[list[int], list[int]]] = {}
            for v in t.nodes:
                a = P.labels[v]
                if a.kind == BW:
                    by_loc.setdefault(a.loc, ([], []))[0].append(v)
                elif a.kind == GW:
                    by_loc.setdefault(a.loc, ([], []))[1].append(v)
            for loc, (bs, gs) in by_loc.items():
                if len(bs) != len(gs):
                    raise NotWellBalanced(
                        f"{len(bs)} buffer writes vs {len(gs)} global writes to {loc}")
                for b, g in zip(bs, gs):
                    if P.labels[b].val != P.labels[g].val:
                        raise NotWellBalanced(
                            f"value mismatch {P.labels[b]!r} vs {P.labels[g]!r}")
                    if not P.less(b, g):
                        raise NotWellBalanced(
                            f"{P.labels[g]!r} does not follow {P.labels[b]!r}")
                    pairs.append((b, g))
        else:
            walk(t.left)
            walk(t.right)

    walk(term)
    return Balance(tuple(sorted(pairs)))


def underlying(P: Pomset) -> tuple[Pomset, dict[int, int]]:
    """Delete global writes and relabel buffer writes as global ones.

    The returned map sends every node of P to its image: buffer writes and
    their paired global writes collapse onto the same relabeled write."""
    bal = well_balanced(P)
    keep = [v for v in P.nodes if P.labels[v].kind != GW]
    sub, remap = P.induced(keep)
    labels = tuple(gw(a.loc, a.val) if a.kind == BW else a for a in sub.labels)
    U = Pomset(labels, sub.lt, closed=True)
    ident = dict(remap)
    for b, g in bal.omega:
        ident[g] = remap[b]
    return U, ident


def s_construct(P: Pomset, order: tuple[int, ...],
                sigma0: Optional[dict[str, int]] = None,
                check: bool = True) -> tuple[Pomset, dict]:
    """Merge global writes into a program order at the places a consistent
    total order dictates.

    `order` is a node permutation of P.  The result's nodes are a buffered
    copy of every P node plus a fresh global write per write of P; edges are
    generated by: program order between copies; `order` between writes and
    between a copy and a write comparable in P; and each buffered write
    before its own global write.  Returns the pomset and the map from P's
    nodes to their global-write instances (reads/deltas map to their copy)."""
    T = CandidateOrder.from_sequence(P, order)
    if check:
        rep = check_axioms(P, T, sigma0)
        if not rep.consistent:
            raise ValueError(f"order is not TSO-consistent: fails {sorted(rep.failed)}")
    n = len(P)
    writes = [v for v in P.nodes if P.labels[v].kind == GW]
    gw_index = {w: n + i for i, w in enumerate(writes)}
    labels = [Action(BW, a.loc, a.val) if a.kind == GW else a for a in P.labels]
    labels += [P.labels[w] for w in writes]
    ident = {v: v for v in P.nodes}
    ident.update(gw_index)
    if n == 0:
        return Pomset((), frozenset(), closed=True), ident
    term = sp_decompose(P)
    if term is None:
        raise NotSeriesParallel("merging writes requires an SP pomset")
    edges: set[tuple[int, int]] = set()

    def block(t) -> list[int]:
        if isinstance(t, Leaf):
            # total order on the segment: buffered copies keep program
            # order; each global write goes into the earliest slot after
            # its copy, after every non-write the total order puts before
            # it, and before every non-write the total order puts after it
            chain = list(t.nodes)
            idx = {v: i for i, v in enumerate(chain)}
            slots: dict[int, int] = {}
            prev = 0
            for w in chain:
                if P.labels[w].kind != GW:
                    continue
                lo, hi = idx[w], len(chain)
                for p in chain:
                    if p == w or P.labels[p].kind == GW:
                        continue
                    if T.less(p, w):
                        lo = max(lo, idx[p])
                    else:
                        hi = min(hi, idx[p])
                slot = max(lo + 1, prev)
                if slot > hi:
                    raise ValueError(
                        "order admits no flush slot in its segment")
                slots[w] = slot
                prev = slot
            seq: list[int] = []
            for i in range(len(chain) + 1):
                seq.extend(gw_index[w] for w, s in slots.items() if s == i)
                if i < len(chain):
                    seq.append(chain[i])
            for i, a in enumerate(seq):
                for b in seq[i + 1:]:
                    edges.add((a, b))
            return seq
        left, right = block(t.left), block(t.right)
        if isinstance(t, SeqNode):
            for a in left:
                for b in right:
                    edges.add((a, b))
        return left + right

    block(term)
    S = Pomset(tuple(labels), frozenset(edges), closed=True)
    return S, ident


# ---------------------------------------------------------------------------
# T: the orders realized by executable linearisations

# A realized order is represented during assembly as a tuple of entries:
# ("w", k) for the k-th global write of the ambient write order, and
# ("n", nid) for an own read/delta node; buffer writes are dropped.
_MEntry = tuple


def _interleavings(a: list, b: list):
    if not a:
        yield tuple(b)
        return
    if not b:
        yield tuple(a)
        return
    for rest in _interleavings(a[1:], b):
        yield (a[0],) + rest
    for rest in _interleavings(a, b[1:]):
        yield (b[0],) + rest


def _blocks(M: tuple, n_writes: int) -> list[list]:
    out: list[list] = [[] for _ in range(n_writes + 1)]
    k = 0
    for e in M:
        if e[0] == "w":
            k = e[1] + 1
        else:
            out[k].append(e)
    return out


def _merge_orders(M1: tuple, M2: tuple, n_writes: int):
    b1, b2 = _blocks(M1, n_writes), _blocks(M2, n_writes)
    def rec(k):
        if k == n_writes + 1:
            yield ()
            return
        for head in _interleavings(b1[k], b2[k]):
            tail_head = head if k == 0 else (("w", k - 1),) + head
            for rest in rec(k + 1):
                yield tail_head + rest
    yield from rec(0)


class _OrderRunner:
    """Per write order, the map from realized program-order action orders to
    the footsteps their linearisations admit."""

    def __init__(self, P: Pomset, bounds: Bounds):
        self.P = P
        self.bounds = bounds
        self.fp = _WriteOrderRunner(P, bounds, per_loc_n_max(P))
        self.memo: dict = {}

    def run(self, term, W) -> dict[tuple, frozenset[Footstep]]:
        key = (term, W)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res: dict[tuple, set[Footstep]] = {}
        if isinstance(term, Leaf):
            for env in _leaf_envs(term, self.P, W):
                S = self.fp._linear_fp(env)
                if not S:
                    continue
                M, k = [], 0
                for (nid, a) in env:
                    if a.kind == GW:
                        M.append(("w", k))
                        k += 1
                    elif nid is not None and a.kind != BW:
                        M.append(("n", nid))
                res.setdefault(tuple(M), set()).update(S)
        elif isinstance(term, SeqNode):
            left_nodes = set(_nodes(term.left))
            right_nodes = set(_nodes(term.right))
            lo, hi = 0, len(W)
            for i, (nid, _) in enumerate(W):
                if nid in left_nodes:
                    lo = i + 1
                if nid in right_nodes:
                    hi = min(hi, i)
            for cut in range(lo, hi + 1):
                D1 = self.run(term.left, W[:cut])
                if not D1:
                    continue
                D2 = self.run(term.right, W[cut:])
                for M2, S2 in D2.items():
                    M2s = tuple(("w", e[1] + cut) if e[0] == "w" else e
                                for e in M2)
                    for M1, S1 in D1.items():
                        S = self.fp.seq_sets(S1, S2)
                        if S:
                            res.setdefault(M1 + M2s, set()).update(S)
        else:
            D1 = self.run(term.left, W)
            D2 = self.run(term.right, W)
            # compose each distinct pair of footstep sets once; the pair's
            # result attaches to every merge of the contributing orders
            g1: dict[frozenset, list] = {}
            for M1, S1 in D1.items():
                Sz = self.fp.zeta_filter(S1)
                if Sz:
                    g1.setdefault(Sz, []).append(M1)
            g2: dict[frozenset, list] = {}
            for M2, S2 in D2.items():
                Sz = self.fp.zeta_filter(S2)
                if Sz:
                    g2.setdefault(Sz, []).append(M2)
            for S1z, Ms1 in g1.items():
                for S2z, Ms2 in g2.items():
                    S = self.fp.par_sets(S1z, S2z)
                    if not S:
                        continue
                    for M1 in Ms1:
                        for M2 in Ms2:
                            for M in _merge_orders(M1, M2, len(W)):
                                res.setdefault(M, set()).update(S)
        out = {M: frozenset(S) for M, S in res.items()}
        self.memo[key] = out
        return out


def realized_orders(P: Pomset, bounds: Bounds) -> dict[tuple[int, ...], Footstep]:
    """For a TSO pomset: every Λ↾(reads, global writes, deltas) over P's own
    nodes admitting a nonempty empty-buffer footprint, with one witnessing
    footstep each.  Keys are node sequences over P."""
    out: dict[tuple[int, ...], Footstep] = {}
    if len(P) == 0:
        return {(): None}
    term = sp_decompose(P)
    if term is None:
        return {}
    runner = _OrderRunner(P, bounds)
    for worder in write_orders(P):
        W = tuple((v, P.labels[v]) for v in worder)
        for M, S in runner.run(term, W).items():
            wit = next(((s, t) for (s, t) in S if zeta(s) and zeta(t)), None)
            if wit is None:
                continue
            seq = tuple(worder[e[1]] if e[0] == "w" else e[1] for e in M)
            out.setdefault(seq, wit)
    return out


def _po_node_order(P_tso: Pomset, seq: tuple[int, ...], ident: dict[int, int],
                   iso: dict[int, int]) -> tuple[int, ...]:
    return tuple(iso[ident[v]] for v in seq)


def T_of(p: lang.Program | lang.Cmd, P: Pomset, bounds: Bounds) -> set[tuple]:
    """Program-order action orders realized by the program's executable TSO
    linearisations whose underlying pomset is P, as label sequences."""
    return {tuple(P.labels[v] for v in seq)
            for seq in t_of_witnessed(p, P, bounds)}


_TABLE_CACHE: dict = {}


def _program_table(p, bounds: Bounds) -> list[tuple[Pomset, Pomset, dict, dict]]:
    """Per TSO pomset of the program: its underlying pomset, identification
    map, and realized orders.  Computed once per (program, bounds)."""
    key = (p, bounds)
    hit = _TABLE_CACHE.get(key)
    if hit is None:
        hit = []
        for P_tso in tso_sem.tso_pomsets(p, bounds):
            U, ident = underlying(P_tso)
            hit.append((P_tso, U, ident, realized_orders(P_tso, bounds)))
        _TABLE_CACHE[key] = hit
    return hit


def t_of_witnessed(p, P: Pomset, bounds: Bounds) -> dict[tuple[int, ...], Footstep]:
    out: dict[tuple[int, ...], Footstep] = {}
    for P_tso, U, ident, realized in _program_table(p, bounds):
        if U != P:
            continue
        iso = find_iso(U, P)
        for seq, wit in realized.items():
            out.setdefault(_po_node_order(P_tso, seq, ident, iso), wit)
    return out


# ---------------------------------------------------------------------------
# Soundness / completeness harness


@dataclass
class HarnessReport:
    name: str
    pomsets: int = 0
    orders_checked: int = 0
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def as_json(self) -> dict:
        return {"name": self.name, "pomsets": self.pomsets,
                "orders_checked": self.orders_checked,
                "passed": self.passed,
                "first_failure": self.failures[0] if self.failures else None}


def soundness_check(p, bounds: Bounds, name: str = "program",
                    initial: Optional[dict[str, int]] = None) -> HarnessReport:
    """Every order realized by an executable TSO linearisation must pass the
    axioms from its witnessing pre-state."""
    rep = HarnessReport(name)
    for P in denote_program(p, bounds):
        rep.pomsets += 1
        for seq, wit in t_of_witnessed(p, P, bounds).items():
            rep.orders_checked += 1
            sigma = dict(initial or {})
            sigma.update({k: v for k, v in wit[0].globals_})
            if not consistent_total(P, seq, sigma):
                axrep = check_axioms(P, CandidateOrder.from_sequence(P, seq), sigma)
                rep.failures.append(
                    f"order {[repr(P.labels[v]) for v in seq]} fails "
                    f"{sorted(axrep.failed)} on {P!r}")
    return rep


def completeness_check(p, bounds: Bounds, name: str = "program",
                       size_guard: int = 12,
                       mutate_ignore: frozenset = frozenset()) -> HarnessReport:
    """Every axiomatically consistent total order must be realized: its
    merged pomset is a TSO denotation, its underlying pomset is the original,
    and the order itself is recovered by an executable linearisation."""
    rep = HarnessReport(name)
    tso = tso_sem.tso_pomsets(p, bounds)
    for P in denote_program(p, bounds):
        rep.pomsets += 1
        realized = t_of_witnessed(p, P, bounds)
        realized_here: set[tuple[int, ...]] = set(realized)
        totals = consistent_total_node_orders(P, None, size_guard, mutate_ignore)
        label_real = {tuple(P.labels[v] for v in s) for s in realized_here}
        for order in totals:
            rep.orders_checked += 1
            labels = tuple(P.labels[v] for v in order)
            try:
                S, _ = s_construct(P, order, check=False)
            except ValueError as e:
                rep.failures.append(f"cannot merge writes for {labels}: {e}")
                continue
            if S not in tso:
                rep.failures.append(f"s(P,L) not a TSO denotation for {labels}")
                continue
            U, _ = underlying(S)
            if U != P:
                rep.failures.append(f"underlying(s(P,L)) differs for {labels}")
                continue
            if labels not in label_real:
                rep.failures.append(f"consistent order not realized: {labels}")
        extra = label_real - {tuple(P.labels[v] for v in s) for s in totals}
        for labels in extra:
            rep.failures.append(f"realized order not consistent: {labels}")
    return rep


def random_program(rng, max_threads: int = 2, max_stmts: int = 3,
                   values: tuple[int, ...] = (0, 1),
                   locations: tuple[str, ...] = ("x", "y", "r")) -> lang.Program:
    """A small random program: up to `max_threads` parallel threads of up
    to `max_stmts` statements each, drawn from assignments, copies and
    one-level conditionals over the given locations and constants."""

    def stmt() -> str:
        kind = rng.randrange(4)
        loc = rng.choice(locations)
        if kind == 0:
            return f"{loc} := {rng.choice(values)}"
        if kind == 1:
            return f"{loc} := {rng.choice(locations)}"
        if kind == 2:
            return "skip"
        then = f"{rng.choice(locations)} := {rng.choice(values)}"
        return (f"if {loc} = {rng.choice(values)} then {then} else skip")

    def thread() -> str:
        return "; ".join(stmt() for _ in range(rng.randint(1, max_stmts)))

    threads = [thread() for _ in range(rng.randint(1, max_threads))]
    return lang.parse(" || ".join(f"({t})" for t in threads))


def harness_report(programs: dict[str, tuple], mutate: Optional[str] = None) -> dict:
    """Run soundness and completeness over named (program, bounds, initial)
    triples.  `mutate` names an axiom to ignore on the axiomatic side; a
    correct implementation must then report failures somewhere."""
    ignore = frozenset({mutate}) if mutate else frozenset()
    entries = []
    for name in sorted(programs):
        p, bounds, initial = programs[name]
        snd = soundness_check(p, bounds, name, initial)
        cmp_ = completeness_check(p, bounds, name, mutate_ignore=ignore)
        entries.append({"name": name,
                        "soundness": snd.as_json(),
                        "completeness": cmp_.as_json()})
    report = {"mutation": mutate, "programs": entries,
              "all_passed": all(e["soundness"]["passed"]
                                and e["completeness"]["passed"]
                                for e in entries)}
    if mutate:
        report["mutation_detected"] = not report["all_passed"]
    return report
