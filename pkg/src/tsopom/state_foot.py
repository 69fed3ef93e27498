"""Buffered states, footsteps and pomset footprints.

A buffered state maps global locations to values and buffer locations to
(value, count) entries; entries with count 0 forget their value, so the
canonical form stores a None sentinel there.  A footstep is a (pre,
post) pair of such states; the footprint of a pomset under a write
environment is the set of footsteps it can take.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .po_sem import Bounds
from .pomset import (Action, GW, Leaf, NotSeriesParallel, ParNode, Pomset,
                     SeqNode, SPTerm, is_write, sp_decompose)

# Inline property checking: every footstep leaving `footprint` is checked
# against the accounting invariants; violations are counted, never raised,
# so the test suite can assert the counters stayed at zero.
PROPERTY_CHECKS = True
VIOLATIONS: Counter = Counter()


# ---------------------------------------------------------------------------
# Buffered states

EMPTY_ENTRY = (None, 0)


def entry(value: Optional[int], count: int) -> tuple[Optional[int], int]:
    """Canonical buffer entry: count 0 forgets the value."""
    if count == 0:
        return EMPTY_ENTRY
    return (value, count)


@dataclass(frozen=True)
class State:
    """A buffered state; globals maps locations to values, buffers maps
    locations to canonical (value, count) entries."""
    globals_: tuple[tuple[str, int], ...] = ()
    buffers: tuple[tuple[str, tuple[Optional[int], int]], ...] = ()

    @staticmethod
    def make(globals_: dict[str, int] | None = None,
             buffers: dict[str, tuple[Optional[int], int]] | None = None) -> "State":
        g = tuple(sorted((globals_ or {}).items()))
        b = tuple(sorted((loc, entry(*e)) for loc, e in (buffers or {}).items()))
        return State(g, b)

    def gmap(self) -> dict[str, int]:
        return dict(self.globals_)

    def bmap(self) -> dict[str, tuple[Optional[int], int]]:
        return dict(self.buffers)

    def dom(self) -> set[tuple[str, str]]:
        return {("g", k) for k, _ in self.globals_} | \
               {("b", k) for k, _ in self.buffers}

    def count(self, loc: str) -> Optional[int]:
        """Buffer count for loc, None if absent from the domain."""
        for k, (_, n) in self.buffers:
            if k == loc:
                return n
        return None

    def is_empty(self) -> bool:
        return not self.globals_ and not self.buffers

    def __repr__(self):
        parts = [f"{k}:{v}" for k, v in self.globals_]
        parts += [f"b{k}:{v}_{n}" for k, (v, n) in self.buffers]
        return "[" + ", ".join(parts) + "]"


EMPTY_STATE = State()

Footstep = tuple[State, State]


def state(globals_: dict[str, int] | None = None,
          buffers: dict[str, tuple[Optional[int], int]] | None = None) -> State:
    return State.make(globals_, buffers)


def zeta(sigma: State) -> bool:
    return all(n == 0 for _, (_, n) in sigma.buffers)


def consistent(s1: State, s2: State) -> bool:
    g2 = dict(s2.globals_)
    for k, v in s1.globals_:
        if k in g2 and g2[k] != v:
            return False
    b2 = dict(s2.buffers)
    for k, e in s1.buffers:
        if k in b2 and b2[k] != e:
            return False
    return True


def update(s: State, t: State) -> State:
    g = dict(s.globals_)
    g.update(t.globals_)
    b = dict(s.buffers)
    b.update(t.buffers)
    return State(tuple(sorted(g.items())), tuple(sorted(b.items())))


def union(s1: State, s2: State) -> State:
    """Union of consistent states."""
    g = dict(s1.globals_)
    g.update(s2.globals_)
    b = dict(s1.buffers)
    b.update(s2.buffers)
    return State(tuple(sorted(g.items())), tuple(sorted(b.items())))


def submap(small: State, big: State) -> bool:
    g = dict(big.globals_)
    if any(g.get(k) != v for k, v in small.globals_):
        return False
    b = dict(big.buffers)
    return all(b.get(k) == e for k, e in small.buffers)


def _minus_dom(s: State, t: State) -> State:
    """s restricted to keys outside dom(t)."""
    gt = {k for k, _ in t.globals_}
    bt = {k for k, _ in t.buffers}
    return State(tuple((k, v) for k, v in s.globals_ if k not in gt),
                 tuple((k, e) for k, e in s.buffers if k not in bt))


# ---------------------------------------------------------------------------
# Footstep composition


def compose(f1: Footstep, f2: Footstep) -> Optional[Footstep]:
    (s1, t1), (s2, t2) = f1, f2
    if not consistent(update(s1, t1), s2):
        return None
    return (union(s1, _minus_dom(s2, t1)), update(t1, t2))


def footstep_seq(S1: Iterable[Footstep], S2: Iterable[Footstep]) -> set[Footstep]:
    out = set()
    for f1 in S1:
        for f2 in S2:
            c = compose(f1, f2)
            if c is not None:
                out.add(c)
    return out


def footstep_par(S1: Iterable[Footstep], S2: Iterable[Footstep]) -> set[Footstep]:
    out = set()
    for (s1, t1) in S1:
        if not (zeta(s1) and zeta(t1)):
            continue
        for (s2, t2) in S2:
            if not (zeta(s2) and zeta(t2)):
                continue
            if consistent(s1, s2) and consistent(t1, t2):
                out.add((union(s1, s2), union(t1, t2)))
    return out


# ---------------------------------------------------------------------------
# Action and environment footprints


def action_footprint(a: Action, bounds: Bounds,
                     n_max: "int | Mapping[str, int]") -> set[Footstep]:
    V = bounds.values
    if not isinstance(n_max, int):
        n_max = n_max.get(a.loc, 0) if a.loc else 0
    out: set[Footstep] = set()
    if a.kind == "delta":
        out.add((EMPTY_STATE, EMPTY_STATE))
    elif a.kind == "rd":
        out.add((state({a.loc: a.val}, {a.loc: (None, 0)}), EMPTY_STATE))
        for n in range(n_max + 1):
            out.add((state({}, {a.loc: (a.val, n + 1)}), EMPTY_STATE))
    elif a.kind == "bw":
        for vp in V:
            for n in range(n_max + 1):
                out.add((state({}, {a.loc: (vp, n)}),
                         state({}, {a.loc: (a.val, n + 1)})))
    elif a.kind == "gw":
        for vp in V:
            for vpp in V:
                for n in range(n_max + 1):
                    out.add((state({a.loc: vp}, {a.loc: (vpp, n + 1)}),
                             state({a.loc: a.val}, {a.loc: (vpp, n)})))
    else:
        raise ValueError(f"unknown action kind {a.kind}")
    return out


def env_footprint(writes: Iterable[Action], bounds: Bounds) -> set[Footstep]:
    """Footprint of a sequence of foreign global writes: globals only."""
    finals: dict[str, int] = {}
    for a in writes:
        if a.kind != GW:
            raise ValueError("environment steps must be global writes")
        finals[a.loc] = a.val
    locs = sorted(finals)
    out: set[Footstep] = set()

    def rec(i: int, pre: dict[str, int]):
        if i == len(locs):
            out.add((state(dict(pre)), state(dict(finals))))
            return
        for v in bounds.values:
            pre[locs[i]] = v
            rec(i + 1, pre)
            del pre[locs[i]]

    rec(0, {})
    return out


# ---------------------------------------------------------------------------
# Write environments

# A write environment is a linearisation of P interleaved with foreign
# global writes: a tuple of (node_id or None, Action); None marks foreign.
WriteEnv = tuple[tuple[Optional[int], Action], ...]


def env_of_linearisation(P: Pomset, lin: tuple[int, ...],
                         foreign: Iterable[tuple[int, Action]] = ()) -> WriteEnv:
    """Build a WriteEnv from node order `lin`, inserting each foreign write
    before position given in `foreign` (position, action) pairs."""
    slots: list[list[tuple[Optional[int], Action]]] = \
        [[] for _ in range(len(lin) + 1)]
    for pos, a in foreign:
        slots[pos].append((None, a))
    out: list[tuple[Optional[int], Action]] = []
    for i, v in enumerate(lin):
        out.extend(slots[i])
        out.append((v, P.labels[v]))
    out.extend(slots[len(lin)])
    return tuple(out)


def restrict_env(env: WriteEnv, keep_nodes: set[int]) -> WriteEnv:
    """Par projection: keep foreign writes, this side's nodes, and the other
    side's global writes (demoted to foreign)."""
    out = []
    for (nid, a) in env:
        if nid is None or nid in keep_nodes:
            out.append((nid, a))
        elif a.kind == GW:
            out.append((None, a))
    return tuple(out)


# ---------------------------------------------------------------------------
# Characteristic and differential


def characteristic(x: str, P: Pomset,
                   term: Optional[SPTerm] = None) -> tuple[int, int]:
    if term is None:
        term = sp_decompose(P)
        if term is None:
            raise NotSeriesParallel("characteristic requires an SP pomset")
    return _char_term(x, P, term)


def _char_action(x: str, a: Action) -> tuple[int, int]:
    if a.kind == "gw" and a.loc == x:
        return (1, 0)
    if a.kind == "bw" and a.loc == x:
        return (0, 1)
    return (0, 0)


def _char_seq(c1: tuple[int, int], c2: tuple[int, int]) -> tuple[int, int]:
    (g1, b1), (g2, b2) = c1, c2
    return (g1 + max(0, g2 - b1), b2 + max(0, b1 - g2))


def _char_term(x: str, P: Pomset, term: SPTerm) -> tuple[int, int]:
    if isinstance(term, Leaf):
        acc = (0, 0)
        for v in term.nodes:
            acc = _char_seq(acc, _char_action(x, P.labels[v]))
        return acc
    l = _char_term(x, P, term.left)
    r = _char_term(x, P, term.right)
    if isinstance(term, SeqNode):
        return _char_seq(l, r)
    return (l[0] + r[0], l[1] + r[1])


def differential(x: str, P: Pomset) -> int:
    b = sum(1 for a in P.labels if a.kind == "bw" and a.loc == x)
    g = sum(1 for a in P.labels if a.kind == "gw" and a.loc == x)
    return b - g


# ---------------------------------------------------------------------------
# Footprints by SP decomposition


def default_n_max(P: Pomset, initial_counts: int = 0) -> int:
    return sum(1 for a in P.labels if a.kind == "bw") + initial_counts


def per_loc_n_max(P: Pomset, initial_counts: int = 0) -> dict[str, int]:
    """Per-location pending-count bound: a location's buffer can never hold
    more entries than the pomset has buffer writes to it."""
    caps: dict[str, int] = {}
    for a in P.labels:
        if a.kind == "bw":
            caps[a.loc] = caps.get(a.loc, 0) + 1
    return {loc: n + initial_counts for loc, n in caps.items()}


def footprint(P: Pomset, env: WriteEnv, bounds: Bounds,
              n_max: Optional[int] = None, check: Optional[bool] = None) -> set[Footstep]:
    """Footprint of P under the write environment `env`.

    Computed structurally: SP-decompose P, handle linear segments action by
    action with interleaved environment steps, split sequential nodes at
    the canonical point, and project the environment for parallel nodes."""
    if n_max is None:
        n_max = default_n_max(P)
    if check is None:
        check = PROPERTY_CHECKS
    if len(P) == 0:
        # no action node ever grounds a derivation
        return set()
    term = sp_decompose(P)
    if term is None:
        raise NotSeriesParallel("footprint requires an SP pomset")
    out = _fp_term(term, P, env, bounds, n_max)
    if check:
        _check_footprint(P, term, env, out)
    return out


def _fp_term(term: SPTerm, P: Pomset, env: WriteEnv, bounds: Bounds,
             n_max: int) -> set[Footstep]:
    if isinstance(term, Leaf):
        return _fp_linear(term.nodes, P, env, bounds, n_max)
    if isinstance(term, SeqNode):
        left_nodes = set(_term_nodes(term.left))
        env1, mid, env2 = _canonical_split(env, left_nodes)
        S1 = _fp_term(term.left, P, env1, bounds, n_max)
        S1 = footstep_seq(S1, env_footprint([a for _, a in mid], bounds))
        S2 = _fp_term(term.right, P, env2, bounds, n_max)
        return footstep_seq(S1, S2)
    left_nodes = set(_term_nodes(term.left))
    right_nodes = set(_term_nodes(term.right))
    env1 = restrict_env(env, left_nodes)
    env2 = restrict_env(env, right_nodes)
    S1 = _fp_term(term.left, P, env1, bounds, n_max)
    S2 = _fp_term(term.right, P, env2, bounds, n_max)
    if PROPERTY_CHECKS and (S1 or S2):
        for side_nodes, S in ((left_nodes, S1), (right_nodes, S2)):
            if not S:
                continue
            sub, _ = P.induced(side_nodes)
            for x in {a.loc for a in sub.labels if a.loc}:
                if characteristic(x, sub) != (0, 0) and \
                        any(zeta(s) and zeta(t) for (s, t) in S):
                    VIOLATIONS["par-side-characteristic"] += 1
    return footstep_par(S1, S2)


def _term_nodes(term: SPTerm) -> tuple[int, ...]:
    if isinstance(term, Leaf):
        return term.nodes
    return _term_nodes(term.left) + _term_nodes(term.right)


def _canonical_split(env: WriteEnv, left_nodes: set[int]
                     ) -> tuple[WriteEnv, WriteEnv, WriteEnv]:
    """Split env as (through last left node, gap writes, from first right
    node); leading foreign writes stay with the left part."""
    last_left = -1
    first_right = len(env)
    for i, (nid, _) in enumerate(env):
        if nid is not None:
            if nid in left_nodes:
                last_left = i
            else:
                first_right = min(first_right, i)
    return (env[:last_left + 1],
            env[last_left + 1:first_right],
            env[first_right:])


def _fp_linear(nodes: tuple[int, ...], P: Pomset, env: WriteEnv,
               bounds: Bounds, n_max: int) -> set[Footstep]:
    own = {v for v in nodes}
    acc: set[Footstep] = {(EMPTY_STATE, EMPTY_STATE)}
    pending: list[Action] = []
    for (nid, a) in env:
        if nid is None:
            pending.append(a)
            continue
        if nid not in own:
            raise ValueError("environment does not match segment")
        if pending:
            acc = footstep_seq(acc, env_footprint(pending, bounds))
            pending = []
        acc = footstep_seq(acc, action_footprint(a, bounds, n_max))
        if not acc:
            return acc
    if pending:
        acc = footstep_seq(acc, env_footprint(pending, bounds))
    return acc


# ---------------------------------------------------------------------------
# Inline accounting checks


def _check_footprint(P: Pomset, term: SPTerm, env: WriteEnv,
                     steps: set[Footstep]) -> None:
    locs = sorted({a.loc for a in P.labels if a.loc} |
                  {a.loc for _, a in env if a.loc})
    chars = {x: characteristic(x, P, term) for x in locs}
    diffs = {x: differential(x, P) for x in locs}
    finals: dict[str, int] = {}
    for (_, a) in env:
        if a.kind == GW:
            finals[a.loc] = a.val
    for (s, t) in steps:
        for x in locs:
            g, b = chars[x]
            sc, tc = s.count(x), t.count(x)
            if (0 if sc is None else sc) < g or (sc is None and g != 0):
                VIOLATIONS["char-pre-bound"] += 1
            if (0 if tc is None else tc) < b or (tc is None and b != 0):
                VIOLATIONS["char-post-bound"] += 1
            if sc is not None and tc is not None and tc != sc + diffs[x]:
                VIOLATIONS["differential-count"] += 1
        if t.gmap() != finals:
            VIOLATIONS["final-globals-vs-writes"] += 1


# ---------------------------------------------------------------------------
# Reference oracle: least fixpoint over the closure rules


def footprint_oracle(P: Pomset, env: WriteEnv, bounds: Bounds,
                     n_max: Optional[int] = None, size_guard: int = 6
                     ) -> set[Footstep]:
    if len(P) > size_guard:
        raise ValueError(f"oracle limited to {size_guard} nodes")
    if n_max is None:
        n_max = default_n_max(P)
    memo: dict = {}

    def key(nodes: frozenset[int], e: WriteEnv):
        return (nodes, e)

    def rec(nodes: frozenset[int], e: WriteEnv) -> frozenset[Footstep]:
        k = key(nodes, e)
        if k in memo:
            return memo[k]
        memo[k] = frozenset()
        result: set[Footstep] = set()
        if len(nodes) == 1:
            v = next(iter(nodes))
            i = next(i for i, (nid, _) in enumerate(e) if nid == v)
            pre = env_footprint([a for _, a in e[:i]], bounds)
            post = env_footprint([a for _, a in e[i + 1:]], bounds)
            mid = action_footprint(P.labels[v], bounds, n_max)
            result |= footstep_seq(footstep_seq(pre, mid), post)
        if len(nodes) >= 2:
            # Seq: every cut of `nodes` into A fully before B, every env split
            for A, B in _series_cuts(P, nodes):
                own_positions = [i for i, (nid, _) in enumerate(e)
                                 if nid is not None]
                a_own = [i for i in own_positions if e[i][0] in A]
                b_own = [i for i in own_positions if e[i][0] in B]
                if a_own and b_own and max(a_own) > min(b_own):
                    continue
                lo = (max(a_own) + 1) if a_own else 0
                hi = (min(b_own) + 1) if b_own else len(e) + 1
                for cut in range(lo, hi):
                    S1 = rec(A, e[:cut])
                    if not S1:
                        continue
                    S2 = rec(B, e[cut:])
                    result |= footstep_seq(S1, S2)
            # Par: every cut into incomparable halves
            for A, B in _parallel_cuts(P, nodes):
                e1 = _oracle_restrict(e, A)
                e2 = _oracle_restrict(e, B)
                result |= footstep_par(rec(A, e1), rec(B, e2))
        memo[k] = frozenset(result)
        return memo[k]

    all_nodes = frozenset(P.nodes)
    if not all_nodes:
        return set()
    return set(rec(all_nodes, env))


def _series_cuts(P: Pomset, nodes: frozenset[int]):
    members = sorted(nodes)
    for mask in range(1, 2 ** len(members) - 1):
        A = frozenset(m for i, m in enumerate(members) if mask >> i & 1)
        B = nodes - A
        if all((a, b) in P.lt for a in A for b in B):
            yield A, B


def _parallel_cuts(P: Pomset, nodes: frozenset[int]):
    members = sorted(nodes)
    seen = set()
    for mask in range(1, 2 ** len(members) - 1):
        A = frozenset(m for i, m in enumerate(members) if mask >> i & 1)
        if A in seen:
            continue
        B = nodes - A
        seen.add(B)
        if all(not P.comparable(a, b) for a in A for b in B):
            yield A, B


def _oracle_restrict(e: WriteEnv, keep: frozenset[int]) -> WriteEnv:
    out = []
    for (nid, a) in e:
        if nid is None or nid in keep:
            out.append((nid, a))
        elif a.kind == GW:
            out.append((None, a))
    return tuple(out)
