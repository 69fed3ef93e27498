"""TSO executions of pomsets and programs.

An execution of a pomset is an empty-buffer footstep under one of its own
linearisations.  Enumerating all linearisations is hopeless for wide
parallel pomsets, so the main path enumerates total orders of the global
writes only and merges per-component placements; `executions_direct` keeps
the literal definition for cross-checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import lang, tso_sem
from .po_sem import Bounds
from .pomset import (GW, Leaf, ParNode, Pomset, SeqNode, SPTerm,
                     linear_extensions_of_subset, linearisations,
                     sp_decompose)
from .state_foot import (Footstep, State, WriteEnv, env_of_linearisation,
                         footprint, footstep_par, footstep_seq, per_loc_n_max,
                         state, update, zeta)


class BoundsExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Reference path: enumerate linearisations


def executions_direct(P: Pomset, bounds: Bounds) -> set[Footstep]:
    if len(P) > bounds.lin_node_max:
        raise BoundsExceeded(
            f"{len(P)} nodes exceeds linearisation bound {bounds.lin_node_max}")
    out: set[Footstep] = set()
    n_max = per_loc_n_max(P)
    for lin in linearisations(P, bounds.lin_node_max):
        env = env_of_linearisation(P, lin)
        for (s, t) in footprint(P, env, bounds, n_max):
            if zeta(s) and zeta(t):
                out.add((s, t))
    return out


# ---------------------------------------------------------------------------
# Fast path: enumerate write orders, then placements per linear segment


def write_orders(P: Pomset) -> list[tuple[int, ...]]:
    writes = [v for v in P.nodes if P.labels[v].kind == GW]
    return linear_extensions_of_subset(P, writes)


def _leaf_envs(leaf: Leaf, P: Pomset, W: WriteEnv) -> list[WriteEnv]:
    """All ways to interleave the leaf's non-write nodes into W; the leaf's
    own writes are pinned at their W positions."""
    own = set(leaf.nodes)
    own_write_seq = [nid for (nid, _) in W if nid in own]
    chain_writes = [v for v in leaf.nodes if P.labels[v].kind == GW]
    if own_write_seq != chain_writes:
        return []
    rest = [(None if nid not in own else nid, a) for (nid, a) in W]
    out: list[WriteEnv] = []
    chain = list(leaf.nodes)

    def rec(i: int, j: int, acc: list):
        if i == len(chain) and j == len(rest):
            out.append(tuple(acc))
            return
        if i < len(chain) and P.labels[chain[i]].kind != GW:
            acc.append((chain[i], P.labels[chain[i]]))
            rec(i + 1, j, acc)
            acc.pop()
        if j < len(rest):
            nid, a = rest[j]
            if nid is None:
                acc.append((None, a))
                rec(i, j + 1, acc)
                acc.pop()
            elif i < len(chain) and chain[i] == nid:
                acc.append((nid, a))
                rec(i + 1, j + 1, acc)
                acc.pop()
        return

    rec(0, 0, [])
    return out


class _WriteOrderRunner:
    """Footsteps of an SP term given a fixed total order of global writes.

    Freedoms of a footstep's pre-state never disappear once introduced:
    under sequential composition the result keeps the whole left pre-state,
    and parallel composition demands empty buffers outright.  Since the
    callers only keep footsteps whose pre-state has empty buffers (and,
    when an initial state is known, globals that agree with it), any
    intermediate footstep already violating those can be dropped."""

    def __init__(self, P: Pomset, bounds: Bounds, n_max,
                 pre_globals: Optional[dict[str, int]] = None):
        self.P = P
        self.bounds = bounds
        self.n_max = n_max
        self.pre_globals = pre_globals
        self.memo: dict = {}
        self._seq_cache: dict = {}
        self._par_cache: dict = {}
        self._zeta_cache: dict = {}
        self._afp_cache: dict = {}
        self._env_cache: dict = {}

    def seq_sets(self, S1: frozenset, S2: frozenset) -> frozenset:
        key = (S1, S2)
        hit = self._seq_cache.get(key)
        if hit is None:
            hit = frozenset(self._prune(footstep_seq(S1, S2)))
            self._seq_cache[key] = hit
        return hit

    def zeta_filter(self, S: frozenset) -> frozenset:
        hit = self._zeta_cache.get(S)
        if hit is None:
            hit = frozenset((s, t) for (s, t) in S if zeta(s) and zeta(t))
            self._zeta_cache[S] = hit
        return hit

    def par_sets(self, S1: frozenset, S2: frozenset) -> frozenset:
        # parallel composition admits only empty-buffer footsteps on both
        # sides, so filter first to keep the pairwise work small
        S1, S2 = self.zeta_filter(S1), self.zeta_filter(S2)
        key = (S1, S2)
        hit = self._par_cache.get(key)
        if hit is None:
            hit = frozenset(self._prune(footstep_par(S1, S2)))
            self._par_cache[key] = hit
        return hit

    def _prune(self, steps: Iterable[Footstep]) -> set[Footstep]:
        out: set[Footstep] = set()
        g0 = self.pre_globals
        for (s, t) in steps:
            if any(e[1] != 0 for _, e in s.buffers):
                continue
            if g0 is not None and any(g0.get(k) != v for k, v in s.globals_):
                continue
            out.add((s, t))
        return out

    def _action_fp(self, a) -> frozenset:
        from .state_foot import action_footprint
        hit = self._afp_cache.get(a)
        if hit is None:
            hit = frozenset(action_footprint(a, self.bounds, self.n_max))
            self._afp_cache[a] = hit
        return hit

    def _env_fp(self, pending: tuple) -> frozenset:
        from .state_foot import env_footprint
        hit = self._env_cache.get(pending)
        if hit is None:
            hit = frozenset(env_footprint(pending, self.bounds))
            self._env_cache[pending] = hit
        return hit

    def _linear_fp(self, env: WriteEnv) -> frozenset[Footstep]:
        from .state_foot import EMPTY_STATE
        acc: frozenset[Footstep] = frozenset({(EMPTY_STATE, EMPTY_STATE)})
        pending: list = []
        for (nid, a) in env:
            if nid is None:
                pending.append(a)
                continue
            if pending:
                acc = self.seq_sets(acc, self._env_fp(tuple(pending)))
                pending = []
            acc = self.seq_sets(acc, self._action_fp(a))
            if not acc:
                return acc
        if pending:
            acc = self.seq_sets(acc, self._env_fp(tuple(pending)))
        return acc

    def run(self, term: SPTerm, W: WriteEnv) -> frozenset[Footstep]:
        key = (term, W)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(term, Leaf):
            acc: set[Footstep] = set()
            for env in _leaf_envs(term, self.P, W):
                acc |= self._linear_fp(env)
            res = frozenset(acc)
        elif isinstance(term, SeqNode):
            left_nodes = set(_nodes(term.left))
            right_nodes = set(_nodes(term.right))
            lo, hi = 0, len(W)
            for i, (nid, _) in enumerate(W):
                if nid in left_nodes:
                    lo = i + 1
                if nid in right_nodes:
                    hi = min(hi, i)
            acc = set()
            for cut in range(lo, hi + 1):
                S1 = self.run(term.left, W[:cut])
                if not S1:
                    continue
                S2 = self.run(term.right, W[cut:])
                acc |= self.seq_sets(S1, S2)
            res = frozenset(acc)
        else:
            S1 = self.run(term.left, W)
            S2 = self.run(term.right, W)
            res = self.par_sets(S1, S2)
        self.memo[key] = res
        return res


def _nodes(term: SPTerm) -> tuple[int, ...]:
    if isinstance(term, Leaf):
        return term.nodes
    return _nodes(term.left) + _nodes(term.right)


def executions(P: Pomset, bounds: Bounds,
               pre_globals: Optional[dict[str, int]] = None) -> set[Footstep]:
    if len(P) == 0:
        return set()
    if len(P) > 2 * bounds.lin_node_max:
        raise BoundsExceeded(
            f"{len(P)} nodes exceeds execution bound {2 * bounds.lin_node_max}")
    term = sp_decompose(P)
    if term is None:
        return set()
    runner = _WriteOrderRunner(P, bounds, per_loc_n_max(P), pre_globals)
    out: set[Footstep] = set()
    for worder in write_orders(P):
        W = tuple((v, P.labels[v]) for v in worder)
        for (s, t) in runner.run(term, W):
            if zeta(s) and zeta(t):
                out.add((s, t))
    return out


# ---------------------------------------------------------------------------
# Executions from an initial state


def _pre_matches(pre: State, sigma0: State) -> bool:
    g0 = sigma0.gmap()
    return all(g0.get(k) == v for k, v in pre.globals_)


def run_from(P: Pomset, sigma0: State, bounds: Bounds) -> set[State]:
    if not zeta(sigma0):
        raise ValueError("initial state must have empty buffers")
    out: set[State] = set()
    for (s, t) in executions(P, bounds, sigma0.gmap()):
        if _pre_matches(s, sigma0):
            out.add(update(sigma0, t))
    return out


def _globals_only(s: State) -> State:
    return State(s.globals_, ())


def program_executions(p: lang.Program | lang.Cmd, sigma0: State,
                       bounds: Bounds) -> set[State]:
    out: set[State] = set()
    for P in tso_sem.tso_pomsets(p, bounds):
        for s in run_from(P, sigma0, bounds):
            out.add(_globals_only(s))
    return out


# ---------------------------------------------------------------------------
# Litmus harness


class LitmusParseError(ValueError):
    pass


@dataclass(frozen=True)
class LitmusSpec:
    name: str
    program: lang.Program
    initial: tuple[tuple[str, int], ...]
    query: lang.BExpr
    reachable: bool                      # True: reachable(query); False: forbidden(query)
    unroll: Optional[int] = None
    values: Optional[frozenset[int]] = None

    def initial_state(self) -> State:
        return state(dict(self.initial))


@dataclass
class Witness:
    pomset: Pomset
    env: WriteEnv
    footstep: Footstep
    final: State


@dataclass
class Verdict:
    holds: bool
    reachable: bool
    witnesses: list[Witness] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    bounds: Optional[Bounds] = None


def eval_predicate(pred: lang.BExpr, final_globals: dict[str, int]) -> bool:
    def ev(e) -> int:
        if isinstance(e, lang.IntConst):
            return e.value
        if isinstance(e, lang.ReadLoc):
            return final_globals.get(e.loc, 0)
        if isinstance(e, lang.BinOp):
            a, b = ev(e.lhs), ev(e.rhs)
            return {"+": a + b, "-": a - b, "*": a * b}[e.op]
        raise TypeError(e)

    def bv(b) -> bool:
        if isinstance(b, lang.BoolConst):
            return b.value
        if isinstance(b, lang.Not):
            return not bv(b.arg)
        if isinstance(b, lang.Cmp):
            a, c = ev(b.lhs), ev(b.rhs)
            return a == c if b.op == "=" else a < c
        if isinstance(b, lang.Logic):
            if b.op == "and":
                return bv(b.lhs) and bv(b.rhs)
            return bv(b.lhs) or bv(b.rhs)
        raise TypeError(b)

    return bv(pred)


def _final_globals(P: Pomset, worder: tuple[int, ...],
                   sigma0: State) -> dict[str, int]:
    """The final global state a given write order produces (last write per
    location wins, initial state elsewhere)."""
    g = sigma0.gmap()
    for v in worder:
        g[P.labels[v].loc] = P.labels[v].val
    return g


def _possible_final_values(P: Pomset, sigma0: State) -> dict[str, set[int]]:
    """Per-location over-approximation of final values over all write
    orders: maximal writes to the location, else the initial value."""
    out: dict[str, set[int]] = {}
    g0 = sigma0.gmap()
    writes_by_loc: dict[str, list[int]] = {}
    for v in P.nodes:
        a = P.labels[v]
        if a.kind == GW:
            writes_by_loc.setdefault(a.loc, []).append(v)
    locs = set(g0) | set(writes_by_loc)
    for loc in locs:
        vals: set[int] = set()
        nodes = writes_by_loc.get(loc, [])
        maximal = [v for v in nodes
                   if not any(P.less(v, u) for u in nodes if u != v)]
        vals |= {P.labels[v].val for v in maximal}
        if not nodes:
            vals.add(g0.get(loc, 0))
        out[loc] = vals
    return out


def _predicate_feasible(pred: lang.BExpr, possible: dict[str, set[int]]) -> bool:
    locs = sorted(_pred_locs(pred))
    combos = [{}]
    for loc in locs:
        vals = possible.get(loc, {0})
        combos = [dict(c, **{loc: v}) for c in combos for v in vals]
    return any(eval_predicate(pred, c) for c in combos)


def _pred_locs(pred) -> set[str]:
    out: set[str] = set()

    def walk(n):
        if isinstance(n, lang.ReadLoc):
            out.add(n.loc)
        elif isinstance(n, (lang.BinOp, lang.Cmp, lang.Logic)):
            walk(n.lhs)
            walk(n.rhs)
        elif isinstance(n, lang.Not):
            walk(n.arg)

    walk(pred)
    return out


def _witness_env(P: Pomset, worder: tuple[int, ...], sigma0: State,
                 bounds: Bounds, n_max: int) -> Optional[tuple[WriteEnv, Footstep]]:
    """A concrete linearisation of P with the given write order whose
    empty-buffer footprint accepts sigma0, if one exists."""
    wpos = {v: i for i, v in enumerate(worder)}
    preds = [set() for _ in P.nodes]
    for a, b in P.lt:
        preds[b].add(a)
    acc: list[int] = []
    placed: set[int] = set()

    def rec() -> Optional[tuple[WriteEnv, Footstep]]:
        if len(acc) == len(P):
            env = env_of_linearisation(P, tuple(acc))
            for (s, t) in footprint(P, env, bounds, n_max):
                if zeta(s) and zeta(t) and _pre_matches(s, sigma0):
                    return (env, (s, t))
            return None
        done_writes = sum(1 for v in acc if P.labels[v].kind == GW)
        for v in P.nodes:
            if v in placed or not preds[v] <= placed:
                continue
            if P.labels[v].kind == GW and wpos.get(v) != done_writes:
                continue
            placed.add(v)
            acc.append(v)
            got = rec()
            if got is not None:
                return got
            acc.pop()
            placed.remove(v)
        return None

    return rec()


def litmus_run(spec: LitmusSpec, bounds: Bounds,
               witness_cap: int = 5) -> Verdict:
    init = {loc: 0 for loc in lang.locations_of(spec.program)}
    init.update(dict(spec.initial))
    sigma0 = state(init)
    stats = {"pomsets": 0, "pomsets_pruned": 0, "write_orders": 0,
             "write_orders_checked": 0, "hits": 0}
    witnesses: list[Witness] = []
    found = False
    pomsets = tso_sem.tso_pomsets(spec.program, bounds)
    stats["pomsets"] = len(pomsets)
    for P in sorted(pomsets, key=lambda q: (len(q), q.canon())):
        if not _predicate_feasible(spec.query, _possible_final_values(P, sigma0)):
            stats["pomsets_pruned"] += 1
            continue
        term = sp_decompose(P)
        if term is None:
            continue
        n_max = per_loc_n_max(P)
        runner = _WriteOrderRunner(P, bounds, n_max, sigma0.gmap())
        for worder in write_orders(P):
            stats["write_orders"] += 1
            final = _final_globals(P, worder, sigma0)
            if not eval_predicate(spec.query, final):
                continue
            stats["write_orders_checked"] += 1
            W = tuple((v, P.labels[v]) for v in worder)
            hit = None
            for (s, t) in runner.run(term, W):
                if zeta(s) and zeta(t) and _pre_matches(s, sigma0):
                    hit = (s, t)
                    break
            if hit is None:
                continue
            stats["hits"] += 1
            found = True
            if len(witnesses) < witness_cap:
                got = _witness_env(P, worder, sigma0, bounds, n_max)
                if got is not None:
                    env, step = got
                    witnesses.append(Witness(P, env, step,
                                             update(sigma0, step[1])))
            if not spec.reachable:
                # one reachable counterexample refutes a forbidden query
                return Verdict(False, False, witnesses, stats, bounds)
            if len(witnesses) >= witness_cap:
                return Verdict(True, True, witnesses, stats, bounds)
    holds = found if spec.reachable else not found
    return Verdict(holds, spec.reachable, witnesses, stats, bounds)


# ---------------------------------------------------------------------------
# Litmus file format
#
#   name dekker
#   program {
#     (x := 1; if y = 0 then z := 1 else skip) || ...
#   }
#   init { x = 0; y = 0 }
#   reachable ( z = 1 && w = 1 )      -- or: forbidden ( ... )
#   bounds { unroll = 2; values = {0, 1} }   -- optional
#
# '#' starts a comment; blocks may appear in any order.

import re as _re


def parse_litmus(text: str, default_name: str = "litmus") -> LitmusSpec:
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())

    def block(kw: str) -> Optional[str]:
        m = _re.search(rf"\b{kw}\s*\{{", text)
        if m is None:
            return None
        depth, i = 1, m.end()
        while i < len(text) and depth:
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
            i += 1
        if depth:
            raise LitmusParseError(f"unterminated {kw} block")
        return text[m.end():i - 1]

    def paren(kw: str) -> Optional[str]:
        m = _re.search(rf"\b{kw}\s*\(", text)
        if m is None:
            return None
        depth, i = 1, m.end()
        while i < len(text) and depth:
            if text[i] == "(":
                depth += 1
            elif text[i] == ")":
                depth -= 1
            i += 1
        if depth:
            raise LitmusParseError(f"unterminated {kw} (...)")
        return text[m.end():i - 1]

    mname = _re.search(r"\bname\s+([A-Za-z_][A-Za-z_0-9]*)", text)
    name = mname.group(1) if mname else default_name

    prog_src = block("program")
    if prog_src is None:
        raise LitmusParseError("missing program block")
    program = lang.parse(prog_src)

    initial: list[tuple[str, int]] = []
    init_src = block("init")
    if init_src is not None:
        for item in init_src.replace("\n", ";").split(";"):
            item = item.strip()
            if not item:
                continue
            m = _re.fullmatch(r"([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(-?\d+)", item)
            if m is None:
                raise LitmusParseError(f"bad init entry {item!r}")
            initial.append((m.group(1), int(m.group(2))))

    reach_src = paren("reachable")
    forb_src = paren("forbidden")
    if (reach_src is None) == (forb_src is None):
        raise LitmusParseError("need exactly one of reachable(...) / forbidden(...)")
    query = lang.parse_bexpr(reach_src if reach_src is not None else forb_src)

    unroll = None
    values = None
    bsrc = block("bounds")
    if bsrc is not None:
        m = _re.search(r"\bunroll\s*=\s*(\d+)", bsrc)
        if m:
            unroll = int(m.group(1))
        m = _re.search(r"\bvalues\s*=\s*\{([^}]*)\}", bsrc)
        if m:
            values = frozenset(int(v) for v in m.group(1).split(",") if v.strip())

    return LitmusSpec(name, program, tuple(sorted(initial)), query,
                      reach_src is not None, unroll, values)


def bounds_for(spec: LitmusSpec, lin_node_max: int = 12) -> Bounds:
    from .po_sem import default_bounds
    B = default_bounds(spec.program, dict(spec.initial))
    if spec.values is not None:
        B = Bounds(frozenset(spec.values), B.unroll_max, lin_node_max)
    if spec.unroll is not None:
        B = B.with_unroll(spec.unroll)
    return B
