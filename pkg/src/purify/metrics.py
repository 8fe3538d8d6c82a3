"""Static and dynamic parallelism measures.

``span`` is the length of the longest chain of unhandled effect operations
in a term; ``work`` is their total count.  Both are structural recursions:
values and pure wrappers cost nothing, pairs/applications combine children
by max (span) or sum (work), and Each/Join add one.

Two artifact-specific refinements keep the static numbers aligned with what
actually runs.  First, when a signature is supplied, a saturated application
of an effectful constant in target position counts as one operation (the
optimizing translation embeds such calls directly, without a Join).  Second,
the bind pattern Join(Map(fun, arg)) with a combinator-bodied continuation
is costed sequentially: the effects of both sides add up.

``TraceDag`` is the runtime counterpart: a dependency DAG of executed effect
occurrences, with span/work read off the graph and a critical-path latency
simulation on top.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .terms import (
    App, Ap, Const, Each, Fst, Join, Lam, Lit, Map, Prd, Pure, PurifyError,
    Signature, Snd, TGT, Term, Unt, Var,
)


class CyclicDag(PurifyError):
    pass


class UnknownEffect(PurifyError):
    pass


# ---------------------------------------------------------------------------
# Static span and work
# ---------------------------------------------------------------------------

def _invocation_weight(e: Term, sig: Signature | None) -> int:
    """1 when the node is a saturated effectful-constant use in target position."""
    if sig is None or e.label is not TGT:
        return 0
    if isinstance(e, Const):
        decl = sig.lookup(e.name)
        return 1 if decl is not None and decl.effectful and decl.effect_arity() == 0 else 0
    if isinstance(e, App):
        head, depth = e, 0
        while isinstance(head, App):
            head = head.fun
            depth += 1
        if isinstance(head, Const):
            decl = sig.lookup(head.name)
            if decl is not None and decl.effectful and decl.effect_arity() == depth:
                return 1
    return 0


def _measure(e: Term, sig: Signature | None, combine) -> int:
    def go(t: Term) -> int:
        match t:
            case Var() | Unt() | Lit() | Pure():
                return 0
            case Const():
                return _invocation_weight(t, sig)
            case Lam():
                # Sequencing lambdas carry combinator bodies and stay transparent;
                # ordinary (common-bodied) lambdas are values and cost nothing.
                return go(t.body) if t.body.label is TGT else 0
            case Fst(p) | Snd(p):
                return go(p)
            case App(a, b):
                return _invocation_weight(t, sig) + combine(go(a), go(b))
            case Prd(a, b) | Ap(a, b) | Map(a, b):
                return combine(go(a), go(b))
            case Each(x):
                return 1 + go(x)
            case Join(x):
                if (
                    isinstance(x, Map)
                    and isinstance(x.fun, Lam)
                    and x.fun.body.label is TGT
                ):
                    # bind pattern: first the argument's effects, then the chain
                    # built by the continuation
                    return go(x.arg) + go(x.fun.body)
                return 1 + go(x)
        raise PurifyError(f"unknown term former {type(t).__name__}")

    return go(e)


def span(e: Term, signature: Signature | None = None) -> int:
    """Longest chain of unhandled effect operations."""
    return _measure(e, signature, max)


def work(e: Term, signature: Signature | None = None) -> int:
    """Total count of unhandled effect operations."""
    return _measure(e, signature, lambda a, b: a + b)


# ---------------------------------------------------------------------------
# Trace DAGs
# ---------------------------------------------------------------------------

_ids = itertools.count(1)


@dataclass(frozen=True)
class DagNode:
    id: int
    effect: str
    arg: str


@dataclass(frozen=True)
class TraceDag:
    """Dependency DAG of executed effects; an edge (a, b) means b waits for a."""

    nodes: tuple[DagNode, ...]
    edges: frozenset[tuple[int, int]]
    result: object

    def with_result(self, result: object) -> "TraceDag":
        return TraceDag(self.nodes, self.edges, result)


def empty_dag(result: object) -> TraceDag:
    return TraceDag((), frozenset(), result)


def single_effect(effect: str, arg: str, result: object) -> TraceDag:
    return TraceDag((DagNode(next(_ids), effect, arg),), frozenset(), result)


def _renumber(d: TraceDag) -> TraceDag:
    mapping = {n.id: next(_ids) for n in d.nodes}
    nodes = tuple(DagNode(mapping[n.id], n.effect, n.arg) for n in d.nodes)
    edges = frozenset((mapping[a], mapping[b]) for a, b in d.edges)
    return TraceDag(nodes, edges, d.result)


def _sources(d: TraceDag) -> list[int]:
    targets = {b for _, b in d.edges}
    return [n.id for n in d.nodes if n.id not in targets]


def _sinks(d: TraceDag) -> list[int]:
    origins = {a for a, _ in d.edges}
    return [n.id for n in d.nodes if n.id not in origins]


def parallel_compose(a: TraceDag, b: TraceDag, result: object) -> TraceDag:
    """Both halves may run independently."""
    a, b = _renumber(a), _renumber(b)
    return TraceDag(a.nodes + b.nodes, a.edges | b.edges, result)


def sequential_compose(a: TraceDag, b: TraceDag, result: object) -> TraceDag:
    """Everything in ``b`` waits for everything in ``a`` to finish."""
    a, b = _renumber(a), _renumber(b)
    bridge = frozenset((s, t) for s in _sinks(a) for t in _sources(b))
    return TraceDag(a.nodes + b.nodes, a.edges | b.edges | bridge, result)


def _dependencies(d: TraceDag) -> dict[int, list[int]]:
    deps: dict[int, list[int]] = {n.id: [] for n in d.nodes}
    for a, b in sorted(d.edges):
        deps[b].append(a)
    return deps


def _topo_depths(d: TraceDag) -> dict[int, int]:
    """Nodes on the longest dependency path ending at each node."""
    deps = _dependencies(d)
    depth: dict[int, int] = {}

    order: list[int] = []
    state: dict[int, int] = {}

    def visit(n: int, stack: tuple[int, ...]) -> None:
        if state.get(n) == 2:
            return
        if state.get(n) == 1:
            raise CyclicDag(f"cycle through node {n}")
        state[n] = 1
        for p in deps[n]:
            visit(p, stack + (n,))
        state[n] = 2
        order.append(n)

    for node in d.nodes:
        visit(node.id, ())
    for n in order:
        depth[n] = 1 + max((depth[p] for p in deps[n]), default=0)
    return depth


def dyn_span(d: TraceDag) -> int:
    """Number of nodes on the longest dependency path."""
    if not d.nodes:
        return 0
    return max(_topo_depths(d).values())


def dyn_work(d: TraceDag) -> int:
    return len(d.nodes)


def simulate_latency(d: TraceDag, latencies: dict[str, float]) -> float:
    """Critical-path completion time with unbounded workers."""
    for n in d.nodes:
        if n.effect not in latencies:
            raise UnknownEffect(f"no latency for effect {n.effect!r}")
    deps = _dependencies(d)
    _topo_depths(d)  # cycle check
    by_id = {n.id: n for n in d.nodes}
    finish: dict[int, float] = {}

    def fin(nid: int) -> float:
        if nid not in finish:
            finish[nid] = latencies[by_id[nid].effect] + max(
                (fin(p) for p in deps[nid]), default=0.0
            )
        return finish[nid]

    return max((fin(n.id) for n in d.nodes), default=0.0)


def dag_iso(a: TraceDag, b: TraceDag) -> bool:
    """Isomorphism respecting effect names, argument labels and edges."""
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False

    def profile(d: TraceDag) -> dict:
        indeg = {n.id: 0 for n in d.nodes}
        outdeg = {n.id: 0 for n in d.nodes}
        for x, y in d.edges:
            outdeg[x] += 1
            indeg[y] += 1
        return {
            n.id: (n.effect, n.arg, indeg[n.id], outdeg[n.id]) for n in d.nodes
        }

    pa, pb = profile(a), profile(b)
    if sorted(pa.values()) != sorted(pb.values()):
        return False

    b_by_profile: dict[tuple, list[int]] = {}
    for nid, prof in pb.items():
        b_by_profile.setdefault(prof, []).append(nid)
    a_ids = sorted(pa, key=lambda n: (pa[n], n))
    edges_a, edges_b = a.edges, b.edges

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def ok(aid: int, bid: int) -> bool:
        for x, y in mapping.items():
            if ((aid, x) in edges_a) != ((bid, y) in edges_b):
                return False
            if ((x, aid) in edges_a) != ((y, bid) in edges_b):
                return False
        return True

    def backtrack(i: int) -> bool:
        if i == len(a_ids):
            return True
        aid = a_ids[i]
        for bid in b_by_profile.get(pa[aid], []):
            if bid in used or not ok(aid, bid):
                continue
            mapping[aid] = bid
            used.add(bid)
            if backtrack(i + 1):
                return True
            del mapping[aid]
            used.remove(bid)
        return False

    return backtrack(0)


def to_dot(d: TraceDag) -> str:
    """Graphviz rendering; nodes labelled name(arg), edges dependency-ordered."""
    ordered = sorted(d.nodes, key=lambda n: n.id)
    remap = {n.id: i for i, n in enumerate(ordered)}
    lines = ["digraph trace {", '  graph [v=1];']
    for n in ordered:
        label = f"{n.effect}({n.arg})" if n.arg else n.effect
        lines.append(f'  n{remap[n.id]} [label="{label}"];')
    for a_, b_ in sorted((remap[x], remap[y]) for x, y in d.edges):
        lines.append(f"  n{a_} -> n{b_};")
    lines.append("}")
    return "\n".join(lines)
