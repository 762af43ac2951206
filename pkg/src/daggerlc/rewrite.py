"""Soup reduction: redexes, single steps, normalisation and equivalence."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .syntax import (
    ONE,
    Connection,
    DLCError,
    I,
    One,
    Product,
    Sequent,
    Star,
    Tensor,
    Term,
    Var,
    canonicalize,
    dim,
    expand,
    factors,
    is_constant_free,
    negate_term,
    product,
    subterms,
)

KINDS = ("bifunctor", "trace", "cancel", "product-split", "consume-left", "consume-right")


class RewriteError(DLCError):
    pass


class GraphCapExceeded(RewriteError):
    pass


@dataclass(frozen=True)
class Redex:
    kind: str
    index: int  # position of the target in the (sorted) soup
    target: Connection

    def __str__(self) -> str:
        return f"{self.kind} {self.target}"


@dataclass(frozen=True)
class TraceStep:
    redex: Redex
    after: Sequent


def _is_var(t: Term) -> bool:
    return isinstance(t, Var) or (isinstance(t, Star) and isinstance(t.inner, Var))


def _outside_terms(J: Sequent, index: int):
    for t, _ in J.context:
        yield t
    yield J.conclusion[0]
    for k, c in enumerate(J.soup):
        if k != index:
            yield c.left
            yield c.right


def _occurs_outside(J: Sequent, index: int, u: Term) -> bool:
    """Does `u` (or its negation) occur verbatim outside connection `index`?"""
    nu = negate_term(u)
    for t in _outside_terms(J, index):
        for s in subterms(t):
            if s == u or s == nu:
                return True
    return False


def _consumable(J: Sequent, index: int, u: Term) -> bool:
    return is_constant_free(u) and _occurs_outside(J, index, u)


def _scalar_split_enabled(c: Connection) -> bool:
    if c.type != I or _is_var(c.left) or _is_var(c.right):
        return False
    if isinstance(c.left, One) and isinstance(c.right, One):
        return False
    return not (isinstance(c.right, One) and not isinstance(c.left, Product))


def enumerate_redexes(J: Sequent) -> list[Redex]:
    """Every enabled redex, ordered by soup position then rule."""
    out = []
    for k, c in enumerate(J.soup):
        if isinstance(c.left, Tensor) and isinstance(c.right, Tensor):
            out.append(Redex("bifunctor", k, c))
        if c.left == c.right and _is_var(c.left):
            out.append(Redex("trace", k, c))
            continue
        if isinstance(c.left, One) and isinstance(c.right, One):
            out.append(Redex("cancel", k, c))
        if _scalar_split_enabled(c):
            out.append(Redex("product-split", k, c))
        if _consumable(J, k, c.right):
            out.append(Redex("consume-left", k, c))
        if _consumable(J, k, c.left):
            out.append(Redex("consume-right", k, c))
    return out


def _replace(t: Term, u: Term, new: Term, nu: Term) -> Term:
    if t == u:
        return new
    if t == nu:
        return negate_term(new)
    if isinstance(t, Tensor):
        return Tensor(_replace(t.left, u, new, nu), _replace(t.right, u, new, nu))
    if isinstance(t, Product):
        return product(*(_replace(f, u, new, nu) for f in t.factors))
    return t


def substitute(J: Sequent, index: int, keep: Term, drop: Term) -> Sequent:
    """Remove connection `index` and put `keep` where `drop` occurs elsewhere."""
    soup = J.soup[:index] + J.soup[index + 1:]
    nd = negate_term(drop)
    rest = Sequent(J.context, soup, J.conclusion)
    return rest.map_terms(lambda t: _replace(t, drop, keep, nd))


def step(J: Sequent, r: Redex) -> Sequent:
    if r not in enumerate_redexes(J):
        raise RewriteError(f"redex {r} is not enabled")
    c, k = r.target, r.index
    others = J.soup[:k] + J.soup[k + 1:]
    if r.kind == "bifunctor":
        new = (Connection(c.left.left, c.right.left, c.type.left),
               Connection(c.left.right, c.right.right, c.type.right))
        return Sequent(J.context, others + new, J.conclusion)
    if r.kind == "trace":
        return Sequent(J.context, others + (Connection(dim(c.type), ONE, I),), J.conclusion)
    if r.kind == "cancel":
        return Sequent(J.context, others, J.conclusion)
    if r.kind == "product-split":
        new = tuple(Connection(f, ONE, I) for f in factors(c.left))
        new += tuple(Connection(negate_term(f), ONE, I) for f in factors(c.right))
        return Sequent(J.context, others + new, J.conclusion)
    if r.kind == "consume-left":
        return substitute(J, k, c.left, c.right)
    return substitute(J, k, c.right, c.left)


def _leaf_count(T) -> int:
    from .syntax import TensorType

    if isinstance(T, TensorType):
        return _leaf_count(T.left) + _leaf_count(T.right)
    return 1


def wire_count(J: Sequent) -> int:
    """Atomic wire pairs carried by the soup (scalar factors count as wires)."""
    w = 0
    for c in J.soup:
        w += _leaf_count(c.type)
        w += sum(len(f.factors) for f in (c.left, c.right) if isinstance(f, Product))
    return w


def step_bound(J: Sequent) -> int:
    return 2 * wire_count(J) + 3 * len(J.soup)


def normalize(
    J: Sequent, strategy: str = "deterministic", seed: int | None = None
) -> tuple[Sequent, list[TraceStep]]:
    """Reduce to normal form; return the canonical normal form and the trace.

    ``strategy="random"`` picks uniformly among enabled redexes using `seed`.
    """
    rng = random.Random(seed) if strategy != "deterministic" else None
    cur = expand(J)
    bound = step_bound(cur)
    trace: list[TraceStep] = []
    while True:
        redexes = enumerate_redexes(cur)
        if not redexes:
            break
        if len(trace) >= bound:
            raise RewriteError(f"step bound {bound} exceeded (engine bug)")
        r = redexes[0] if rng is None else rng.choice(redexes)
        cur = step(cur, r)
        trace.append(TraceStep(r, cur))
    return canonicalize(cur), trace


def normal_form(J: Sequent) -> Sequent:
    return normalize(J)[0]


def is_normal(J: Sequent) -> bool:
    return not enumerate_redexes(expand(J))


def soup_equiv(J1: Sequent, J2: Sequent) -> bool:
    return normal_form(J1) == normal_form(J2)


def format_trace(trace: list[TraceStep]) -> str:
    from .surface import print_connection, print_sequent

    return "\n".join(
        f"step {n} {s.redex.kind} {print_connection(s.redex.target)} => {print_sequent(s.after)}"
        for n, s in enumerate(trace, 1)
    )


@dataclass
class ReductionGraph:
    nodes: list[Sequent] = field(default_factory=list)
    edges: list[tuple[int, str, int]] = field(default_factory=list)

    def successors(self, i: int) -> list[int]:
        return [d for s, _, d in self.edges if s == i]

    def sinks(self) -> list[int]:
        has_out = {s for s, _, _ in self.edges}
        return [i for i in range(len(self.nodes)) if i not in has_out]


def reduction_graph(J: Sequent, size_cap: int = 5000) -> ReductionGraph:
    """Every reduct of `J` over every redex choice, nodes up to alpha."""
    g = ReductionGraph()
    start = canonicalize(J)
    index = {start: 0}
    g.nodes.append(start)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        cur = g.nodes[i]
        for r in enumerate_redexes(cur):
            nxt = canonicalize(step(cur, r))
            j = index.get(nxt)
            if j is None:
                if len(g.nodes) >= size_cap:
                    raise GraphCapExceeded(f"more than {size_cap} alpha-classes")
                j = index[nxt] = len(g.nodes)
                g.nodes.append(nxt)
                queue.append(j)
            g.edges.append((i, r.kind, j))
    return g
