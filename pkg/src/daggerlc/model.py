"""Finite-dimensional matrix semantics.

Types are interpreted as complex vector spaces with a fixed self-dual
basis, so an atom and its dual share an index set and identity wires are
plain Kronecker deltas. A sequent compiles to a tensor network whose open
legs are the context wires followed by the conclusion wires.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .rewrite import step
from .surface import SignatureDecl
from .syntax import (
    Atom,
    Const,
    Dim,
    DLCError,
    Dual,
    One,
    Product,
    Sequent,
    Star,
    Tensor,
    Term,
    TensorType,
    Type,
    Unit,
    Var,
    type_leaves,
    typecheck,
)


class ModelError(DLCError):
    pass


class SymbolicOnly(ModelError):
    """Raised when a constant has a type but no tensor value."""


@dataclass
class Signature:
    dims: dict[str, int] = field(default_factory=dict)
    values: dict[str, np.ndarray] = field(default_factory=dict)
    consts: dict[str, Type] = field(default_factory=dict)

    @classmethod
    def from_decl(cls, decl: SignatureDecl) -> "Signature":
        return cls(dict(decl.dims), dict(decl.values), dict(decl.consts))


def dim_of(T: Type, sig: Signature) -> int:
    if isinstance(T, Unit):
        return 1
    if isinstance(T, Dual):
        return dim_of(T.inner, sig)
    if isinstance(T, TensorType):
        return dim_of(T.left, sig) * dim_of(T.right, sig)
    if T.name not in sig.dims:
        raise ModelError(f"undeclared atomic type {T.name}")
    return sig.dims[T.name]


@dataclass
class Node:
    tensor: np.ndarray
    labels: tuple[int, ...]
    conj: bool = False
    name: str = ""

    def value(self) -> np.ndarray:
        return np.conj(self.tensor) if self.conj else self.tensor


@dataclass
class WireGraph:
    """Nodes joined by labelled wires.

    Every label occurs on exactly two endpoints, where an endpoint is a node
    leg or an open leg. Closed loops have already been folded into `scalar`.
    """

    nodes: list[Node] = field(default_factory=list)
    dims: dict[int, int] = field(default_factory=dict)
    inputs: list[int] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    scalar: complex = 1.0

    @property
    def open(self) -> list[int]:
        return self.inputs + self.outputs

    def shape(self) -> tuple[int, ...]:
        return tuple(self.dims[l] for l in self.open)

    def check(self) -> None:
        count: dict[int, int] = {}
        for n in self.nodes:
            for l in n.labels:
                count[l] = count.get(l, 0) + 1
        for l in self.open:
            count[l] = count.get(l, 0) + 1
        bad = [l for l, c in count.items() if c != 2]
        if bad:
            raise ModelError(f"wire labels {bad} do not have exactly two endpoints")


class _UF:
    def __init__(self):
        self.parent: list[int] = []

    def new(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[b] = a


def _leaf_dims(T: Type, sig: Signature) -> list[int]:
    return [dim_of(l, sig) for l in type_leaves(T)]


def compile_sequent(J: Sequent, sig: Signature) -> WireGraph:
    """Build the tensor network of `J`.

    Context terms sit on the consuming side of an implicit connection with
    the open input legs, so their constants pick up one conjugation parity;
    the conclusion sits on the producing side. Inside a connection {t:u}
    the right component u carries the extra parity.
    """
    env = typecheck(J, sig.consts)
    uf = _UF()
    slot_dim: list[int] = []
    var_slots: dict[str, list[int]] = {}
    pending: list[tuple[np.ndarray, list[int], bool, str]] = []
    scalar = [1.0 + 0j]

    def new_slots(ds: list[int]) -> list[int]:
        out = []
        for d in ds:
            out.append(uf.new())
            slot_dim.append(d)
        return out

    def const_type(name: str) -> Type:
        if name not in sig.consts:
            raise ModelError(f"constant #{name} has no declared type")
        return sig.consts[name]

    def const_value(name: str) -> np.ndarray:
        if name not in sig.values:
            raise SymbolicOnly(f"constant #{name} has no value; symbolic only")
        return np.asarray(sig.values[name], dtype=complex)

    def flat(t: Term, parity: int) -> list[int]:
        if isinstance(t, Tensor):
            return flat(t.left, parity) + flat(t.right, parity)
        if isinstance(t, Product):
            for f in t.factors:
                flat(f, parity)
            return []
        if isinstance(t, One):
            return []
        if isinstance(t, Dim):
            scalar[0] *= dim_of(t.of, sig)
            return []
        if isinstance(t, Var):
            if t.name not in var_slots:
                var_slots[t.name] = new_slots(_leaf_dims(env[t.name], sig))
            return list(var_slots[t.name])
        if isinstance(t, Star) and isinstance(t.inner, Var):
            return list(reversed(flat(t.inner, parity)))
        starred = isinstance(t, Star)
        c = t.inner if starred else t
        if not isinstance(c, Const):
            raise ModelError(f"cannot interpret term {t!r}")
        T = const_type(c.name)
        val = const_value(c.name)
        want = tuple(_leaf_dims(T, sig))
        if val.shape != want:
            raise ModelError(f"constant #{c.name} has shape {val.shape}, type needs {want}")
        if starred:
            val = np.transpose(val, tuple(reversed(range(val.ndim))))
        slots = new_slots(list(val.shape))
        pending.append((val, slots, bool((parity + starred) % 2), c.name))
        return slots

    def pair(xs: list[int], ys: list[int]) -> None:
        if len(xs) != len(ys):
            raise ModelError("wire count mismatch in connection")
        for x, y in zip(xs, ys):
            if slot_dim[x] != slot_dim[y]:
                raise ModelError("wire dimension mismatch in connection")
            uf.union(x, y)

    inputs: list[int] = []
    for t, T in J.context:
        ports = new_slots(_leaf_dims(T, sig))
        pair(ports, flat(t, 1))
        inputs += ports
    outputs: list[int] = []
    t, T = J.conclusion
    ports = new_slots(_leaf_dims(T, sig))
    pair(flat(t, 0), ports)
    outputs += ports
    for c in J.soup:
        pair(flat(c.left, 0), flat(c.right, 1))

    # endpoints per class: node legs and open legs
    endpoints: dict[int, list[tuple]] = {}
    for k, (_, slots, _, _) in enumerate(pending):
        for j, s in enumerate(slots):
            endpoints.setdefault(uf.find(s), []).append(("node", k, j))
    for k, s in enumerate(inputs + outputs):
        endpoints.setdefault(uf.find(s), []).append(("open", k))

    G = WireGraph()
    node_labels = [[None] * len(slots) for _, slots, _, _ in pending]
    open_labels: list[int | None] = [None] * (len(inputs) + len(outputs))
    label = itertools.count()
    roots = {uf.find(s) for s in range(len(slot_dim))}
    for r in roots:
        eps = endpoints.get(r, [])
        d = slot_dim[r]
        if not eps:
            scalar[0] *= d
            continue
        if len(eps) != 2:
            raise ModelError(f"wire class with {len(eps)} endpoints (linearity breach)")
        opens = [e for e in eps if e[0] == "open"]
        if len(opens) == 2:
            # a bare identity wire between two open legs
            a, b = next(label), next(label)
            G.dims[a] = G.dims[b] = d
            open_labels[opens[0][1]] = a
            open_labels[opens[1][1]] = b
            G.nodes.append(Node(np.eye(d, dtype=complex), (a, b), False, "id"))
            continue
        l = next(label)
        G.dims[l] = d
        for e in eps:
            if e[0] == "open":
                open_labels[e[1]] = l
            else:
                node_labels[e[1]][e[2]] = l
    for (val, _, conj, name), labels in zip(pending, node_labels):
        G.nodes.append(Node(val, tuple(labels), conj, name))
    G.inputs = open_labels[: len(inputs)]
    G.outputs = open_labels[len(inputs):]
    G.scalar = scalar[0]
    G.check()
    return G


def contract_bruteforce(G: WireGraph) -> np.ndarray:
    """Reference contraction: one explicit nested sum over every wire."""
    labels = sorted(G.dims)
    pos = {l: k for k, l in enumerate(labels)}
    out = np.zeros(G.shape(), dtype=complex)
    vals = [n.value() for n in G.nodes]
    for assign in itertools.product(*(range(G.dims[l]) for l in labels)):
        term = G.scalar
        for n, v in zip(G.nodes, vals):
            term *= v[tuple(assign[pos[l]] for l in n.labels)]
            if term == 0:
                break
        out[tuple(assign[pos[l]] for l in G.open)] += term
    return out


def _einsum(a, la, b, lb, keep):
    names = {l: k for k, l in enumerate(dict.fromkeys(list(la) + list(lb) + list(keep)))}
    return np.einsum(a, [names[l] for l in la], b, [names[l] for l in lb], [names[l] for l in keep])


def contract(G: WireGraph) -> np.ndarray:
    """Pairwise contraction, greedily merging the pair with the smallest result."""
    items = [(n.value(), list(n.labels)) for n in G.nodes]
    open_set = set(G.open)
    if not items:
        return np.asarray(G.scalar, dtype=complex).reshape(())

    def remaining_after(i: int, j: int) -> list[int]:
        counts: dict[int, int] = {}
        for k, (_, ls) in enumerate(items):
            if k in (i, j):
                continue
            for l in ls:
                counts[l] = counts.get(l, 0) + 1
        merged = items[i][1] + items[j][1]
        return [l for l in dict.fromkeys(merged) if l in open_set or counts.get(l)]

    while len(items) > 1:
        best = None
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                shared = set(items[i][1]) & set(items[j][1])
                keep = remaining_after(i, j)
                size = int(np.prod([G.dims[l] for l in keep])) if keep else 1
                key = (not shared, size)
                if best is None or key < best[0]:
                    best = (key, i, j, keep)
        _, i, j, keep = best
        (a, la), (b, lb) = items[i], items[j]
        merged = (_einsum(a, la, b, lb, keep), keep)
        items = [it for k, it in enumerate(items) if k not in (i, j)] + [merged]
    v, ls = items[0]
    # trace out anything not open (only possible when a single node closes on itself)
    names = {l: k for k, l in enumerate(dict.fromkeys(ls + G.open))}
    v = np.einsum(v, [names[l] for l in ls], [names[l] for l in G.open])
    return G.scalar * v


def interpret(J: Sequent, sig: Signature) -> np.ndarray:
    """Tensor with axes: context leaves left to right, then conclusion leaves."""
    return contract(compile_sequent(J, sig))


def as_matrix(J: Sequent, sig: Signature) -> np.ndarray:
    G = compile_sequent(J, sig)
    rows = int(np.prod([G.dims[l] for l in G.inputs])) if G.inputs else 1
    return contract(G).reshape(rows, -1)


def close(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    return float(np.max(np.abs(a - b), initial=0.0)) <= tol * (1 + float(np.max(np.abs(a), initial=0.0)))


def check_step_preservation(J: Sequent, r, sig: Signature, tol: float = 1e-9) -> bool:
    return close(interpret(J, sig), interpret(step(J, r), sig), tol)


def random_signature(
    rng: np.random.Generator, dims: dict[str, int], consts: dict[str, Type]
) -> Signature:
    sig = Signature(dict(dims), {}, dict(consts))
    for name, T in consts.items():
        shape = tuple(_leaf_dims(T, sig))
        sig.values[name] = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return sig


def random_wire_graph(rng: np.random.Generator, max_total: int = 4096) -> WireGraph:
    """A random network of dense nodes whose wire-dimension product is bounded."""
    while True:
        nwires = int(rng.integers(1, 9))
        dims = [int(rng.integers(1, 5)) for _ in range(nwires)]
        if int(np.prod(dims)) <= max_total:
            break
    G = WireGraph()
    ends: list[int] = []
    for l, d in enumerate(dims):
        G.dims[l] = d
        ends += [l, l]
    rng.shuffle(ends)
    nopen = int(rng.integers(0, min(4, len(ends)) + 1))
    opens, rest = ends[:nopen], ends[nopen:]
    # an open leg consumes one endpoint of its wire; the other stays on a node
    nnodes = int(rng.integers(1, 5))
    buckets: list[list[int]] = [[] for _ in range(nnodes)]
    for e in rest:
        buckets[int(rng.integers(nnodes))].append(e)
    for ls in buckets:
        shape = tuple(G.dims[l] for l in ls)
        t = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        G.nodes.append(Node(t, tuple(ls), bool(rng.integers(2))))
    # a wire whose both endpoints are open becomes an identity node
    for l in set(opens):
        if opens.count(l) == 2:
            a = max(G.dims) + 1
            G.dims[a] = G.dims[l]
            opens[opens.index(l)] = a
            G.nodes.append(Node(np.eye(G.dims[l], dtype=complex), (l, a)))
    G.inputs = opens[: len(opens) // 2]
    G.outputs = opens[len(opens) // 2:]
    G.scalar = complex(rng.normal(), rng.normal())
    G.check()
    return G


# ---------------------------------------------------------------------------
# Dagger-compact axioms


@dataclass
class AxiomResult:
    name: str
    dims: dict[str, int]
    soup_equal: bool
    max_error: float
    passed: bool

    def line(self) -> str:
        return f"axiom {self.name} {'PASS' if self.passed else 'FAIL'} {self.max_error:.3g}"


def axiom_pairs(A: Type, B: Type, C: Type, D: Type, f: Sequent) -> dict[str, tuple[Sequent, Sequent]]:
    """Both sides of each coherence equality as one-hypothesis sequents."""
    from .calculus import compose as seq, dagger_flip, morphism as m, rule_id
    from .calculus import tensor_morphisms as par
    from .syntax import negate_type

    def ident(T: Type) -> Sequent:
        return rule_id("i", T)

    As = negate_type(A)
    return {
        "pentagon": (
            seq(par(ident(A), m("alpha", B, C, D)), m("alpha", A, TensorType(B, C), D),
                par(m("alpha", A, B, C), ident(D))),
            seq(m("alpha", A, B, TensorType(C, D)), m("alpha", TensorType(A, B), C, D)),
        ),
        "triangle": (
            seq(m("alpha", A, Unit(), B),
                par(m("rho", A), ident(B))),
            par(ident(A), m("lambda", B)),
        ),
        "symmetry-involution": (
            seq(m("sigma", A, B), m("sigma", B, A)),
            ident(TensorType(A, B)),
        ),
        "rho-lambda-sigma": (
            m("rho", A),
            seq(m("sigma", A, Unit()), m("lambda", A)),
        ),
        "hexagon": (
            seq(m("alpha", A, B, C), m("sigma", TensorType(A, B), C), m("alpha", C, A, B)),
            seq(par(ident(A), m("sigma", B, C)), m("alpha", A, C, B),
                par(m("sigma", A, C), ident(B))),
        ),
        "yanking-left": (
            seq(m("rho_inv", A), par(ident(A), m("eta", A)), m("alpha", A, As, A),
                par(m("epsilon", A), ident(A)), m("lambda", A)),
            ident(A),
        ),
        "yanking-right": (
            seq(m("lambda_inv", As), par(m("eta", A), ident(As)), m("alpha_inv", As, A, As),
                par(ident(As), m("epsilon", A)), m("rho", As)),
            ident(As),
        ),
        "dagger-involution": (dagger_flip(dagger_flip(f)), f),
        "sigma-epsilon-dagger": (
            seq(dagger_flip(m("epsilon", A)), m("sigma", A, As)),
            m("eta", A),
        ),
    }


def verify_axioms(
    sig: Signature | None = None, dims_under_test=(2, 3), tol: float = 1e-9, seed: int = 0
) -> list[AxiomResult]:
    """Check every equality twice: symbolically (soup equivalence) and in
    the matrix model, for each uniform dimension and one mixed assignment."""
    from .calculus import rule_const
    from .rewrite import soup_equiv

    A, B, C, D = (Atom(n) for n in "ABCD")
    rng = np.random.default_rng(seed)
    fname = "f"
    base = sig or Signature()
    if fname not in base.consts:
        base = Signature(dict(base.dims), dict(base.values), {**base.consts, fname: TensorType(Dual(A), B)})
    f = rule_const(fname, A, B, "a", "b")
    pairs = axiom_pairs(A, B, C, D, f)
    assignments = [{n: d for n in "ABCD"} for d in dims_under_test]
    if len(set(dims_under_test)) > 1:
        ds = list(dims_under_test)
        assignments.append({n: ds[k % len(ds)] for k, n in enumerate("ABCD")})
    symbolic = {name: soup_equiv(l, r) for name, (l, r) in pairs.items()}
    results = []
    for dims in assignments:
        s = Signature({**dims, **base.dims}, dict(base.values), dict(base.consts))
        if fname not in s.values or s.values[fname].shape != tuple(_leaf_dims(s.consts[fname], s)):
            s.values[fname] = random_signature(rng, s.dims, {fname: s.consts[fname]}).values[fname]
        for name, (l, r) in pairs.items():
            x, y = interpret(l, s), interpret(r, s)
            err = float(np.max(np.abs(x - y), initial=0.0)) if x.shape == y.shape else float("inf")
            ok = symbolic[name] and err <= tol * (1 + float(np.max(np.abs(x), initial=0.0)))
            results.append(AxiomResult(name, dims, symbolic[name], err, ok))
    return results
