"""Types, terms, soups and sequents of the dagger lambda calculus.

Every value is kept in star-normal form: duals sit directly on atoms (types)
or on variables and constants (terms).  The smart constructors below are the
only supported way of building composite values.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Union


class DLCError(Exception):
    """Base class for every error raised by the package."""


class TypingError(DLCError):
    pass


class LinearityError(DLCError):
    def __init__(self, counts: dict[str, int]):
        self.counts = dict(counts)
        detail = ", ".join(f"{k}:{v}" for k, v in sorted(self.counts.items()))
        super().__init__(f"linearity violation {{{detail}}}")


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, slots=True)
class Atom:
    name: str


@dataclass(frozen=True, slots=True)
class Unit:
    pass


@dataclass(frozen=True, slots=True)
class Dual:
    inner: Atom


@dataclass(frozen=True, slots=True)
class TensorType:
    left: "Type"
    right: "Type"


Type = Union[Atom, Unit, Dual, TensorType]
I = Unit()


def negate_type(t: Type) -> Type:
    """Linear negation on types; swaps tensor factors (planar De Morgan)."""
    if isinstance(t, Atom):
        return Dual(t)
    if isinstance(t, Dual):
        return t.inner
    if isinstance(t, Unit):
        return t
    return TensorType(negate_type(t.right), negate_type(t.left))


def tensor_type(*parts: Type) -> Type:
    """Left-nested tensor of one or more types."""
    out = parts[0]
    for p in parts[1:]:
        out = TensorType(out, p)
    return out


def type_leaves(t: Type) -> list[Type]:
    """Atomic leaves (atoms and duals of atoms), left to right; units dropped."""
    if isinstance(t, TensorType):
        return type_leaves(t.left) + type_leaves(t.right)
    if isinstance(t, Unit):
        return []
    return [t]


def atoms_of(t: Type) -> set[str]:
    return {(x.inner if isinstance(x, Dual) else x).name for x in type_leaves(t)}


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    name: str


@dataclass(frozen=True, slots=True)
class One:
    pass


@dataclass(frozen=True, slots=True)
class Dim:
    of: Atom


@dataclass(frozen=True, slots=True)
class Star:
    inner: Union[Var, Const]


@dataclass(frozen=True, slots=True)
class Tensor:
    left: "Term"
    right: "Term"


@dataclass(frozen=True, slots=True)
class Product:
    # at least two factors, none of them One or Product
    factors: tuple["Term", ...]


Term = Union[Var, Const, One, Dim, Star, Tensor, Product]
ONE = One()


def dim(t: Type) -> Term:
    """The scalar constant D_T, normalised: D_I = 1, D_(A^) = D_A and the
    dimension of a tensor is the product of the factors' dimensions."""
    factors = [Dim(x.inner if isinstance(x, Dual) else x) for x in type_leaves(t)]
    return product(*factors)


def product(*parts: Term) -> Term:
    flat: list[Term] = []
    for p in parts:
        if isinstance(p, Product):
            flat.extend(p.factors)
        elif not isinstance(p, One):
            flat.append(p)
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def star(t: Term) -> Term:
    return negate_term(t)


def negate_term(t: Term) -> Term:
    """Linear negation on terms: involutive, fixes 1 and dimensions."""
    if isinstance(t, (Var, Const)):
        return Star(t)
    if isinstance(t, Star):
        return t.inner
    if isinstance(t, (One, Dim)):
        return t
    if isinstance(t, Tensor):
        return Tensor(negate_term(t.right), negate_term(t.left))
    return Product(tuple(negate_term(f) for f in t.factors))


def tensor(*parts: Term) -> Term:
    out = parts[0]
    for p in parts[1:]:
        out = Tensor(out, p)
    return out


def factors(t: Term) -> list[Term]:
    if isinstance(t, One):
        return []
    if isinstance(t, Product):
        return list(t.factors)
    return [t]


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Tensor):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Product):
        for f in t.factors:
            yield from subterms(f)


def term_vars(t: Term) -> list[str]:
    """Variable names in left-to-right order (with repetition)."""
    return _ordered_vars(t)


def _ordered_vars(t: Term) -> list[str]:
    if isinstance(t, Var):
        return [t.name]
    if isinstance(t, Star):
        return [t.inner.name] if isinstance(t.inner, Var) else []
    if isinstance(t, Tensor):
        return _ordered_vars(t.left) + _ordered_vars(t.right)
    if isinstance(t, Product):
        return [v for f in t.factors for v in _ordered_vars(f)]
    return []


def is_constant_free(t: Term) -> bool:
    """True iff the term is built from variables only (1, D_A and products
    count as constants)."""
    if isinstance(t, Var):
        return True
    if isinstance(t, Star):
        return isinstance(t.inner, Var)
    if isinstance(t, Tensor):
        return is_constant_free(t.left) and is_constant_free(t.right)
    return False


def map_vars(t: Term, fn) -> Term:
    """Rebuild `t` replacing every variable occurrence `Var x` by `fn(x)`;
    starred occurrences receive the negation of the replacement."""
    if isinstance(t, Var):
        return fn(t.name)
    if isinstance(t, Star):
        if isinstance(t.inner, Var):
            return negate_term(fn(t.inner.name))
        return t
    if isinstance(t, Tensor):
        return Tensor(map_vars(t.left, fn), map_vars(t.right, fn))
    if isinstance(t, Product):
        return product(*(map_vars(f, fn) for f in t.factors))
    return t


# ---------------------------------------------------------------------------
# Rendering (shared with the surface printer)


@lru_cache(maxsize=None)
def render_type(t: Type) -> str:
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, Unit):
        return "I"
    if isinstance(t, Dual):
        return t.inner.name + "^"
    return f"({render_type(t.left)} @ {render_type(t.right)})"


@lru_cache(maxsize=None)
def render_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return "#" + t.name
    if isinstance(t, One):
        return "1"
    if isinstance(t, Dim):
        return f"D[{render_type(t.of)}]"
    if isinstance(t, Star):
        return render_term(t.inner) + "^"
    if isinstance(t, Tensor):
        return f"({render_term(t.left)} @ {render_term(t.right)})"
    return "(" + " . ".join(render_term(f) for f in t.factors) + ")"


# ---------------------------------------------------------------------------
# Connections, soups, sequents


def _orient_key(left: Term, right: Term) -> tuple:
    return (isinstance(left, One), render_term(left), render_term(right))


@dataclass(frozen=True, slots=True)
class Connection:
    """A soup connection ``left :[type] right`` stored in canonical
    orientation; ``(t:u)`` and ``(u^:t^)`` build equal values."""

    left: Term
    right: Term
    type: Type

    def __post_init__(self):
        fl, fr = negate_term(self.right), negate_term(self.left)
        if _orient_key(fl, fr) < _orient_key(self.left, self.right):
            object.__setattr__(self, "left", fl)
            object.__setattr__(self, "right", fr)
            object.__setattr__(self, "type", negate_type(self.type))

    def sort_key(self) -> tuple:
        return _orient_key(self.left, self.right) + (render_type(self.type),)

    def negate(self) -> "Connection":
        return Connection(negate_term(self.left), negate_term(self.right), negate_type(self.type))

    def __str__(self) -> str:
        return f"{render_term(self.left)} : {render_term(self.right)}"


def negate_soup(soup: Iterable[Connection]) -> tuple[Connection, ...]:
    return tuple(c.negate() for c in soup)


Entry = tuple  # (Term, Type)


@dataclass(frozen=True)
class Sequent:
    """``context |-_{soup} conclusion``.  The soup is a multiset, stored sorted."""

    context: tuple[Entry, ...]
    soup: tuple[Connection, ...]
    conclusion: Entry

    def __post_init__(self):
        object.__setattr__(self, "context", tuple((t, T) for t, T in self.context))
        object.__setattr__(self, "soup", tuple(sorted(self.soup, key=Connection.sort_key)))
        object.__setattr__(self, "conclusion", tuple(self.conclusion))

    # positions: ("ctx", i), ("concl",), ("soup", i, side)
    def positions(self) -> Iterator[tuple[tuple, Term, int]]:
        """Yield (position, term, side parity) for every term slot."""
        for i, (t, _) in enumerate(self.context):
            yield ("ctx", i), t, 1
        yield ("concl",), self.conclusion[0], 0
        for i, c in enumerate(self.soup):
            yield ("soup", i, 0), c.left, 0
            yield ("soup", i, 1), c.right, 1

    def variables(self) -> list[str]:
        return [v for _, t, _ in self.positions() for v in _ordered_vars(t)]

    def constants(self) -> set[str]:
        out = set()
        for _, t, _ in self.positions():
            for s in subterms(t):
                if isinstance(s, Const):
                    out.add(s.name)
                elif isinstance(s, Star) and isinstance(s.inner, Const):
                    out.add(s.inner.name)
        return out

    def map_terms(self, fn) -> "Sequent":
        return Sequent(
            tuple((fn(t), T) for t, T in self.context),
            tuple(Connection(fn(c.left), fn(c.right), c.type) for c in self.soup),
            (fn(self.conclusion[0]), self.conclusion[1]),
        )

    def __str__(self) -> str:
        from .surface import print_sequent

        return print_sequent(self)


def negate_sequent_soup(J: Sequent) -> tuple[Connection, ...]:
    return negate_soup(J.soup)


# ---------------------------------------------------------------------------
# Typing


def _bind(table: dict, key: str, T: Type, what: str) -> None:
    old = table.get(key)
    if old is None:
        table[key] = T
    elif old != T:
        raise TypingError(
            f"{what} {key} used at {render_type(old)} and {render_type(T)}"
        )


def check_term(t: Term, T: Type, env: dict[str, Type], consts: dict[str, Type]) -> None:
    """Check `t : T`, recording variable and constant types."""
    if isinstance(t, Var):
        _bind(env, t.name, T, "variable")
    elif isinstance(t, Const):
        _bind(consts, t.name, T, "constant")
    elif isinstance(t, Star):
        table, what = (env, "variable") if isinstance(t.inner, Var) else (consts, "constant")
        _bind(table, t.inner.name, negate_type(T), what)
    elif isinstance(t, (One, Dim)):
        if T != I:
            raise TypingError(f"scalar {render_term(t)} cannot have type {render_type(T)}")
    elif isinstance(t, Product):
        if T != I:
            raise TypingError(f"product {render_term(t)} cannot have type {render_type(T)}")
        for f in t.factors:
            check_term(f, I, env, consts)
    else:
        if not isinstance(T, TensorType):
            raise TypingError(f"tensor term {render_term(t)} cannot have type {render_type(T)}")
        check_term(t.left, T.left, env, consts)
        check_term(t.right, T.right, env, consts)


def infer_term(t: Term, env: dict[str, Type], consts: dict[str, Type]) -> Type | None:
    if isinstance(t, Var):
        return env.get(t.name)
    if isinstance(t, Const):
        return consts.get(t.name)
    if isinstance(t, Star):
        table = env if isinstance(t.inner, Var) else consts
        T = table.get(t.inner.name)
        return None if T is None else negate_type(T)
    if isinstance(t, (One, Dim, Product)):
        return I
    l = infer_term(t.left, env, consts)
    r = infer_term(t.right, env, consts)
    if l is None or r is None:
        return None
    return TensorType(l, r)


def typecheck(J: Sequent, consts: dict[str, Type] | None = None) -> dict[str, Type]:
    """Check every annotation; return the variable typing environment.

    Constant types found in the sequent are added to `consts` when given.
    """
    env: dict[str, Type] = {}
    consts = {} if consts is None else consts
    for t, T in J.context:
        check_term(t, T, env, consts)
    check_term(J.conclusion[0], J.conclusion[1], env, consts)
    for c in J.soup:
        check_term(c.left, c.type, env, consts)
        check_term(c.right, c.type, env, consts)
    return env


def variable_types(J: Sequent) -> dict[str, Type]:
    return typecheck(J, {})


def linearity_report(J: Sequent) -> dict[str, int]:
    """Variables that do not occur exactly twice, with their counts."""
    counts = Counter(J.variables())
    return {v: n for v, n in counts.items() if n != 2}


def check_linearity(J: Sequent) -> dict[str, int]:
    """Return an empty dict when linear; otherwise the violation report."""
    return linearity_report(J)


def _polarities(t: Term, base: int, acc: dict[str, list[int]]) -> None:
    if isinstance(t, Var):
        acc.setdefault(t.name, []).append(base)
    elif isinstance(t, Star):
        if isinstance(t.inner, Var):
            acc.setdefault(t.inner.name, []).append(1 - base)
    elif isinstance(t, Tensor):
        _polarities(t.left, base, acc)
        _polarities(t.right, base, acc)
    elif isinstance(t, Product):
        for f in t.factors:
            _polarities(f, base, acc)


def polarity_report(J: Sequent) -> list[str]:
    """Variables whose two occurrences do not have opposite polarity.

    Polarity is the parity of (right of a connection or in the context) plus
    the star on the occurrence; every rule of the calculus produces one
    occurrence of each parity (one wire end is an input, the other an output).
    """
    acc: dict[str, list[int]] = {}
    for _, t, side in J.positions():
        _polarities(t, side, acc)
    return sorted(v for v, ps in acc.items() if len(ps) == 2 and ps[0] == ps[1])


def validate(J: Sequent, consts: dict[str, Type] | None = None) -> dict[str, Type]:
    env = typecheck(J, consts)
    report = linearity_report(J)
    if report:
        raise LinearityError(report)
    bad = polarity_report(J)
    if bad:
        raise TypingError(f"variables {', '.join(bad)} connect two ends of the same polarity")
    return env


# ---------------------------------------------------------------------------
# Fresh names, renaming, canonical forms


def fresh_names(used: Iterable[str], k: int, stem: str = "w") -> list[str]:
    """`k` deterministic names of the form stem1, stem2, ... avoiding `used`."""
    used = set(used)
    out, n = [], 1
    while len(out) < k:
        name = f"{stem}{n}"
        if name not in used:
            out.append(name)
            used.add(name)
        n += 1
    return out


def rename(J: Sequent, mapping: dict[str, Term]) -> Sequent:
    """Replace variables by terms (both occurrences); unmapped names stay."""
    return J.map_terms(lambda t: map_vars(t, lambda x: mapping.get(x, Var(x))))


def _bundle(T: Type, names: Iterator[str]) -> Term:
    if isinstance(T, TensorType):
        return Tensor(_bundle(T.left, names), _bundle(T.right, names))
    if isinstance(T, Dual):
        return Star(Var(next(names)))
    return Var(next(names))


def expand(J: Sequent) -> Sequent:
    """Alpha-rename every variable of non-atomic type into a bundle of
    atomic-type variables, and every variable of dual type ``x:A^`` into
    ``x^`` with ``x:A``."""
    env = variable_types(J)
    used = set(env)
    mapping: dict[str, Term] = {}
    for x in sorted(env):
        T = env[x]
        if isinstance(T, Dual):
            mapping[x] = Star(Var(x))
        elif isinstance(T, TensorType):
            n = len(_tensor_leaves(T))
            names = iter(fresh_names(used, n, stem=f"{x}_"))
            mapping[x] = _bundle(T, names)
            used |= set(_ordered_vars(mapping[x]))
    return rename(J, mapping) if mapping else J


def _tensor_leaves(T: Type) -> list[Type]:
    if isinstance(T, TensorType):
        return _tensor_leaves(T.left) + _tensor_leaves(T.right)
    return [T]


def _render_named(t: Term, names: dict[str, Term], counter: list[int], units=frozenset()) -> str:
    # names maps a variable to its canonical image; a variable of type I may be
    # renamed to a starred variable (I^ = I), and is, when first met starred
    if isinstance(t, Star) and isinstance(t.inner, Var) or isinstance(t, Var):
        x = t.inner.name if isinstance(t, Star) else t.name
        img = names.get(x)
        if img is None:
            counter[0] += 1
            img = Var(f"v{counter[0]}")
            if isinstance(t, Star) and x in units:
                img = Star(img)
            names[x] = img
        return render_term(negate_term(img) if isinstance(t, Star) else img)
    if isinstance(t, Tensor):
        return f"({_render_named(t.left, names, counter, units)} @ {_render_named(t.right, names, counter, units)})"
    if isinstance(t, Product):
        return "(" + " . ".join(_render_named(f, names, counter, units) for f in t.factors) + ")"
    return render_term(t)


def _search_soup(
    remaining: list[Connection], names: dict[str, Term], count: int, units=frozenset()
) -> tuple[tuple[str, ...], dict[str, Term]]:
    if not remaining:
        return (), names
    cands = []
    for i, c in enumerate(remaining):
        for left, right in ((c.left, c.right), (negate_term(c.right), negate_term(c.left))):
            m, ctr = dict(names), [count]
            s = _render_named(left, m, ctr, units) + " : " + _render_named(right, m, ctr, units)
            cands.append(((isinstance(left, One), s), i, m, ctr[0]))
    best = min(k for k, *_ in cands)
    tied = [cd for cd in cands if cd[0] == best]
    branch, contained_seen = [], False
    for cd in tied:
        c = remaining[cd[1]]
        fresh = [v for v in cd[2] if v not in names]
        occ = Counter(_ordered_vars(c.left) + _ordered_vars(c.right))
        if all(occ[v] == 2 for v in fresh):
            # interchangeable with any other self-contained tie
            if contained_seen:
                continue
            contained_seen = True
        branch.append(cd)
    results = []
    for key, i, m, ctr in branch:
        rest = remaining[:i] + remaining[i + 1:]
        sub, final = _search_soup(rest, m, ctr, units)
        results.append(((key[1],) + sub, final))
    return min(results, key=lambda r: r[0])


def canonicalize(J: Sequent) -> Sequent:
    """Canonical representative of the alpha-equivalence class of `J`."""
    report = linearity_report(J)
    if report:
        raise LinearityError(report)
    J = expand(J)
    units = frozenset(x for x, T in variable_types(J).items() if T == I)
    names: dict[str, Term] = {}
    ctr = [0]
    for t, _ in J.context:
        _render_named(t, names, ctr, units)
    _render_named(J.conclusion[0], names, ctr, units)
    _, names = _search_soup(list(J.soup), names, ctr[0], units)
    return rename(J, names)


def alpha_equiv(J1: Sequent, J2: Sequent) -> bool:
    return canonicalize(J1) == canonicalize(J2)
