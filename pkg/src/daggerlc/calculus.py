"""Sequent rules as checked constructors, derivation replay, combinators
and elaboration of lambda/application sugar."""

from __future__ import annotations

from dataclasses import dataclass, field

from .rewrite import enumerate_redexes, step as rewrite_step
from .surface import (
    App,
    Comb,
    DerivationScript,
    Neg,
    PreSequent,
    SourceText,
    _Parser,
    infer_connections,
    parse_presequent,
    parse_sequent,
    parse_term,
    print_sequent,
)
from .syntax import (
    ONE,
    Atom,
    Connection,
    Const,
    DLCError,
    I,
    One,
    Sequent,
    Star,
    Tensor,
    TensorType,
    Term,
    Type,
    Var,
    fresh_names,
    negate_soup,
    negate_term,
    negate_type,
    rename,
    render_term,
    render_type,
    tensor,
    tensor_type,
    term_vars,
    validate,
)


class RuleError(DLCError):
    pass


def _single(J: Sequent, rule: str):
    if len(J.context) != 1:
        raise RuleError(f"{rule} needs exactly one hypothesis, got {len(J.context)}")
    return J.context[0]


def _disjoint(a: Sequent, b: Sequent, rule: str) -> None:
    shared = sorted(set(a.variables()) & set(b.variables()))
    if shared:
        raise RuleError(
            f"{rule}: premises share variables {', '.join(shared)}; alpha-rename first"
        )


def rule_id(x: str, T: Type) -> Sequent:
    return Sequent(((Var(x), T),), (), (Var(x), T))


def rule_one() -> Sequent:
    """The closed scalar ``|- 1:I``."""
    return Sequent((), (), (ONE, I))


def rule_const(name: str, A: Type, B: Type, a: str = "a", b: str = "b") -> Sequent:
    """The sequent ``a:A |- {#f : a^ @ b} b:B`` interpreting a constant f : A -> B."""
    c = Connection(Const(name), Tensor(Star(Var(a)), Var(b)), TensorType(negate_type(A), B))
    return Sequent(((Var(a), A),), (c,), (Var(b), B))


def rule_cut(left: Sequent, right: Sequent) -> Sequent:
    if not right.context:
        raise RuleError("cut: right premise has no hypothesis")
    _disjoint(left, right, "cut")
    a, A = left.conclusion
    a2, A2 = right.context[0]
    if A != A2:
        raise RuleError(f"cut: {render_type(A)} does not match {render_type(A2)}")
    soup = left.soup + right.soup + (Connection(a, a2, A),)
    return Sequent(left.context + right.context[1:], soup, right.conclusion)


def tensor_context(entries) -> tuple[Term, Type]:
    return tensor(*(t for t, _ in entries)), tensor_type(*(T for _, T in entries))


def rule_tensor_r(left: Sequent, right: Sequent) -> Sequent:
    _disjoint(left, right, "tensor-right")
    ctx = left.context
    if right.context:
        ctx = ctx + (tensor_context(right.context),)
    a, A = left.conclusion
    b, B = right.conclusion
    return Sequent(ctx, left.soup + right.soup, (Tensor(a, b), TensorType(A, B)))


def rule_negation(J: Sequent) -> Sequent:
    a, A = _single(J, "negation")
    b, B = J.conclusion
    return Sequent(
        ((negate_term(a), negate_type(A)),), negate_soup(J.soup), (negate_term(b), negate_type(B))
    )


def rule_curry(J: Sequent) -> Sequent:
    """``a:A, G |- b:B`` to ``G |- a^ @ b``; an empty right-hand side
    (``1:I``) curries to ``G |- a^:A^``."""
    if not J.context:
        raise RuleError("curry: no hypothesis to move")
    (a, A), rest = J.context[0], J.context[1:]
    b, B = J.conclusion
    if isinstance(b, One) and B == I:
        return Sequent(rest, J.soup, (negate_term(a), negate_type(A)))
    return Sequent(rest, J.soup, (Tensor(negate_term(a), b), TensorType(negate_type(A), B)))


def rule_uncurry(J: Sequent) -> Sequent:
    c, C = J.conclusion
    if not (isinstance(c, Tensor) and isinstance(C, TensorType)):
        raise RuleError(f"uncurry: conclusion {render_term(c)} is not a tensor a^ @ b")
    hyp = (negate_term(c.left), negate_type(C.left))
    return Sequent((hyp,) + J.context, J.soup, (c.right, C.right))


def _index(J: Sequent, pos: int, width: int, rule: str) -> None:
    if not 0 <= pos <= len(J.context) - width:
        raise RuleError(f"{rule}: position {pos} out of range for {len(J.context)} hypotheses")


def rule_tensor_l(J: Sequent, pos: int) -> Sequent:
    _index(J, pos, 2, "tensor-left")
    (a, A), (b, B) = J.context[pos], J.context[pos + 1]
    ctx = J.context[:pos] + ((Tensor(a, b), TensorType(A, B)),) + J.context[pos + 2:]
    return Sequent(ctx, J.soup, J.conclusion)


def rule_untensor_l(J: Sequent, pos: int) -> Sequent:
    _index(J, pos, 1, "tensor-left inverse")
    t, T = J.context[pos]
    if not (isinstance(t, Tensor) and isinstance(T, TensorType)):
        raise RuleError(f"tensor-left inverse: {render_term(t)} is not a tensor term")
    ctx = J.context[:pos] + ((t.left, T.left), (t.right, T.right)) + J.context[pos + 1:]
    return Sequent(ctx, J.soup, J.conclusion)


def rule_exchange(J: Sequent, pos: int) -> Sequent:
    _index(J, pos, 2, "exchange")
    c = list(J.context)
    c[pos], c[pos + 1] = c[pos + 1], c[pos]
    return Sequent(tuple(c), J.soup, J.conclusion)


def _unit_connection(J: Sequent, term: Term | None, rule: str) -> int:
    cands = [k for k, c in enumerate(J.soup) if c.type == I and isinstance(c.right, One)]
    if term is not None:
        cands = [k for k in cands if J.soup[k].left == negate_term(term)]
    if not cands:
        raise RuleError(f"{rule}: no scalar connection {{i^ : 1}} in the soup")
    varish = [k for k in cands if term_vars(J.soup[k].left)]
    return (varish or cands)[0]


def rule_unit_left(J: Sequent, term: Term | None = None) -> Sequent:
    """``G |-_{S u {i^:1}} b`` to ``i:I, G |-_S b``."""
    k = _unit_connection(J, term, "unit-left")
    hyp = (negate_term(J.soup[k].left), I)
    return Sequent((hyp,) + J.context, J.soup[:k] + J.soup[k + 1:], J.conclusion)


def rule_unit_right(J: Sequent, term: Term | None = None) -> Sequent:
    k = _unit_connection(J, term, "unit-right")
    hyp = (negate_term(J.soup[k].left), I)
    return Sequent(J.context + (hyp,), J.soup[:k] + J.soup[k + 1:], J.conclusion)


def rule_unit_left_inv(J: Sequent) -> Sequent:
    if not J.context or J.context[0][1] != I:
        raise RuleError("unit-left inverse: first hypothesis is not a scalar i:I")
    i = J.context[0][0]
    return Sequent(J.context[1:], J.soup + (Connection(negate_term(i), ONE, I),), J.conclusion)


def rule_unit_right_inv(J: Sequent) -> Sequent:
    if not J.context or J.context[-1][1] != I:
        raise RuleError("unit-right inverse: last hypothesis is not a scalar i:I")
    i = J.context[-1][0]
    return Sequent(J.context[:-1], J.soup + (Connection(negate_term(i), ONE, I),), J.conclusion)


def dagger_flip(J: Sequent) -> Sequent:
    """``a:A |-_S b:B`` to ``b:B |-_{S*} a:A``."""
    a, A = _single(J, "dagger-flip")
    return Sequent((J.conclusion,), negate_soup(J.soup), (a, A))


def _pad_unit(J: Sequent) -> Sequent:
    # J |- c:C  to  J |- c @ 1 : C @ I  by tensor-right with |- 1:I
    return rule_tensor_r(J, rule_one())


def dagger_flip_macro(J: Sequent) -> Sequent:
    """dagger-flip spelled out as Negation, Uncurry, Exchange, Curry."""
    _single(J, "dagger-flip")
    return rule_curry(rule_exchange(rule_uncurry(_pad_unit(rule_negation(J))), 0))


def negation_via_dagger(J: Sequent) -> Sequent:
    """Negation derived from dagger-flip, Uncurry, Exchange, Curry."""
    _single(J, "negation")
    return rule_curry(rule_exchange(rule_uncurry(_pad_unit(dagger_flip(J))), 0))


def rule_app(arg: Sequent, fn: Sequent) -> Sequent:
    """Implication elimination as sugar: ``G, D |-_{S1 u S2 u {f : t^ @ x}} x:B``."""
    _disjoint(arg, fn, "application")
    t, A = arg.conclusion
    f, F = fn.conclusion
    if not (isinstance(F, TensorType) and F.left == negate_type(A)):
        raise RuleError(f"application: {render_type(F)} is not {render_type(A)} -o B")
    (x,) = fresh_names(set(arg.variables()) | set(fn.variables()), 1, "x")
    c = Connection(f, Tensor(negate_term(t), Var(x)), F)
    return Sequent(arg.context + fn.context, arg.soup + fn.soup + (c,), (Var(x), F.right))


def rename_var(J: Sequent, old: str, new: Term) -> Sequent:
    """Alpha-rename variable `old` to the bundle `new` (fresh variables)."""
    if old not in J.variables():
        raise RuleError(f"rename: {old} does not occur")
    fresh = term_vars(new)
    clash = set(fresh) & (set(J.variables()) - {old})
    if clash or len(set(fresh)) != len(fresh) or not fresh:
        raise RuleError(f"rename: {render_term(new)} is not a bundle of fresh variables")
    out = rename(J, {old: new})
    validate(out)
    return out


def rename_apart(J: Sequent, avoid) -> Sequent:
    """Rename every variable of `J` away from the names in `avoid`."""
    avoid = set(avoid)
    names = sorted(set(J.variables()))
    clash = [x for x in names if x in avoid]
    if not clash:
        return J
    new = fresh_names(avoid | set(names), len(clash), "r")
    return rename(J, {x: Var(n) for x, n in zip(clash, new)})


# ---------------------------------------------------------------------------
# Combinators (closed sequents |- term : type)


def _lam(pattern: Term, body: Term) -> Term:
    return Tensor(negate_term(pattern), body)


def _closed(term: Term, T: Type, soup=()) -> Sequent:
    return Sequent((), tuple(soup), (term, T))


def _lolli(A: Type, B: Type) -> Type:
    return TensorType(negate_type(A), B)


def combinator(name: str, *types: Type) -> Sequent:
    a, b, c = Var("a"), Var("b"), Var("c")
    x = Var("x")
    T = types
    if name == "id":
        (A,) = T
        return _closed(_lam(a, a), _lolli(A, A))
    if name in ("sbar", "sigma"):
        A, B = T
        return _closed(_lam(Tensor(a, b), Tensor(b, a)), _lolli(TensorType(A, B), TensorType(B, A)))
    if name == "alpha":
        A, B, C = T
        return _closed(
            _lam(tensor(a, Tensor(b, c)), tensor(a, b, c)),
            _lolli(TensorType(A, TensorType(B, C)), tensor_type(A, B, C)),
        )
    if name == "alpha_inv":
        A, B, C = T
        return _closed(
            _lam(tensor(a, b, c), tensor(a, Tensor(b, c))),
            _lolli(tensor_type(A, B, C), TensorType(A, TensorType(B, C))),
        )
    if name == "lambda":
        (A,) = T
        return _closed(_lam(Tensor(ONE, a), a), _lolli(TensorType(I, A), A))
    if name == "lambda_inv":
        (A,) = T
        return _closed(_lam(a, Tensor(ONE, a)), _lolli(A, TensorType(I, A)))
    if name == "rho":
        (A,) = T
        return _closed(_lam(Tensor(a, ONE), a), _lolli(TensorType(A, I), A))
    if name == "rho_inv":
        (A,) = T
        return _closed(_lam(a, Tensor(a, ONE)), _lolli(A, TensorType(A, I)))
    if name == "eta":
        (A,) = T
        return _closed(_lam(ONE, Tensor(Star(x), x)), _lolli(I, TensorType(negate_type(A), A)))
    if name == "epsilon":
        (A,) = T
        return _closed(_lam(Tensor(x, Star(x)), ONE), _lolli(TensorType(A, negate_type(A)), I))
    if name == "bbar":
        # \g.\f.\a. g (f a)
        A, B, C = T
        g, f, y, z = Var("g"), Var("f"), Var("y"), Var("z")
        soup = (
            Connection(f, Tensor(Star(a), y), _lolli(A, B)),
            Connection(g, Tensor(Star(y), z), _lolli(B, C)),
        )
        term = _lam(g, _lam(f, _lam(a, z)))
        typ = _lolli(_lolli(B, C), _lolli(_lolli(A, B), _lolli(A, C)))
        return _closed(term, typ, soup)
    if name == "tbar":
        # \f.\g.\(x1 @ x2). (f x1 @ g x2)
        A, B, C, D = T
        f, g = Var("f"), Var("g")
        x1, x2, y1, y2 = Var("x1"), Var("x2"), Var("y1"), Var("y2")
        soup = (
            Connection(f, Tensor(Star(x1), y1), _lolli(A, C)),
            Connection(g, Tensor(Star(x2), y2), _lolli(B, D)),
        )
        term = _lam(f, _lam(g, _lam(Tensor(x1, x2), Tensor(y1, y2))))
        typ = _lolli(_lolli(A, C), _lolli(_lolli(B, D), _lolli(TensorType(A, B), TensorType(C, D))))
        return _closed(term, typ, soup)
    raise RuleError(f"unknown combinator {name!r}")


COMBINATOR_ARITY = {
    "id": 1, "sbar": 2, "sigma": 2, "alpha": 3, "alpha_inv": 3, "lambda": 1,
    "lambda_inv": 1, "rho": 1, "rho_inv": 1, "eta": 1, "epsilon": 1, "bbar": 3, "tbar": 4,
}


def as_morphism(J: Sequent) -> Sequent:
    """``|- p @ q : P @ Q`` to the one-hypothesis form ``p^:P^ |- q:Q``."""
    if J.context:
        return J
    return rule_uncurry(J)


def morphism(name: str, *types: Type) -> Sequent:
    return as_morphism(combinator(name, *types))


def compose(*fs: Sequent) -> Sequent:
    """Diagrammatic composition: ``compose(f, g)`` is g after f (via Cut)."""
    out = fs[0]
    for g in fs[1:]:
        out = rule_cut(out, rename_apart(g, out.variables()))
    return out


def tensor_morphisms(f: Sequent, g: Sequent) -> Sequent:
    g = rename_apart(g, f.variables())
    return rule_tensor_l(rule_tensor_r(f, g), 0)


# ---------------------------------------------------------------------------
# Elaboration of sugar


def _sugar_vars(t, acc: set[str]) -> None:
    if isinstance(t, App):
        _sugar_vars(t.fn, acc)
        _sugar_vars(t.arg, acc)
    elif isinstance(t, Neg):
        _sugar_vars(t.inner, acc)
    elif isinstance(t, Tensor):
        _sugar_vars(t.left, acc)
        _sugar_vars(t.right, acc)
    elif not isinstance(t, Comb):
        acc.update(term_vars(t))


def elaborate(src, consts: dict[str, Type] | None = None) -> Sequent:
    """Desugar lambdas, applications and combinator references.

    An application ``f t`` becomes a fresh variable x plus the connection
    ``{f : t^ @ x}`` where it is produced (conclusion, left of a connection)
    and the negated connection where it is consumed (context, right side).
    """
    pre = parse_presequent(src, sugar=True)
    used: set[str] = set()
    for t, _ in pre.context:
        _sugar_vars(t, used)
    _sugar_vars(pre.conclusion[0], used)
    for l, r, _ in pre.conns:
        _sugar_vars(l, used)
        _sugar_vars(r, used)
    extra: list = []

    def fresh() -> str:
        (n,) = fresh_names(used, 1, "x")
        used.add(n)
        return n

    def el(t, pol: int):
        if isinstance(t, Neg):
            return negate_term(el(t.inner, 1 - pol))
        if isinstance(t, App):
            x = Var(fresh())
            f, a = el(t.fn, pol), el(t.arg, pol)
            if pol == 0:
                extra.append((f, Tensor(negate_term(a), x), None))
            else:
                extra.append((negate_term(f), Tensor(Star(x), a), None))
            return x
        if isinstance(t, Comb):
            if COMBINATOR_ARITY.get(t.name) != len(t.types):
                raise RuleError(f"combinator ${t.name} takes {COMBINATOR_ARITY.get(t.name)} types")
            J = rename_apart(combinator(t.name, *t.types), used)
            used.update(J.variables())
            soup = J.soup if pol == 0 else negate_soup(J.soup)
            extra.extend((c.left, c.right, c.type) for c in soup)
            return J.conclusion[0]
        if isinstance(t, Tensor):
            return Tensor(el(t.left, pol), el(t.right, pol))
        return t

    context = [(el(t, 1), T) for t, T in pre.context]
    conclusion = (el(pre.conclusion[0], 0), pre.conclusion[1])
    conns = [(el(l, 0), el(r, 1), T) for l, r, T in pre.conns]
    J = infer_connections(PreSequent(context, conns + extra, conclusion), consts)
    validate(J, dict(consts or {}))
    return J


# ---------------------------------------------------------------------------
# Derivation scripts


class DerivationError(DLCError):
    def __init__(self, path: str, msg: str):
        self.path = path
        super().__init__(f"node {path}: {msg}")


@dataclass
class Derivation:
    rule: str
    premises: list["Derivation"]
    params: list
    conclusion: Sequent
    path: str = "1"

    def nodes(self):
        for p in self.premises:
            yield from p.nodes()
        yield self

    def report(self) -> str:
        return "\n".join(f"node {n.path} OK {print_sequent(n.conclusion)}" for n in self.nodes())


def _apply_step(J: Sequent, kind: str, conn_text: str | None) -> Sequent:
    redexes = enumerate_redexes(J)
    if conn_text is None:
        redexes = [r for r in redexes if r.kind == kind or (
            kind == "consume" and r.kind.startswith("consume"))]
    else:
        p = _Parser(SourceText(conn_text, "<step>"))
        l, r, _ = p.connection()
        p.at_end()
        chosen = []
        for rd in redexes:
            c = rd.target
            if (c.left, c.right) == (l, r):
                want = {"consume": "consume-left"}.get(kind, kind)
            elif (c.left, c.right) == (negate_term(r), negate_term(l)):
                want = {"consume": "consume-right", "consume-left": "consume-right",
                        "consume-right": "consume-left"}.get(kind, kind)
            else:
                continue
            if rd.kind == want:
                chosen.append(rd)
        redexes = chosen
    if not redexes:
        raise RuleError(f"step: no enabled {kind} redex" + (f" on {conn_text}" if conn_text else ""))
    return rewrite_step(J, redexes[0])


def check_derivation(script: DerivationScript, consts: dict[str, Type] | None = None,
                     path: str = "1") -> Derivation:
    """Replay `script` bottom-up; every node's conclusion is recomputed."""
    subs = [a for a in script.args if isinstance(a, DerivationScript)]
    prem = [check_derivation(s, consts, f"{path}.{k}") for k, s in enumerate(subs, 1)]
    ps = [d.conclusion for d in prem]
    args = [a for a in script.args if not isinstance(a, DerivationScript)]
    op = script.op
    try:
        if op == "id":
            J = rule_id(args[0], args[1])
        elif op == "one":
            J = rule_one()
        elif op == "const":
            J = rule_const(*args)
        elif op == "seq":
            J = parse_sequent(args[0], consts)
        elif op == "cut":
            J = rule_cut(*ps)
        elif op == "tenr":
            J = rule_tensor_r(*ps)
        elif op == "tenl":
            J = rule_tensor_l(ps[0], args[0])
        elif op == "untenl":
            J = rule_untensor_l(ps[0], args[0])
        elif op == "curry":
            J = rule_curry(ps[0])
        elif op == "uncurry":
            J = rule_uncurry(ps[0])
        elif op == "neg":
            J = rule_negation(ps[0])
        elif op == "exch":
            J = rule_exchange(ps[0], args[0])
        elif op == "unitl":
            J = rule_unit_left(ps[0], parse_term(args[0]) if args else None)
        elif op == "unitr":
            J = rule_unit_right(ps[0], parse_term(args[0]) if args else None)
        elif op == "unitl-":
            J = rule_unit_left_inv(ps[0])
        elif op == "unitr-":
            J = rule_unit_right_inv(ps[0])
        elif op == "dagger":
            J = dagger_flip(ps[0])
        elif op == "app":
            J = rule_app(*ps)
        elif op == "rename":
            J = rename_var(ps[0], args[0], parse_term(args[1]))
        elif op == "step":
            J = _apply_step(ps[0], args[0], args[1] if len(args) > 1 else None)
        else:
            raise RuleError(f"unknown rule {op}")
        validate(J, dict(consts or {}))
    except DerivationError:
        raise
    except DLCError as exc:
        raise DerivationError(path, f"({op}) {exc}") from exc
    return Derivation(op, prem, args, J, path)


def load_sequents(src, consts: dict[str, Type] | None = None) -> list[Sequent]:
    """One sequent per nonblank, non-comment line; sugar is elaborated."""
    from .surface import _as_source, _located, strip_comment, ParseError

    src = _as_source(src)
    out = []
    for n, raw in enumerate(src.text.splitlines()):
        line = strip_comment(raw)
        if not line.strip():
            continue
        here = SourceText(line, src.origin, src.line + n)
        try:
            out.append(elaborate(here, consts))
        except ParseError:
            raise
        except DLCError as exc:
            raise _located(exc, here)
    return out
