"""ASCII concrete syntax: sequents (.dlc), signatures (.dsig) and
derivation scripts (.dprf).

Grammar summary::

    type     ::= type '-o' type | type '@' type | type '^' | NAME | 'I' | '(' type ')'
    term     ::= term '@' term | term '.' term | term '^' | NAME | '#'NAME | '1'
               | 'D[' type ']' | '(' term ')'
    sequent  ::= [entry {',' entry}] '|-' ['{' [conn {',' conn}] '}'] entry
    entry    ::= term ':' type
    conn     ::= term ':' ['[' type ']'] term

With ``sugar=True`` terms may also use ``\\pat => body`` (lambda),
juxtaposition ``f t`` (application) and ``$name[T, ...]`` (combinators);
:func:`daggerlc.calculus.elaborate` removes them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .syntax import (
    ONE,
    Atom,
    Connection,
    Const,
    DLCError,
    I,
    Sequent,
    Product,
    Star,
    Tensor,
    TensorType,
    Term,
    Type,
    TypingError,
    Var,
    check_term,
    dim,
    infer_term,
    negate_term,
    negate_type,
    product,
    render_term,
    render_type,
    type_leaves,
    validate,
)


class ParseError(DLCError):
    def __init__(self, msg: str, origin: str = "<string>", line: int = 1, col: int = 1):
        self.origin, self.line, self.col = origin, line, col
        super().__init__(f"{origin}:{line}:{col}: {msg}")


@dataclass(frozen=True)
class SourceText:
    text: str
    origin: str = "<stdin>"
    line: int = 1  # line offset of text within origin


# ---------------------------------------------------------------------------
# Sugar nodes (only present before elaboration)


@dataclass(frozen=True)
class App:
    fn: Any
    arg: Any


@dataclass(frozen=True)
class Comb:
    name: str
    types: tuple


@dataclass(frozen=True)
class Neg:
    """Negation of a sugar node whose normal form is not yet known."""

    inner: Any


def has_sugar(t) -> bool:
    if isinstance(t, (App, Comb, Neg)):
        return True
    if isinstance(t, Tensor):
        return has_sugar(t.left) or has_sugar(t.right)
    return False


def sugar_negate(t):
    if isinstance(t, Neg):
        return t.inner
    if isinstance(t, (App, Comb)):
        return Neg(t)
    if isinstance(t, Tensor) and has_sugar(t):
        return Tensor(sugar_negate(t.right), sugar_negate(t.left))
    return negate_term(t)


# ---------------------------------------------------------------------------
# Lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<turnstile>\|-)
  | (?P<lolli>-o\b)
  | (?P<arrow>=>)
  | (?P<const>\#[A-Za-z_][A-Za-z0-9_']*)
  | (?P<comb>\$[A-Za-z_][A-Za-z0-9_']*)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<one>1(?![0-9]))
  | (?P<sym>[{}(),:\[\]^@.\\])
    """,
    re.VERBOSE,
)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def strip_comment(line: str) -> str:
    """Drop a ``#`` comment (``#`` followed by whitespace or end of line)."""
    m = re.search(r"(^|\s)#(\s|$)", line)
    return line if m is None else line[: m.start()]


def tokenize(src: SourceText) -> list[Tok]:
    toks: list[Tok] = []
    text, pos, line, col = src.text, 0, src.line, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", src.origin, line, col)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(Tok(kind if kind != "sym" else s, s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    toks.append(Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, src: SourceText, sugar: bool = False):
        self.src = src
        self.toks = tokenize(src)
        self.i = 0
        self.sugar = sugar

    # -- helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, self.src.origin, tok.line, tok.col)

    def accept(self, kind: str) -> Tok | None:
        if self.tok.kind == kind:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind: str) -> Tok:
        t = self.accept(kind)
        if t is None:
            shown = self.tok.text or "end of input"
            self.error(f"expected {kind!r}, found {shown!r}")
        return t

    def at_end(self):
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")

    # -- types
    def type_(self) -> Type:
        left = self.type_tensor()
        if self.accept("lolli"):
            return TensorType(negate_type(left), self.type_())
        return left

    def type_tensor(self) -> Type:
        out = self.type_postfix()
        while self.accept("@"):
            out = TensorType(out, self.type_postfix())
        return out

    def type_postfix(self) -> Type:
        t = self.type_primary()
        while self.accept("^"):
            t = negate_type(t)
        return t

    def type_primary(self) -> Type:
        if self.accept("("):
            t = self.type_()
            self.expect(")")
            return t
        tok = self.expect("name")
        return I if tok.text == "I" else Atom(tok.text)

    # -- terms
    def term(self):
        out = self.term_prod()
        while self.accept("@"):
            out = Tensor(out, self.term_prod())
        return out

    def term_prod(self):
        parts = [self.term_app()]
        while self.accept("."):
            parts.append(self.term_app())
        if len(parts) == 1:
            return parts[0]
        if any(has_sugar(p) for p in parts):
            self.error("applications and combinators cannot appear in products")
        return product(*parts)

    _STARTS = ("name", "const", "one", "(", "comb", "\\")

    def term_app(self):
        out = self.term_postfix()
        while self.sugar and self.tok.kind in self._STARTS:
            out = App(out, self.term_postfix())
        return out

    def _is_dim(self) -> bool:
        return (
            self.tok.kind == "name"
            and self.tok.text == "D"
            and self.toks[self.i + 1].kind == "["
        )

    def term_postfix(self):
        t = self.term_primary()
        while self.accept("^"):
            t = sugar_negate(t)
        return t

    def term_primary(self):
        tok = self.tok
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if self._is_dim():
            self.i += 2
            T = self.type_()
            self.expect("]")
            return dim(T)
        if self.accept("name"):
            return Var(tok.text)
        if self.accept("const"):
            return Const(tok.text[1:])
        if self.accept("one"):
            return ONE
        if self.sugar and self.accept("\\"):
            pat = self.term_postfix()
            if has_sugar(pat):
                self.error("lambda pattern must be a plain term", tok)
            self.expect("arrow")
            body = self.term()
            return Tensor(negate_term(pat), body)
        if self.sugar and self.accept("comb"):
            types = []
            if self.accept("["):
                types.append(self.type_())
                while self.accept(","):
                    types.append(self.type_())
                self.expect("]")
            return Comb(tok.text[1:], tuple(types))
        self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    # -- sequents
    def entry(self):
        t = self.term()
        self.expect(":")
        return (t, self.type_())

    def connection(self):
        left = self.term()
        self.expect(":")
        T = None
        if self.accept("["):
            T = self.type_()
            self.expect("]")
        right = self.term()
        return (left, right, T)

    def presequent(self):
        context = []
        if self.tok.kind != "turnstile":
            context.append(self.entry())
            while self.accept(","):
                context.append(self.entry())
        self.expect("turnstile")
        conns = []
        if self.accept("{"):
            if self.tok.kind != "}":
                conns.append(self.connection())
                while self.accept(","):
                    conns.append(self.connection())
            self.expect("}")
        concl = self.entry()
        self.at_end()
        return PreSequent(context, conns, concl)


@dataclass
class PreSequent:
    """A parsed sequent whose connections may still lack types."""

    context: list
    conns: list  # (left, right, type | None)
    conclusion: tuple


def _as_source(src) -> SourceText:
    return src if isinstance(src, SourceText) else SourceText(str(src), "<string>")


def parse_type(src) -> Type:
    p = _Parser(_as_source(src))
    t = p.type_()
    p.at_end()
    return t


def parse_term(src, sugar: bool = False):
    p = _Parser(_as_source(src), sugar)
    t = p.term()
    p.at_end()
    return t


def parse_presequent(src, sugar: bool = False) -> PreSequent:
    return _Parser(_as_source(src), sugar).presequent()


class _MV:
    """A type metavariable; `neg` marks its linear negation."""

    __slots__ = ("id", "neg")

    def __init__(self, id: int, neg: bool = False):
        self.id, self.neg = id, neg

    def __repr__(self):
        return f"?{self.id}{'^' if self.neg else ''}"


class _Unifier:
    def __init__(self, consts: dict[str, Type] | None):
        self.subst: dict[int, Any] = {}
        self.env: dict[str, Any] = {}
        self.consts: dict[str, Any] = dict(consts or {})
        self.n = 0

    def fresh(self) -> _MV:
        self.n += 1
        return _MV(self.n)

    def neg(self, t):
        if isinstance(t, _MV):
            return _MV(t.id, not t.neg)
        if isinstance(t, TensorType):
            return TensorType(self.neg(t.right), self.neg(t.left))
        return negate_type(t)

    def resolve(self, t):
        if isinstance(t, _MV):
            if t.id in self.subst:
                r = self.resolve(self.subst[t.id])
                return self.neg(r) if t.neg else r
            return t
        if isinstance(t, TensorType):
            return TensorType(self.resolve(t.left), self.resolve(t.right))
        return t

    def unify(self, a, b, where: str) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, _MV) and isinstance(b, _MV) and a.id == b.id:
            if a.neg == b.neg:
                return
            # ?x = ?x^ : only self-dual types; leave undetermined
            return
        if isinstance(a, _MV):
            self.subst[a.id] = self.neg(b) if a.neg else b
            return
        if isinstance(b, _MV):
            self.unify(b, a, where)
            return
        if isinstance(a, TensorType) and isinstance(b, TensorType):
            self.unify(a.left, b.left, where)
            self.unify(a.right, b.right, where)
            return
        if a != b:
            raise TypingError(f"type mismatch in {where}: {_show(a)} vs {_show(b)}")

    def type_of(self, t: Term):
        if isinstance(t, (Var, Const)) or (isinstance(t, Star)):
            base = t.inner if isinstance(t, Star) else t
            table = self.env if isinstance(base, Var) else self.consts
            if base.name not in table:
                table[base.name] = self.fresh()
            T = table[base.name]
            return self.neg(T) if isinstance(t, Star) else T
        if isinstance(t, Tensor):
            return TensorType(self.type_of(t.left), self.type_of(t.right))
        if isinstance(t, Product):
            for f in t.factors:
                self.unify(self.type_of(f), I, render_term(t))
        return I

    def ground(self, T) -> Type | None:
        T = self.resolve(T)
        return T if _complete_ground(T) else None


def _complete_ground(T) -> bool:
    if isinstance(T, _MV):
        return False
    if isinstance(T, TensorType):
        return _complete_ground(T.left) and _complete_ground(T.right)
    return True


def _show(T) -> str:
    if isinstance(T, _MV):
        return repr(T)
    if isinstance(T, TensorType):
        return f"({_show(T.left)} @ {_show(T.right)})"
    return render_type(T)


def _unify_presequent(pre: PreSequent, consts, use_annotations: bool = True):
    u = _Unifier(consts)
    for t, T in pre.context:
        u.unify(u.type_of(t), T, f"context entry {render_term(t)}")
    t, T = pre.conclusion
    u.unify(u.type_of(t), T, f"conclusion {render_term(t)}")
    sides = []
    for l, r, T in pre.conns:
        where = f"connection {render_term(l)} : {render_term(r)}"
        lt = u.type_of(l)
        u.unify(lt, u.type_of(r), where)
        if T is not None and use_annotations:
            u.unify(lt, T, where)
        sides.append(lt)
    return u, sides


def infer_connections(pre: PreSequent, consts: dict[str, Type] | None = None) -> Sequent:
    """Type every connection by unification (annotations are constraints)."""
    u, sides = _unify_presequent(pre, consts)
    typed = []
    for (l, r, _), lt in zip(pre.conns, sides):
        T = u.ground(lt)
        if T is None:
            raise TypingError(
                f"cannot infer the type of connection {render_term(l)} : {render_term(r)};"
                " annotate it as t :[T] u"
            )
        typed.append(Connection(l, r, T))
    return Sequent(tuple(pre.context), tuple(typed), pre.conclusion)


def parse_sequent(src, consts: dict[str, Type] | None = None) -> Sequent:
    """Parse, type and check linearity of one sequent."""
    src = _as_source(src)
    pre = parse_presequent(src)
    try:
        J = infer_connections(pre, consts)
        validate(J, dict(consts or {}))
    except ParseError:
        raise
    except DLCError as exc:  # attach the location
        raise _located(exc, src)
    return J


def _located(exc: DLCError, src: SourceText) -> DLCError:
    exc.args = (f"{src.origin}:{src.line}: {exc.args[0] if exc.args else exc}",)
    return exc


def parse_sequent_file(src, consts: dict[str, Type] | None = None) -> list[Sequent]:
    """One sequent per nonblank, non-comment line."""
    src = _as_source(src)
    out = []
    for n, raw in enumerate(src.text.splitlines()):
        line = strip_comment(raw)
        if line.strip():
            out.append(parse_sequent(SourceText(line, src.origin, src.line + n), consts))
    return out


# ---------------------------------------------------------------------------
# Printer


def _annotation_needed(J: Sequent) -> set[int]:
    pre = PreSequent(list(J.context), [(c.left, c.right, None) for c in J.soup], J.conclusion)
    u, sides = _unify_presequent(pre, None)
    return {k for k, lt in enumerate(sides) if u.ground(lt) is None}


def print_connection(c: Connection, annotate: bool = False) -> str:
    sep = f" :[{render_type(c.type)}] " if annotate else " : "
    return render_term(c.left) + sep + render_term(c.right)


def print_sequent(J: Sequent) -> str:
    ctx = ", ".join(f"{render_term(t)}:{render_type(T)}" for t, T in J.context)
    out = (ctx + " |- ") if ctx else "|- "
    if J.soup:
        need = _annotation_needed(J)
        conns = ", ".join(print_connection(c, k in need) for k, c in enumerate(J.soup))
        out += "{ " + conns + " } "
    t, T = J.conclusion
    return out + f"{render_term(t)}:{render_type(T)}"


# ---------------------------------------------------------------------------
# Signatures


@dataclass
class SignatureDecl:
    dims: dict[str, int] = field(default_factory=dict)
    consts: dict[str, Type] = field(default_factory=dict)
    values: dict[str, np.ndarray] = field(default_factory=dict)


def _parse_tensor_literal(text: str, origin: str, line: int) -> np.ndarray:
    pos = 0

    def skip():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def value():
        nonlocal pos
        skip()
        if pos < len(text) and text[pos] == "[":
            pos += 1
            items = [value()]
            skip()
            while pos < len(text) and text[pos] == ",":
                pos += 1
                items.append(value())
                skip()
            if pos >= len(text) or text[pos] != "]":
                raise ParseError("expected ']' in tensor literal", origin, line, pos + 1)
            pos += 1
            return items
        m = re.compile(r"[-+0-9.eEi]+").match(text, pos)
        if m is None:
            raise ParseError("expected a complex number", origin, line, pos + 1)
        pos = m.end()
        try:
            return complex(m.group().replace("i", "j"))
        except ValueError:
            raise ParseError(f"bad complex literal {m.group()!r}", origin, line, m.start() + 1)

    v = value()
    skip()
    if pos != len(text):
        raise ParseError("trailing text after tensor literal", origin, line, pos + 1)
    try:
        arr = np.array(v, dtype=complex)
    except ValueError:
        raise ParseError("ragged tensor literal", origin, line, 1)
    if arr.dtype == object:
        raise ParseError("ragged tensor literal", origin, line, 1)
    return arr


def tensor_shape(T: Type, dims: dict[str, int]) -> tuple[int, ...]:
    shape = []
    for leaf in type_leaves(T):
        name = leaf.name if isinstance(leaf, Atom) else leaf.inner.name
        if name not in dims:
            raise DLCError(f"undeclared atomic type {name}")
        shape.append(dims[name])
    return tuple(shape)


def parse_signature(src) -> SignatureDecl:
    src = _as_source(src)
    sig = SignatureDecl()
    for n, raw in enumerate(src.text.splitlines()):
        line = strip_comment(raw).strip()
        lineno = src.line + n
        if not line:
            continue
        m = re.fullmatch(r"type\s+([A-Za-z_][A-Za-z0-9_']*)\s+dim\s+(-?\d+)", line)
        if m:
            name, d = m.group(1), int(m.group(2))
            if name == "I":
                raise ParseError("I is the unit type and has dimension 1", src.origin, lineno)
            if name in sig.dims:
                raise ParseError(f"duplicate type {name}", src.origin, lineno)
            if d <= 0:
                raise ParseError(f"dimension of {name} must be positive", src.origin, lineno)
            sig.dims[name] = d
            continue
        m = re.fullmatch(r"const\s+([A-Za-z_][A-Za-z0-9_']*)\s*:\s*([^=]+?)\s*(?:=\s*(.+))?", line)
        if m:
            name = m.group(1)
            if name in sig.consts:
                raise ParseError(f"duplicate constant {name}", src.origin, lineno)
            T = parse_type(SourceText(m.group(2), src.origin, lineno))
            sig.consts[name] = T
            if m.group(3) is not None:
                arr = _parse_tensor_literal(m.group(3), src.origin, lineno)
                try:
                    want = tensor_shape(T, sig.dims)
                except DLCError as exc:
                    raise ParseError(str(exc), src.origin, lineno)
                if arr.shape != want:
                    raise ParseError(
                        f"constant {name} has shape {arr.shape}, type needs {want}",
                        src.origin,
                        lineno,
                    )
                sig.values[name] = arr
            continue
        raise ParseError(f"cannot parse declaration {line!r}", src.origin, lineno)
    return sig


def print_signature(sig: SignatureDecl) -> str:
    lines = [f"type {k} dim {v}" for k, v in sig.dims.items()]
    for name, T in sig.consts.items():
        line = f"const {name} : {render_type(T)}"
        if name in sig.values:
            line += " = " + _format_literal(sig.values[name])
        lines.append(line)
    return "\n".join(lines) + "\n"


def _format_literal(a: np.ndarray) -> str:
    if a.ndim == 0:
        z = complex(a)
        return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"
    return "[" + ",".join(_format_literal(x) for x in a) + "]"


# ---------------------------------------------------------------------------
# Derivation scripts

# opcode -> argument kinds: s script, T type, n name, i index, t term text,
# q sequent text, k redex kind, c connection text; trailing '?' = optional
OPCODES: dict[str, tuple[str, ...]] = {
    "id": ("n", "T"),
    "one": (),
    "const": ("n", "T", "T", "n?", "n?"),
    "seq": ("q",),
    "cut": ("s", "s"),
    "tenr": ("s", "s"),
    "tenl": ("s", "i"),
    "untenl": ("s", "i"),
    "curry": ("s",),
    "uncurry": ("s",),
    "neg": ("s",),
    "exch": ("s", "i"),
    "unitl": ("s", "t?"),
    "unitl-": ("s",),
    "unitr": ("s", "t?"),
    "unitr-": ("s",),
    "dagger": ("s",),
    "app": ("s", "s"),
    "rename": ("s", "n", "t"),
    "step": ("s", "k", "c?"),
}


@dataclass
class DerivationScript:
    op: str
    args: list
    line: int = 1
    col: int = 1

    def __str__(self) -> str:
        parts = [self.op]
        for a in self.args:
            if isinstance(a, DerivationScript):
                parts.append(str(a))
            elif isinstance(a, str) and (" " in a or a == ""):
                parts.append('"' + a + '"')
            else:
                parts.append(render_type(a) if not isinstance(a, (str, int)) else str(a))
        return "(" + " ".join(parts) + ")"


_SEXP = re.compile(r'\s+|(?P<open>\()|(?P<close>\))|(?P<str>"[^"]*")|(?P<atom>[^\s()"]+)')


def _read_sexp(src: SourceText):
    text = "\n".join(strip_comment(l) for l in src.text.splitlines())
    stack: list[list] = [[]]
    line, col, pos = src.line, 1, 0
    while pos < len(text):
        m = _SEXP.match(text, pos)
        if m is None:
            raise ParseError("unreadable input", src.origin, line, col)
        here = (line, col)
        if m.group("open"):
            stack.append([here])
        elif m.group("close"):
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", src.origin, line, col)
            done = stack.pop()
            stack[-1].append(done)
        elif m.group("str"):
            stack[-1].append(("str", m.group("str")[1:-1], here))
        elif m.group("atom"):
            stack[-1].append(("atom", m.group("atom"), here))
        s = m.group()
        nl = s.count("\n")
        if nl:
            line += nl
            col = len(s) - s.rfind("\n")
        else:
            col += len(s)
        pos = m.end()
    if len(stack) != 1:
        raise ParseError("unbalanced '('", src.origin, line, col)
    return stack[0]


def _sexp_text(x) -> str:
    if isinstance(x, tuple):
        return x[1]
    return "(" + " ".join(_sexp_text(y) for y in x[1:]) + ")"


def _to_script(x, src: SourceText) -> DerivationScript:
    if isinstance(x, tuple):
        raise ParseError(f"expected a rule application, found {x[1]!r}", src.origin, *x[2])
    (line, col), items = x[0], x[1:]
    if not items or not isinstance(items[0], tuple):
        raise ParseError("empty rule application", src.origin, line, col)
    op = items[0][1]
    if op not in OPCODES:
        raise ParseError(f"unknown rule {op!r}", src.origin, line, col)
    kinds = OPCODES[op]
    required = sum(1 for k in kinds if not k.endswith("?"))
    got = items[1:]
    if not required <= len(got) <= len(kinds):
        raise ParseError(
            f"rule {op} takes {required}..{len(kinds)} arguments, got {len(got)}",
            src.origin,
            line,
            col,
        )
    args: list = []
    for kind, a in zip(kinds, got):
        kind = kind.rstrip("?")
        where = a[2] if isinstance(a, tuple) else a[0]
        if kind == "s":
            args.append(_to_script(a, src))
        elif kind == "T":
            args.append(parse_type(SourceText(_sexp_text(a), src.origin, where[0])))
        elif kind == "i":
            if not isinstance(a, tuple) or not a[1].isdigit():
                raise ParseError(f"rule {op} expects an index", src.origin, *where)
            args.append(int(a[1]))
        elif kind in ("n", "k"):
            if not isinstance(a, tuple):
                raise ParseError(f"rule {op} expects a name", src.origin, *where)
            args.append(a[1])
        else:
            args.append(_sexp_text(a))
    return DerivationScript(op, args, line, col)


def parse_derivation(src) -> DerivationScript:
    src = _as_source(src)
    forms = _read_sexp(src)
    if len(forms) != 1:
        raise ParseError(f"expected one derivation, found {len(forms)}", src.origin, src.line, 1)
    return _to_script(forms[0], src)


def parse_derivation_file(src) -> list[DerivationScript]:
    src = _as_source(src)
    return [_to_script(f, src) for f in _read_sexp(src)]
