"""Random well-typed sequents built by short random derivations."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from . import calculus as C
from .model import Signature, random_signature
from .syntax import Atom, DLCError, I, Sequent, TensorType, Type, Var, negate_type, rename, validate


@dataclass
class CorpusConfig:
    size: int = 500
    max_rules: int = 8
    atoms: tuple[str, ...] = ("A", "B", "C")
    max_type_depth: int = 2
    seed: int = 0


@dataclass
class CorpusItem:
    sequent: Sequent
    consts: dict[str, Type]
    rules: list[str]

    @property
    def size(self) -> int:
        return len(self.rules)


@dataclass
class _Gen:
    rng: random.Random
    cfg: CorpusConfig
    consts: dict[str, Type] = field(default_factory=dict)
    names: itertools.count = field(default_factory=lambda: itertools.count(1))

    def var(self) -> str:
        return f"x{next(self.names)}"

    def type_(self, depth: int | None = None, unit: bool = True) -> Type:
        depth = self.cfg.max_type_depth if depth is None else depth
        r = self.rng.random()
        if depth > 0 and r < 0.3:
            return TensorType(self.type_(depth - 1), self.type_(depth - 1))
        if unit and r < 0.38:
            return I
        a = Atom(self.rng.choice(self.cfg.atoms))
        return negate_type(a) if self.rng.random() < 0.3 else a

    def const(self, A: Type, B: Type) -> tuple[Sequent, list[str]]:
        name = f"c{len(self.consts)}"
        self.consts[name] = TensorType(negate_type(A), B)
        return C.rule_const(name, A, B, self.var(), self.var()), ["const"]

    def leaf(self, hyp: Type | None = None) -> tuple[Sequent, list[str]]:
        r = self.rng.random()
        if hyp is not None:
            if r < 0.5:
                return C.rule_id(self.var(), hyp), ["id"]
            return self.const(hyp, self.type_(1))
        if r < 0.35:
            return C.rule_id(self.var(), self.type_()), ["id"]
        if r < 0.45:
            return C.rule_one(), ["one"]
        if r < 0.75:
            return self.const(self.type_(1), self.type_(1))
        A = Atom(self.rng.choice(self.cfg.atoms))
        B = Atom(self.rng.choice(self.cfg.atoms))
        name, types = self.rng.choice(
            [("eta", (A,)), ("epsilon", (A,)), ("sigma", (A, B)), ("lambda", (A,)),
             ("rho_inv", (A,)), ("id", (TensorType(A, B),))]
        )
        J = C.morphism(name, *types)
        return rename(J, {x: Var(self.var()) for x in sorted(set(J.variables()))}), [name]

    def unary(self, J: Sequent) -> tuple[Sequent, str]:
        ops = ["neg", "curry", "uncurry", "tenl", "untenl", "exch", "dagger",
               "unitl", "unitr", "unitl-", "unitr-"]
        self.rng.shuffle(ops)
        for op in ops:
            try:
                k = len(J.context)
                if op == "neg":
                    return C.rule_negation(J), op
                if op == "curry":
                    return C.rule_curry(J), op
                if op == "uncurry":
                    return C.rule_uncurry(J), op
                if op == "tenl":
                    return C.rule_tensor_l(J, self.rng.randrange(max(k - 1, 1))), op
                if op == "untenl":
                    return C.rule_untensor_l(J, self.rng.randrange(max(k, 1))), op
                if op == "exch":
                    return C.rule_exchange(J, self.rng.randrange(max(k - 1, 1))), op
                if op == "dagger":
                    return C.dagger_flip(J), op
                if op == "unitl":
                    return C.rule_unit_left(J), op
                if op == "unitr":
                    return C.rule_unit_right(J), op
                if op == "unitl-":
                    return C.rule_unit_left_inv(J), op
                if op == "unitr-":
                    return C.rule_unit_right_inv(J), op
            except DLCError:
                continue
        return J, ""

    def build(self, budget: int, hyp: Type | None = None) -> tuple[Sequent, list[str]]:
        if budget <= 1 or self.rng.random() < 0.15:
            return self.leaf(hyp)
        r = self.rng.random()
        if hyp is None and r < 0.3:
            J, rules = self.build(budget - 1)
            J2, op = self.unary(J)
            return (J2, rules + [op]) if op else (J, rules)
        if r < 0.65:
            left, lr = self.build((budget - 1) // 2 or 1, hyp)
            right, rr = self.build(budget - 1 - len(lr), left.conclusion[1])
            return C.rule_cut(left, C.rename_apart(right, left.variables())), lr + rr + ["cut"]
        if r < 0.85:
            left, lr = self.build((budget - 1) // 2 or 1, hyp)
            right, rr = self.build(budget - 1 - len(lr))
            return C.rule_tensor_r(left, C.rename_apart(right, left.variables())), lr + rr + ["tenr"]
        if hyp is None:
            arg, ar = self.build((budget - 2) // 2 or 1)
            A = arg.conclusion[1]
            body, br = self.build(budget - 2 - len(ar), A)
            fn = C.rule_curry(body)
            if fn.conclusion[1] == negate_type(A):
                return arg, ar  # curry collapsed a 1:I conclusion
            return C.rule_app(arg, C.rename_apart(fn, arg.variables())), ar + br + ["curry", "app"]
        return self.leaf(hyp)


def random_sequent(rng: random.Random, cfg: CorpusConfig | None = None) -> CorpusItem:
    cfg = cfg or CorpusConfig()
    while True:
        g = _Gen(rng, cfg)
        try:
            J, rules = g.build(rng.randint(1, cfg.max_rules))
        except DLCError:
            continue
        if len(rules) > cfg.max_rules:
            continue
        validate(J, g.consts)
        return CorpusItem(J, g.consts, rules)


def generate_corpus(cfg: CorpusConfig | None = None) -> list[CorpusItem]:
    cfg = cfg or CorpusConfig()
    rng = random.Random(cfg.seed)
    return [random_sequent(rng, cfg) for _ in range(cfg.size)]


def valued_signature(item: CorpusItem, seed: int = 0, max_dim: int = 3) -> Signature:
    """Random dimensions for the atoms and random complex values for every constant."""
    rng = np.random.default_rng(seed)
    dims = {a: int(rng.integers(1, max_dim + 1)) for a in "ABC"}
    return random_signature(rng, dims, item.consts)
