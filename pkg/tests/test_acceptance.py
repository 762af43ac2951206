"""Acceptance criteria 1-11. Each test prints one ``criterion N PASS|FAIL`` line.

Run alone with ``pytest tests/test_acceptance.py`` (lines are printed even
without ``-s``) or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time

import numpy as np
import pytest

from conftest import corpus
from daggerlc import calculus as C
from daggerlc import examples_path
from daggerlc.corpus import CorpusConfig, random_sequent
from daggerlc.model import (
    Signature,
    contract,
    contract_bruteforce,
    interpret,
    random_wire_graph,
    verify_axioms,
)
from daggerlc.rewrite import (
    GraphCapExceeded,
    enumerate_redexes,
    is_normal,
    normalize,
    reduction_graph,
    soup_equiv,
    step,
    step_bound,
)
from daggerlc.surface import (
    parse_derivation,
    parse_derivation_file,
    parse_sequent,
    parse_sequent_file,
    print_sequent,
)
from daggerlc.syntax import (
    ONE,
    Atom,
    Connection,
    Const,
    Dual,
    I,
    Sequent,
    Tensor,
    TensorType,
    Var,
    alpha_equiv,
    canonicalize,
    expand,
    negate_term,
    render_term,
    render_type,
    validate,
)

SEEDS = range(10)


def report(capsys, n: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'} {title}" + (f" [{detail}]" if detail else "")
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_01_teleportation(capsys):
    t0 = time.perf_counter()
    (J,) = parse_sequent_file((examples_path() / "teleport.dlc").read_text())
    target = parse_sequent("x:T |- x:T")
    sig = Signature({"T": 2})
    runs = [normalize(J)] + [normalize(J, "random", s) for s in SEEDS]
    lengths = [len(tr) for _, tr in runs]
    alpha_ok = all(alpha_equiv(nf, target) for nf, _ in runs)
    err = max(
        float(np.max(np.abs(interpret(s, sig) - np.eye(2))))
        for _, tr in runs
        for s in [J] + [st.after for st in tr]
    )
    elapsed = time.perf_counter() - t0
    ok = alpha_ok and max(lengths) <= 20 and err <= 1e-9 and elapsed < 1.0
    report(capsys, 1, "teleportation", ok,
           f"steps {min(lengths)}..{max(lengths)}, max |M-I| {err:.1e}, {elapsed:.2f}s")


def test_criterion_02_subject_reduction(capsys):
    items = corpus(500, 0)
    steps = failures = 0
    for item in items:
        cur = expand(item.sequent)
        ctx, concl = [T for _, T in cur.context], cur.conclusion[1]
        while True:
            rs = enumerate_redexes(cur)
            if not rs:
                break
            for r in rs:
                steps += 1
                try:
                    K = step(cur, r)
                    validate(K, item.consts)
                    if [T for _, T in K.context] != ctx or K.conclusion[1] != concl:
                        failures += 1
                except Exception:
                    failures += 1
            cur = step(cur, rs[0])
    report(capsys, 2, "subject reduction", failures == 0 and len(items) >= 500,
           f"{len(items)} sequents, {steps} steps, {failures} failures")


def test_criterion_03_strong_normalisation(capsys):
    t0 = time.perf_counter()
    items = corpus(500, 0)
    over = 0
    worst = 0.0
    for item in items:
        bound = step_bound(expand(item.sequent))
        for strategy, seed in [("deterministic", None)] + [("random", s) for s in SEEDS]:
            try:
                _, tr = normalize(item.sequent, strategy, seed)
            except Exception:
                over += 1
                continue
            over += len(tr) > bound
            worst = max(worst, len(tr) / max(bound, 1))
    elapsed = time.perf_counter() - t0
    report(capsys, 3, "strong normalisation", over == 0 and elapsed < 60,
           f"{len(items)} x 11 runs, worst steps/bound {worst:.2f}, {elapsed:.1f}s")


def _both_consume_instances(n: int):
    """States met while normalising random sequents where one connection can be
    consumed in either direction."""
    rng = random.Random(2024)
    found = []
    while len(found) < n:
        item = random_sequent(rng, CorpusConfig())
        cur = expand(item.sequent)
        while (rs := enumerate_redexes(cur)):
            by_index = {}
            for r in rs:
                by_index.setdefault(r.index, {})[r.kind] = r
            pair = next((d for d in by_index.values() if {"consume-left", "consume-right"} <= d.keys()), None)
            if pair:
                found.append((cur, pair["consume-left"], pair["consume-right"]))
                break
            cur = step(cur, rs[0])
    return found


def test_criterion_04_confluence(capsys):
    items = corpus(500, 0)
    checked = skipped = multi = 0
    for item in items:
        try:
            g = reduction_graph(item.sequent, size_cap=5000)
        except GraphCapExceeded:
            skipped += 1
            continue
        checked += 1
        multi += len(g.sinks()) != 1
    sym = _both_consume_instances(100)
    agree = sum(alpha_equiv(step(J, a), step(J, b)) for J, a, b in sym)
    ok = multi == 0 and agree == len(sym) == 100
    report(capsys, 4, "confluence", ok,
           f"{checked} graphs single-sink, {skipped} over cap, substitution symmetry {agree}/{len(sym)}")


def test_criterion_05_consistency(capsys):
    A = Atom("A")
    ident = C.combinator("id", TensorType(A, A))
    swap = C.combinator("sbar", A, A)
    ok = is_normal(ident) and is_normal(swap) and not soup_equiv(ident, swap)
    report(capsys, 5, "consistency", ok, f"{print_sequent(ident)} vs {print_sequent(swap)}")


def test_criterion_06_admissibility(capsys):
    ex = examples_path()
    A, B = Atom("A"), Atom("B")
    lolli = C.check_derivation(parse_derivation((ex / "lollipop_elim.dprf").read_text()))
    lolli_ok = alpha_equiv(lolli.conclusion, parse_sequent("t:A, f:A^ @ B |- { f : t^ @ b } b:B"))
    f = C.rule_const("f", A, B)
    flip = C.dagger_flip_macro(f)
    flip_ok = alpha_equiv(flip, parse_sequent("b:B |- { #f^ : b^ @ a } a:A", {"f": TensorType(Dual(A), B)}))
    scripts = [C.check_derivation(s).conclusion
               for s in parse_derivation_file((ex / "dagger_flip.dprf").read_text())]
    flip_ok = flip_ok and alpha_equiv(scripts[0], scripts[1])

    rng = random.Random(6)
    singles = []
    while len(singles) < 500:
        item = random_sequent(rng, CorpusConfig())
        if len(item.sequent.context) == 1:
            singles.append(item.sequent)
    invol = sum(alpha_equiv(C.dagger_flip(C.dagger_flip(J)), J) for J in singles)
    inter = sum(alpha_equiv(C.negation_via_dagger(J), C.rule_negation(J)) for J in singles)
    ok = lolli_ok and flip_ok and invol == 500 and inter == 500
    report(capsys, 6, "admissibility", ok,
           f"-oE {lolli_ok}, dagger-flip {flip_ok}, involution {invol}/500, negation {inter}/500")


def test_criterion_07_scalar_lemmas(capsys):
    consts = {k: I for k in "abcmn"}
    eq = lambda a, b: soup_equiv(parse_sequent(a, consts), parse_sequent(b, consts))
    checks = {
        "associativity": eq("|- { (#a . #b) . #c : 1 } 1:I", "|- { #a . (#b . #c) : 1 } 1:I"),
        "commutativity": eq("|- { #m . #n : 1 } 1:I", "|- { #n . #m : 1 } 1:I"),
        "sesquilinearity": eq("|- { #m : #n } 1:I", "|- { #m . #n^ : 1 } 1:I"),
        "dimension": eq("|- { D[A] . D[B] : 1 } 1:I", "|- { D[A @ B] : 1 } 1:I"),
    }
    six = complex(interpret(parse_sequent("|- { D[A @ B] : 1 } 1:I"), Signature({"A": 2, "B": 3})))
    ok = all(checks.values()) and abs(six - 6) <= 1e-12
    report(capsys, 7, "scalar lemmas", ok, ", ".join(f"{k} {v}" for k, v in checks.items()) + f", D[A@B]={six.real:g}")


def test_criterion_08_axioms(capsys):
    t0 = time.perf_counter()
    results = verify_axioms(dims_under_test=(2, 3), tol=1e-9)
    elapsed = time.perf_counter() - t0
    failed = sorted({r.name for r in results if not r.passed})
    names = {r.name for r in results}
    ok = not failed and len(names) == 9 and elapsed < 30
    worst = max(r.max_error for r in results)
    report(capsys, 8, "dagger-compact axioms", ok,
           f"{len(names)} equalities x {len(results) // len(names)} dimension sets, "
           f"failed {failed or 'none'}, max err {worst:.1e}, {elapsed:.1f}s")


def _beta_instance(rng: random.Random):
    k = rng.randint(2, 4)
    names = [f"a{i}" for i in range(k)]
    tys = {n: rng.choice([Atom("A"), Atom("B"), Dual(Atom("C"))]) for n in names}

    def tree(ns):
        if len(ns) == 1:
            return Var(ns[0]), tys[ns[0]]
        cut = rng.randint(1, len(ns) - 1)
        (l, lt), (r, rt) = tree(ns[:cut]), tree(ns[cut:])
        return Tensor(l, r), TensorType(lt, rt)

    pat, PT = tree(names)
    while True:
        perm = names[:]
        rng.shuffle(perm)
        body, BT = tree(perm)
        if body != pat:
            break
    return pat, PT, body, BT


def test_criterion_09_beta_reduction(capsys):
    rng = random.Random(9)
    good = 0
    for n in range(100):
        pat, PT, body, BT = _beta_instance(rng)
        t = Const("t")
        consts = {"t": PT}
        lam = Tensor(negate_term(pat), body)
        src = f"({render_term(lam)}) #t"
        if n % 2 == 0:
            J = C.elaborate(f"|- {src} : {render_type(BT)}", consts)
            want = Sequent((), (Connection(t, pat, PT),), (body, BT))
        else:
            J = C.elaborate(f"{src} : {render_type(BT)} |- 1:I", consts)
            want = Sequent(((body, BT),), (Connection(t, pat, PT).negate(),), (ONE, I))
        nf, _ = normalize(J)
        good += len(nf.soup) == 1 and nf == canonicalize(want)
    report(capsys, 9, "beta reduction residue", good == 100, f"{good}/100 leave exactly {{t:a}} or its negation")


def test_criterion_10_oracle_agreement(capsys):
    rng = np.random.default_rng(10)
    worst = 0.0
    agree = 0
    for _ in range(200):
        G = random_wire_graph(rng, max_total=4096)
        a, b = contract(G), contract_bruteforce(G)
        rel = float(np.max(np.abs(a - b), initial=0.0)) / (1 + float(np.max(np.abs(b), initial=0.0)))
        worst = max(worst, rel)
        agree += rel <= 1e-12
    report(capsys, 10, "model oracle agreement", agree == 200, f"{agree}/200, worst relative {worst:.1e}")


def test_criterion_11_round_trip(capsys):
    items = corpus(500, 0) + corpus(500, 1)
    bad = sum(parse_sequent(print_sequent(it.sequent), it.consts) != it.sequent for it in items)
    report(capsys, 11, "parse/print round trip", bad == 0 and len(items) == 1000,
           f"{len(items) - bad}/{len(items)} identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
