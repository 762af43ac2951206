import pytest
from hypothesis import given, settings

from daggerlc.rewrite import (
    RewriteError,
    enumerate_redexes,
    is_normal,
    normal_form,
    normalize,
    reduction_graph,
    soup_equiv,
    step,
    step_bound,
)
from daggerlc.surface import parse_sequent
from daggerlc.syntax import I, alpha_equiv, expand, validate

from strategies import corpus_items

TELEPORT = "x1:T |- { x1 @ x2^ @ 1 : x4 @ x4^ @ 1, 1 @ x5^ @ x5 : 1 @ x2^ @ x3 } x3:T"
SCALARS = {k: I for k in "abcmn"}


def kinds(J):
    return {r.kind for r in enumerate_redexes(expand(J))}


def test_each_rule_fires():
    assert "bifunctor" in kinds(parse_sequent("a:A, b:B |- { a @ b : c @ d } c @ d : A @ B"))
    assert "trace" in kinds(parse_sequent("|- { x :[A] x } 1:I"))
    assert "cancel" in kinds(parse_sequent("|- { 1 : 1 } 1:I"))
    assert "product-split" in kinds(parse_sequent("|- { #a . #b : 1 } 1:I", SCALARS))
    assert {"consume-left", "consume-right"} <= kinds(parse_sequent("x:A |- { x : y } y:A"))


def test_trace_yields_dimension():
    nf = normal_form(parse_sequent("|- { x :[A @ B] x } 1:I"))
    assert nf == normal_form(parse_sequent("|- { D[A] . D[B] : 1 } 1:I"))


def test_constants_are_never_dropped():
    J = parse_sequent("a:A |- { #f : a^ @ b } b:B")
    assert is_normal(J)


def test_teleport_normal_form_and_length():
    J = parse_sequent(TELEPORT)
    nf, trace = normalize(J)
    assert alpha_equiv(nf, parse_sequent("x:T |- x:T"))
    assert len(trace) == 10 <= step_bound(expand(J))


def test_teleport_trace_passes_through_published_states():
    # after splitting the cap, x1 is joined to x4 and 1 to 1
    J = expand(parse_sequent(TELEPORT))
    r = next(r for r in enumerate_redexes(J) if r.kind == "bifunctor" and "x4" in str(r.target))
    K = step(J, r)
    assert any(c.type == I for c in K.soup)


def test_disabled_redex_is_rejected():
    J = parse_sequent("x:A |- { x : y } y:A")
    K = step(J, enumerate_redexes(J)[0])
    with pytest.raises(RewriteError):
        step(K, enumerate_redexes(J)[0])


def test_scalar_lemmas():
    eq = lambda a, b: soup_equiv(parse_sequent(a, SCALARS), parse_sequent(b, SCALARS))
    assert eq("|- { (#a . #b) . #c : 1 } 1:I", "|- { #a . (#b . #c) : 1 } 1:I")
    assert eq("|- { #m . #n : 1 } 1:I", "|- { #n . #m : 1 } 1:I")
    assert eq("|- { #m : #n } 1:I", "|- { #m . #n^ : 1 } 1:I")
    assert eq("|- { D[A] . D[B] : 1 } 1:I", "|- { D[A @ B] : 1 } 1:I")
    assert not eq("|- { #m : 1 } 1:I", "|- { #n : 1 } 1:I")
    assert not eq("|- { #m : #n } 1:I", "|- { #m . #n : 1 } 1:I")


def test_single_sink_on_teleport():
    g = reduction_graph(parse_sequent(TELEPORT))
    assert len(g.sinks()) == 1


@settings(max_examples=60, deadline=None)
@given(corpus_items)
def test_subject_reduction(item):
    J = expand(item.sequent)
    ctx, concl = [T for _, T in J.context], J.conclusion[1]
    for r in enumerate_redexes(J):
        K = step(J, r)
        validate(K, item.consts)
        assert [T for _, T in K.context] == ctx and K.conclusion[1] == concl


@settings(max_examples=60, deadline=None)
@given(corpus_items)
def test_random_strategies_agree(item):
    nf, trace = normalize(item.sequent)
    assert len(trace) <= step_bound(expand(item.sequent))
    for seed in range(3):
        assert normalize(item.sequent, "random", seed)[0] == nf


@settings(max_examples=60, deadline=None)
@given(corpus_items)
def test_normal_form_is_normal_and_idempotent(item):
    nf = normal_form(item.sequent)
    assert is_normal(nf)
    assert normal_form(nf) == nf
