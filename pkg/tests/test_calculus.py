import pytest
from hypothesis import given, settings

from daggerlc import calculus as C
from daggerlc.rewrite import normal_form, soup_equiv
from daggerlc.surface import parse_derivation, parse_sequent, parse_type
from daggerlc.syntax import I, Atom, Var, alpha_equiv, canonicalize, validate

from strategies import corpus_items

A, B, T = Atom("A"), Atom("B"), Atom("T")
F = {"f": parse_type("A^ @ B")}


def f_seq():
    return C.rule_const("f", A, B)


def test_id_and_const():
    assert str(C.rule_id("x", A)) == "x:A |- x:A"
    assert str(f_seq()) == "a:A |- { #f : (a^ @ b) } b:B"


def test_cut_joins_conclusion_to_first_hypothesis():
    J = C.rule_cut(C.rule_id("x", A), C.rule_id("y", A))
    assert alpha_equiv(J, parse_sequent("x:A |- { x : y } y:A"))


def test_cut_checks_types_and_disjointness():
    with pytest.raises(C.RuleError):
        C.rule_cut(C.rule_id("x", A), C.rule_id("y", B))
    with pytest.raises(C.RuleError):
        C.rule_cut(C.rule_id("x", A), C.rule_id("x", A))


def test_tensor_right_bundles_second_context():
    J = C.rule_tensor_r(C.rule_id("a", A), C.rule_tensor_l(C.rule_tensor_r(C.rule_id("b", B), C.rule_id("c", T)), 0))
    assert len(J.context) == 2 and J.conclusion[1] == parse_type("A @ (B @ T)")


def test_curry_uncurry_round_trip():
    J = f_seq()
    assert C.rule_uncurry(C.rule_curry(J)) == J


def test_curry_of_scalar_conclusion_is_shorthand():
    # a^:A^, a:A |- 1:I curries to a:A |- a:A rather than a:A |- a @ 1
    J = C.rule_uncurry(C.rule_tensor_r(C.rule_id("a", A), C.rule_one()))
    K = C.rule_curry(J)
    assert K.conclusion == (Var("a"), A) and K.context == ((Var("a"), A),)


def test_uncurry_needs_tensor():
    with pytest.raises(C.RuleError):
        C.rule_uncurry(C.rule_id("a", A))


def test_unit_rules_are_inverse():
    J = parse_sequent("|- { #s : 1 } 1:I", {"s": I})
    J = C.rule_tensor_r(J, C.rule_id("y", A))
    K = C.rule_unit_left_inv(C.rule_unit_left(J))
    assert K == J


def test_exchange_and_tensor_left():
    J = C.rule_tensor_r(C.rule_id("a", A), C.rule_id("b", B))
    assert [T for _, T in C.rule_exchange(J, 0).context] == [B, A]
    assert C.rule_untensor_l(C.rule_tensor_l(J, 0), 0) == J


def test_lollipop_elimination_derivation(examples):
    d = C.check_derivation(parse_derivation((examples / "lollipop_elim.dprf").read_text()))
    want = parse_sequent("t:A, f:A^ @ B |- { f : t^ @ b } b:B")
    assert alpha_equiv(d.conclusion, want)
    assert d.report().splitlines()[-1].startswith("node 1 OK")


def test_dagger_flip_macro_matches_published_conclusion():
    want = parse_sequent("b:B |- { #f^ : b^ @ a } a:A", F)
    assert alpha_equiv(C.dagger_flip_macro(f_seq()), want)
    assert C.dagger_flip(f_seq()) == C.dagger_flip_macro(f_seq())


def test_derivation_failure_reports_node():
    with pytest.raises(C.DerivationError) as err:
        C.check_derivation(parse_derivation("(cut (id a A) (uncurry (id b B)))"))
    assert err.value.path == "1.2"


def test_step_direction_is_relative_to_written_connection():
    d = "(step (cut (id x A) (id y A)) consume-left \"x : y\")"
    J = C.check_derivation(parse_derivation(d)).conclusion
    assert J == parse_sequent("x:A |- x:A")
    d = "(step (cut (id x A) (id y A)) consume-right \"x : y\")"
    assert C.check_derivation(parse_derivation(d)).conclusion == parse_sequent("y:A |- y:A")


def test_application_sugar():
    J = C.elaborate("t:A, f:A -o B |- f t : B")
    assert alpha_equiv(J, parse_sequent("t:A, f:A^ @ B |- { f : t^ @ x } x:B"))


def test_application_in_context_uses_negated_connection():
    J = C.elaborate(r"(\a => a) t : A |- t:A")
    validate(J)
    assert alpha_equiv(normal_form(J), parse_sequent("x:A |- x:A"))


def test_beta_identity():
    assert alpha_equiv(normal_form(C.elaborate(r"t:A |- (\a => a) t : A")), parse_sequent("x:A |- x:A"))


@pytest.mark.parametrize(
    "name,types,shape",
    [
        ("id", "A", "A -o A"),
        ("sbar", "A,B", "A @ B -o B @ A"),
        ("bbar", "A,B,T", "(B -o T) -o (A -o B) -o A -o T"),
        ("tbar", "A,B,T,A", "(A -o T) -o (B -o A) -o A @ B -o T @ A"),
        ("eta", "A", "I -o A^ @ A"),
        ("epsilon", "A", "A @ A^ -o I"),
    ],
)
def test_combinator_types(name, types, shape):
    J = C.combinator(name, *(parse_type(t) for t in types.split(",")))
    validate(J)
    assert not J.context and J.conclusion[1] == parse_type(shape)


def test_combinator_application_composes():
    J = C.elaborate(r"x:A, g:B -o T, f:A -o B |- $bbar[A,B,T] g f x : T")
    direct = C.elaborate("x:A, g:B -o T, f:A -o B |- g (f x) : T")
    assert soup_equiv(J, direct)


def test_consistency():
    i = C.combinator("id", parse_type("A @ A"))
    s = C.combinator("sbar", A, A)
    assert normal_form(i) == canonicalize(i) and normal_form(s) == canonicalize(s)
    assert not soup_equiv(i, s)


def test_dagger_of_morphism_is_adjoint():
    sigma = C.morphism("sigma", A, B)
    assert soup_equiv(C.dagger_flip(sigma), C.morphism("sigma", B, A))


@settings(max_examples=80, deadline=None)
@given(corpus_items)
def test_negation_is_involutive_up_to_alpha(item):
    J = item.sequent
    if len(J.context) != 1:
        return
    assert alpha_equiv(C.rule_negation(C.rule_negation(J)), J)
    assert alpha_equiv(C.dagger_flip(C.dagger_flip(J)), J)
    assert alpha_equiv(C.negation_via_dagger(J), C.rule_negation(J))
    assert alpha_equiv(C.dagger_flip_macro(J), C.dagger_flip(J))
