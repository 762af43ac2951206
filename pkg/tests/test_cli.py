import pytest

from daggerlc.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_check_ok(capsys, examples):
    code, out = run(capsys, "check", examples / "teleport.dlc", examples / "alpha_bundle_a.dlc")
    assert code == 0 and out.count("ok ") == 2


def test_check_derivation(capsys, examples):
    code, out = run(capsys, "check", examples / "lollipop_elim.dprf")
    assert code == 0
    assert "node 1 OK t:A, f:(A^ @ B) |- { (b^ @ t) : f^ } b:B" in out


def test_check_nonlinear_names_variable(capsys, examples):
    code, out = run(capsys, "check", examples / "nonlinear.dlc")
    assert code == 1 and "x:3" in out and "nonlinear.dlc:1" in out


def test_parse_error_is_unusable_input(capsys, tmp_path):
    p = tmp_path / "bad.dlc"
    p.write_text("x:A |- x:\n")
    code, out = run(capsys, "check", p)
    assert code == 2 and "bad.dlc:1" in out


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "check", tmp_path / "nope.dlc")[0] == 2


def test_normalize_teleport(capsys, examples):
    code, out = run(capsys, "normalize", examples / "teleport.dlc")
    assert code == 0 and out.strip() == "v1:T |- v1:T"


def test_normalize_trace_format(capsys, examples):
    code, out = run(capsys, "normalize", "--trace", examples / "teleport.dlc")
    lines = out.splitlines()
    assert lines[1].startswith("step 1 bifunctor ")
    assert "steps 10" in lines and lines[-1] == "v1:T |- v1:T"


def test_normalize_already_normal(capsys, tmp_path):
    p = tmp_path / "n.dlc"
    p.write_text("y:A |- y:A\n")
    code, out = run(capsys, "normalize", "--trace", p)
    assert "steps 0" in out and out.splitlines()[-1] == "v1:A |- v1:A"


def test_normalize_random_strategy_is_reproducible(capsys, examples):
    a = run(capsys, "normalize", "--trace", "--strategy", "random", "--seed", "4", examples / "teleport.dlc")
    b = run(capsys, "normalize", "--trace", "--strategy", "random", "--seed", "4", examples / "teleport.dlc")
    assert a == b


def test_scalars_commutativity_pair(capsys, examples):
    code, out = run(capsys, "normalize", "--sig", examples / "scalars.dsig", examples / "scalars.dlc")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 8
    assert all(lines[k] == lines[k + 1] for k in range(0, 8, 2))


@pytest.mark.parametrize(
    "a,b,code",
    [
        ("alpha_bundle_a.dlc", "alpha_bundle_b.dlc", 0),
        ("alpha_constant_a.dlc", "alpha_constant_b.dlc", 0),
        ("identity_AA.dlc", "swap_AA.dlc", 1),
        ("teleport.dlc", "teleport.dlc", 0),
    ],
)
def test_equiv(capsys, examples, a, b, code):
    assert run(capsys, "equiv", examples / a, examples / b)[0] == code


def test_interp_teleport(capsys, examples):
    code, out = run(capsys, "interp", "--verify-steps", "--sig", examples / "teleport.dsig", examples / "teleport.dlc")
    assert code == 0
    assert "shape 2x2\n[[1+0i, 0+0i],\n [0+0i, 1+0i]]" in out
    assert out.count("preserved") == 10


def test_interp_dimension(capsys, examples):
    code, out = run(capsys, "interp", "--sig", examples / "dimension.dsig", examples / "dimension.dlc")
    assert code == 0 and out.splitlines()[-1] == "3+0i"


def test_interp_symbolic_only(capsys, examples):
    code, out = run(capsys, "interp", "--sig", examples / "unvalued.dsig", examples / "const.dlc")
    assert code == 2 and "symbolic only" in out


def test_axioms(capsys):
    code, out = run(capsys, "axioms", "--dims", "2", "3")
    assert code == 0 and out.count("PASS") == 9


def test_axioms_corrupted_signature(capsys, tmp_path):
    p = tmp_path / "bad.dsig"
    p.write_text("type A dim 2\ntype B dim 2\nconst f : A^ @ B = [1+0i, 2+0i]\n")
    code, out = run(capsys, "axioms", "--sig", p)
    assert code == 2 and "shape" in out


def test_output_is_deterministic(capsys, examples):
    args = ("normalize", "--trace", examples / "teleport_combinators.dlc")
    assert run(capsys, *args) == run(capsys, *args)


def test_color_toggle(capsys, examples, monkeypatch):
    monkeypatch.setenv("DLC_COLOR", "1")
    _, out = run(capsys, "check", examples / "teleport.dlc")
    assert "\x1b[32m" in out
    monkeypatch.setenv("DLC_COLOR", "0")
    _, out = run(capsys, "check", examples / "teleport.dlc")
    assert "\x1b[" not in out
