import json

from cmfield.cli import main
from cmfield.numerics import IntPoly


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv, "--json")
    return code, json.loads(out) if out else None, err


def test_forms_minus3(capsys):
    code, out, _ = run_cli(capsys, "forms", "--disc", "-3")
    assert code == 0
    assert "(1,1,1)" in out
    assert "class_number: 1" in out


def test_forms_json_envelope(capsys):
    code, env, _ = run_json(capsys, "forms", "--disc", "-71")
    assert code == 0
    assert env["command"] == "forms"
    assert env["inputs"] == {"disc": -71}
    assert env["outputs"]["class_number"] == 7
    assert set(env) == {"command", "inputs", "outputs", "precision_bits", "wall_time_s", "version"}


def test_form_as_discriminant_input(capsys):
    code, env, _ = run_json(capsys, "forms", "--disc", "6,1,1")
    assert code == 0
    assert env["inputs"]["disc"] == -23


def test_invalid_discriminant_exit_code(capsys):
    code, out, err = run_cli(capsys, "forms", "--disc", "-5")
    assert code == 2
    assert "error" in err


def test_invalid_subcommand_exit_code(capsys):
    assert main(["bogus"]) == 2


def test_classgroup(capsys):
    code, env, _ = run_json(capsys, "classgroup", "--disc", "-84")
    assert env["outputs"]["invariant_factors"] == [2, 2]


def test_rayclass(capsys):
    code, env, _ = run_json(capsys, "rayclass", "--disc", "-4", "--mod", "5")
    assert env["outputs"]["order"] == 4


def test_conductor(capsys):
    code, env, _ = run_json(capsys, "conductor", "--disc", "-4", "--mod", "5", "--subgroup", "")
    assert env["outputs"]["conductor"] == 5
    assert env["outputs"]["relative_discriminant_exponents"] == {"5": 3}


def test_eval_j_at_i(capsys):
    code, out, _ = run_cli(capsys, "eval", "--fn", "j", "--tau", "1i", "--bits", "96")
    assert code == 0
    assert "1728" in out


def test_eval_wp_needs_z(capsys):
    code, _, err = run_cli(capsys, "eval", "--fn", "wp", "--tau", "2i")
    assert code == 2


def test_eval_rejects_lower_half_plane(capsys):
    code, _, err = run_cli(capsys, "eval", "--fn", "eta", "--tau", "-2i")
    assert code == 2


def test_hilbert_envelope_minus71(capsys):
    code, env, _ = run_json(capsys, "hilbert", "--disc", "-71")
    coeffs = env["outputs"]["polynomial"]["coefficients"]
    assert coeffs[0] == "737707086760731113357714241006081263"
    assert len(coeffs) == 8
    assert env["precision_bits"] >= 120


def test_text_polynomial_reparses_to_json_coefficients(capsys):
    code, env, _ = run_json(capsys, "hilbert", "--disc", "-15")
    coeffs = tuple(int(c) for c in env["outputs"]["polynomial"]["coefficients"])
    assert env["outputs"]["polynomial"]["pretty"] == str(IntPoly(coeffs))


def test_json_determinism(capsys):
    _, env1, _ = run_json(capsys, "hilbert", "--disc", "-23")
    _, env2, _ = run_json(capsys, "hilbert", "--disc", "-23")
    env1.pop("wall_time_s")
    env2.pop("wall_time_s")
    assert env1 == env2


def test_verify_table(capsys):
    code, env, _ = run_json(capsys, "verify", "--disc", "-15", "--primes", "8")
    assert env["outputs"]["all_agree"] is True
    assert len(env["outputs"]["table"]) == 8


def test_divpoly_symbolic_and_specialized(capsys):
    code, env, _ = run_json(capsys, "divpoly", "--m", "3")
    assert env["outputs"]["T"]["coefficients"] == ["-a^2", "12*b", "6*a", "0", "3"]
    code, env, _ = run_json(capsys, "divpoly", "--m", "3", "--spec", "1,1")
    assert env["outputs"]["T"]["coefficients"] == ["-1", "12", "6", "0", "3"]


def test_raypoly(capsys):
    code, env, _ = run_json(capsys, "raypoly", "--disc", "-7", "--mod", "3")
    assert env["outputs"]["degree"] == 4
    assert env["outputs"]["polynomial"]["type"] == "quadratic-integer"


def test_raypoly_rejects_h_gt_one(capsys):
    code, _, err = run_cli(capsys, "raypoly", "--disc", "-23", "--mod", "3")
    assert code == 2


def test_invariant_check_only(capsys):
    code, env, _ = run_json(capsys, "invariant", "--fn", "f2", "--disc", "-71", "--check-only")
    assert env["outputs"]["invariant"] is True
    assert "polynomial" not in env["outputs"]


def test_invariant_full(capsys):
    code, env, _ = run_json(capsys, "invariant", "--fn", "f2", "--disc", "-71")
    coeffs = [int(c) for c in env["outputs"]["polynomial"]["coefficients"]]
    assert len(coeffs) == 8
    assert coeffs[-1] == 1


def test_env_default_bits(capsys, monkeypatch):
    monkeypatch.setenv("CCF_DEFAULT_BITS", "128")
    code, env, _ = run_json(capsys, "eval", "--fn", "eta", "--tau", "2i")
    assert env["inputs"]["bits"] == 128
    monkeypatch.setenv("CCF_DEFAULT_BITS", "junk")
    code, _, err = run_cli(capsys, "eval", "--fn", "eta", "--tau", "2i")
    assert code == 2


def test_threads_flag_accepted(capsys):
    code, env, _ = run_json(capsys, "--threads", "4", "forms", "--disc", "-3")
    assert code == 0
