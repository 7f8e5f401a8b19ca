import io
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from hilferbvp.bvp import LinearSolution, eta_values
from hilferbvp.calculus import (
    GridFunction,
    OrderParams,
    caputo_hadamard_derivative,
    hadamard_derivative,
    hilfer_hadamard_derivative,
)
from hilferbvp.cli import (
    ConfigError,
    bundled_config_text,
    main,
    parse_config,
    read_solution_csv,
    write_solution_csv,
)
from hilferbvp.fixed_point import frozen_forcing, picard_solve

BASE = """\
alpha = 1.5
beta = 0.5
epsilon = 0.2
nu = 0.5
zeta = 1.5
"""


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def keys(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


@pytest.fixture
def write_cfg(tmp_path):
    def write(text, name="p.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


# {{{ config parsing


def test_parse_bundled():
    cfg = parse_config(bundled_config_text())
    assert (cfg.alpha, cfg.beta, cfg.epsilon, cfg.nu, cfg.zeta) == (1.5, 0.5, 0.2, 0.5, 1.5)
    assert cfg.lipschitz_c == 0.0625
    assert cfg.published_phi == 1.404
    assert cfg.grid_points == 201


def test_defaults():
    cfg = parse_config(BASE + "rhs = 0\n")
    assert cfg.grid_points == 201 and cfg.s_min == 1e-3 and cfg.quad_nodes == 32
    assert cfg.tol == 1e-10 and cfg.max_iter == 200
    assert cfg.lipschitz_c is None and cfg.mu is None


def test_constant_expression_values():
    cfg = parse_config(BASE.replace("0.2", "exp(1)/10") + "rhs = x\nlipschitz_c = 1/16\n")
    assert cfg.epsilon == math.e / 10
    assert cfg.lipschitz_c == 0.0625


@pytest.mark.parametrize(
    "text, field, line",
    [
        (BASE, "rhs", None),
        (BASE + "rhs = 0\nfoo = 1\n", "foo", 7),
        (BASE + "rhs = 0\nalpha = 1.2\n", "alpha", 7),
        (BASE + "rhs = 0\ngrid_points = 2.5\n", "grid_points", 7),
        (BASE + "rhs = 0\ntol = t\n", "tol", 7),
        (BASE + "rhs = 0\nlipschitz_c = -1\n", "lipschitz_c", 7),
        (BASE + "rhs = log(\n", "rhs", 6),
        (BASE + "rhs = 0\njunk line\n", None, 7),
        (BASE.replace("1.5\n", "2.5\n", 1) + "rhs = 0\n", "alpha", 1),
    ],
)
def test_config_errors_name_the_field(text, field, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text).to_spec()
    if field is not None:
        assert info.value.field_name == field
        assert field in str(info.value)
    if line is not None:
        assert info.value.line == line


# }}}


# {{{ solve


def test_solve_zero_rhs(tmp_path, write_cfg):
    out = tmp_path / "out"
    code, text = run("solve", write_cfg(BASE + "rhs = 0\n"), "--out", str(out))
    assert code == 0
    k = keys(text)
    assert k["converged"] == "true"
    assert k["iterations"] == "1"
    t, s, x = read_solution_csv(out / "solution.csv")
    assert np.all(x == 0.0)
    np.testing.assert_allclose(np.log(t), s, rtol=1e-12)
    assert (out / "solution.csv").read_text().splitlines()[0] == "t,log_t,x"


def test_solve_bundled(tmp_path, write_cfg):
    out = tmp_path / "out"
    code, text = run("solve", write_cfg(bundled_config_text()), "--out", str(out))
    assert code == 0
    k = keys(text)
    assert k["converged"] == "true"
    assert k["verdict.contraction"] == "holds"
    assert float(k["c_phi"]) == pytest.approx(0.3462653957331716, rel=1e-12)
    assert float(k["residual_sup"]) <= 1e-4


def test_solve_refuses_overwrite(tmp_path, write_cfg):
    cfg = write_cfg(BASE + "rhs = t\n")
    out = str(tmp_path / "out")
    assert run("solve", cfg, "--out", out)[0] == 0
    assert run("solve", cfg, "--out", out)[0] == 1
    assert run("solve", cfg, "--out", out, "--force")[0] == 0


def test_solve_range_violation(tmp_path, write_cfg, capsys):
    code, _ = run("solve", write_cfg(BASE.replace("nu = 0.5", "nu = 1.5") + "rhs = 0\n"),
                  "--out", str(tmp_path / "out"))
    assert code == 1
    err = capsys.readouterr().err
    assert "nu" in err and "[0, 1)" in err
    assert not (tmp_path / "out").exists()


def test_solve_degenerate(tmp_path, write_cfg):
    p = OrderParams(1.2, 0.0)
    nu = brentq(lambda v: eta_values(p, 0.5, v, 2.0)[2], 0.0, 0.99)
    text = f"alpha = 1.2\nbeta = 0\nepsilon = 0.5\nnu = {nu!r}\nzeta = 2\nrhs = 1\n"
    assert run("solve", write_cfg(text), "--out", str(tmp_path / "o"))[0] == 2


def test_solve_not_converged(tmp_path, write_cfg):
    text = BASE + "rhs = -3*x + 1\nmax_iter = 3\n"
    out = tmp_path / "out"
    code, text_out = run("solve", write_cfg(text), "--out", str(out))
    assert code == 3
    assert keys(text_out)["converged"] == "false"
    assert (out / "solution.csv").exists()


def test_solve_rhs_not_evaluable(tmp_path, write_cfg):
    assert run("solve", write_cfg(BASE + "rhs = log(x)\n"), "--out", str(tmp_path / "o"))[0] == 1


def test_csv_round_trip(tmp_path):
    s = np.linspace(1e-3, 1.0, 50)
    x = GridFunction(s, np.sin(7 * s) / 3.0)
    path = tmp_path / "x.csv"
    write_solution_csv(path, x)
    t, s2, v = read_solution_csv(path)
    np.testing.assert_array_equal(s2, x.s_values)
    np.testing.assert_array_equal(v, x.values)
    np.testing.assert_array_equal(t, x.t_values)


# }}}


# {{{ certify


def test_certify_bundled(write_cfg):
    code, text = run("certify", write_cfg(bundled_config_text()))
    assert code == 0
    k = keys(text)
    assert float(k["computed_phi"]) == pytest.approx(5.540246331730741, rel=1e-14)
    assert k["paper_phi"] == "1.404"
    assert k["phi_discrepancy"] == "true"
    assert k["phi.agrees"] == "false"
    assert k["c_phi_discrepancy"] == "true"
    assert k["verdict.contraction"] == "holds"
    assert k["verdict.bounded_rhs"] == "not-evaluable"


def test_certify_missing_lipschitz(write_cfg):
    code, text = run("certify", write_cfg(BASE + "rhs = sin(x)/4\n"))
    assert code == 0
    k = keys(text)
    assert k["verdict.contraction"] == "not-evaluable"
    assert k["c_phi"] == "none"
    assert 0.0 < float(k["lipschitz_c_estimate"]) <= 0.25
    assert k["lipschitz_c_estimate.rigorous"] == "false"


def test_certify_all_inputs(write_cfg):
    text = BASE + "rhs = x/10\nlipschitz_c = 0.1\nbound_c1 = 1\nmu = 0.1\n"
    k = keys(run("certify", write_cfg(text))[1])
    assert k["verdict.contraction"] == "holds"
    assert k["verdict.bounded_rhs"] == "holds"
    assert k["verdict.sublinear"] == "holds"
    assert k["c2"] == k["m"]


def test_certify_unit_left_point_is_rejected(write_cfg):
    # log(1 + eps) = 1 needs eps = e - 1, outside (0, 1)
    text = BASE.replace("0.2", "exp(1) - 1").replace("beta = 0.5", "beta = 1").replace(
        "nu = 0.5", "nu = 0"
    )
    assert run("certify", write_cfg(text + "rhs = 0\n"))[0] == 1


# }}}


# {{{ sweep


def sweep_rows(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "param_value,phi,c_phi,iterations,x_at_e"
    return [line.split(",") for line in lines[1:]]


def test_sweep_beta_endpoints(tmp_path, write_cfg):
    cfg_text = BASE + "rhs = 1 + x/100\nlipschitz_c = 0.01\n"
    out = tmp_path / "out"
    code, _ = run("sweep", write_cfg(cfg_text), "--param", "beta", "--from", "0", "--to", "1",
                  "--steps", "11", "--out", str(out))
    assert code == 0
    rows = sweep_rows(out / "sweep.csv")
    assert len(rows) == 11
    assert float(rows[0][0]) == 0.0 and float(rows[-1][0]) == 1.0

    cfg = parse_config(cfg_text)
    t = np.exp(np.linspace(0.3, 1.0, 6))
    closed = {}
    for row, beta in ((rows[0], 0.0), (rows[-1], 1.0)):
        spec = parse_config(cfg_text.replace("beta = 0.5", f"beta = {beta}")).to_spec()
        rep = picard_solve(spec, grid=cfg.grid(spec), compute_residual=False)
        assert float(row[4]) == rep.solution.values[-1]
        closed[beta] = (spec, rep.solution,
                        LinearSolution(spec, frozen_forcing(spec.rhs, rep.solution)))

    # beta = 0 is the Hadamard problem
    spec, x, sol = closed[0.0]
    np.testing.assert_allclose(
        hilfer_hadamard_derivative(spec.orders, sol, t), hadamard_derivative(1.5, sol, t),
        rtol=1e-9, atol=1e-9,
    )
    # beta = 1 is the Caputo-Hadamard problem
    spec, x, sol = closed[1.0]
    r = caputo_hadamard_derivative(1.5, sol, t) + spec.rhs(t, x(t))
    assert np.max(np.abs(r)) <= 1e-5


def test_sweep_single_step_matches_solve_and_certify(tmp_path, write_cfg):
    cfg = write_cfg(bundled_config_text())
    out = tmp_path / "sweep"
    assert run("sweep", cfg, "--param", "nu", "--from", "0.5", "--to", "0.9", "--steps", "1",
               "--out", str(out))[0] == 0
    rows = sweep_rows(out / "sweep.csv")
    assert len(rows) == 1

    _, solve_text = run("solve", cfg, "--out", str(tmp_path / "solve"))
    _, cert_text = run("certify", cfg)
    s, c = keys(solve_text), keys(cert_text)
    x = read_solution_csv(tmp_path / "solve" / "solution.csv")[2]
    assert rows[0][1] == c["computed_phi"]
    assert rows[0][2] == c["c_phi"]
    assert rows[0][3] == s["iterations"]
    assert float(rows[0][4]) == x[-1]


@pytest.mark.parametrize("param, lo, hi", [("alpha", 1.9, 2.1), ("nu", 0.5, 1.0),
                                           ("epsilon", 0.0, 0.5)])
def test_sweep_rejects_range_exit(tmp_path, write_cfg, param, lo, hi):
    code, _ = run("sweep", write_cfg(BASE + "rhs = 0\n"), "--param", param, "--from", str(lo),
                  "--to", str(hi), "--steps", "3", "--out", str(tmp_path / "o"))
    assert code == 1
    assert not (tmp_path / "o").exists()


# }}}


# {{{ verify and example


def test_verify_quick():
    code, text = run("verify", "--level", "quick")
    assert code == 0
    assert "monomial" in text and "semigroup" in text
    assert keys(text)["verify"] == "pass"


def test_verify_gamma_fault():
    assert run("verify", "--level", "quick", "--gamma-fault", "0.01")[0] == 4
    # the fault is undone afterwards
    assert run("verify", "--level", "quick")[0] == 0


def test_example_prints_bundled_config():
    code, text = run("example")
    assert code == 0
    assert text == bundled_config_text()


# }}}
