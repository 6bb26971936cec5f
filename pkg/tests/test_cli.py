"""Command-line interface: envelope shape, strict config handling,
format rendering, exit codes, and byte-level determinism.

Every test drives ``main(argv)`` in-process and inspects stdout/stderr
captured by pytest, so the assertions pin the exact serialized surface
(including the JSON envelope layout) rather than an approximation of it.
"""

import json
import math

import pytest

from mongecheck import __version__
from mongecheck.cli import AUDIT_NAMES, main

ENVELOPE_KEYS = {"tool_version", "config_echo", "results", "timing_ms"}
K_AT_INV_SQRT2 = 1.8540746773013719  # complete first kind at k = 1/sqrt(2)


def invoke(capsys, argv):
    """Run the CLI in-process and return (exit_code, stdout, stderr)."""
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def strip_timing(text):
    """Drop the wall-clock line so the rest can be compared byte-for-byte."""
    return "\n".join(l for l in text.splitlines() if '"timing_ms"' not in l)


def csv_rows(text):
    """Split rendered CSV into (header, data rows, '# ' summary lines)."""
    lines = text.splitlines()
    data = [l for l in lines[1:] if not l.startswith("# ")]
    summary = [l for l in lines[1:] if l.startswith("# ")]
    return lines[0], data, summary


# ---------------------------------------------------------------------------
# elliptic
# ---------------------------------------------------------------------------

def test_elliptic_envelope_shape_and_zero_modulus(capsys):
    code, out, err = invoke(capsys, ["elliptic", "F", "0.7", "0"])
    assert code == 0
    assert err == ""
    envelope = json.loads(out)
    assert set(envelope) == ENVELOPE_KEYS
    assert envelope["tool_version"] == __version__
    assert isinstance(envelope["timing_ms"], float)
    assert envelope["timing_ms"] >= 0.0
    assert envelope["config_echo"]["command"] == "elliptic"
    results = envelope["results"]
    # F(beta, 0) = beta
    assert results["value"] == pytest.approx(0.7, abs=1e-12)
    assert results["abs_error_estimate"] >= 0.0


def test_elliptic_complete_integral_frozen(capsys):
    code, out, _ = invoke(
        capsys, ["elliptic", "F", repr(math.pi / 2), repr(1 / math.sqrt(2))]
    )
    assert code == 0
    value = json.loads(out)["results"]["value"]
    assert value == pytest.approx(K_AT_INV_SQRT2, abs=1e-13)


def test_elliptic_arguments_from_config(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "elliptic",
        "elliptic": {"kind": "E", "beta": 0.9, "k": 0.5},
    })
    code, out, _ = invoke(capsys, ["elliptic", "--config", cfg])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["kind"] == "E"
    # E <= beta, with equality only at k = 0
    assert 0.0 < results["value"] < 0.9


def test_elliptic_modulus_one_exits_2(capsys):
    code, out, err = invoke(capsys, ["elliptic", "F", "0.5", "1.0"])
    assert code == 2
    assert out == ""
    assert err.startswith("error:")
    assert err.count("\n") == 1


def test_elliptic_missing_arguments_exit_2(capsys):
    code, _, err = invoke(capsys, ["elliptic", "F"])
    assert code == 2
    assert "beta" in err


def test_elliptic_out_file_copies_stdout(capsys, tmp_path):
    target = tmp_path / "value.json"
    code, out, _ = invoke(
        capsys, ["elliptic", "E", "0.3", "0.2", "--out", str(target)]
    )
    assert code == 0
    assert target.read_text(encoding="utf-8") == out


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------

def residual_config(tmp_path, solution, x, t, **extra):
    payload = {"command": "residual", "solution": solution,
               "grid": {"x": x, "t": t}}
    payload.update(extra)
    return write_config(tmp_path, payload)


def test_residual_closed_form_grid_t_major(capsys, tmp_path):
    cfg = residual_config(tmp_path, {"name": "fairlie", "a": 1.0},
                          [0.0, 1.0, 11], [0.0, 0.5, 11])
    code, out, _ = invoke(capsys, ["residual", "--config", cfg])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["points_evaluated"] == 121
    assert results["points_skipped"] == 0
    assert results["modes_used"] == ["finite_difference"]
    assert results["sup_abs_residual"] <= 1e-8
    rows = results["rows"]
    assert len(rows) == 121
    # t-major: the first block holds t = 0 while x sweeps 0 -> 1
    assert [r[1] for r in rows[:11]] == [0.0] * 11
    assert rows[0][0] == 0.0 and rows[10][0] == 1.0
    assert rows[11][1] == pytest.approx(0.05)


def test_residual_zero_solution_is_exactly_zero(capsys, tmp_path):
    cfg = residual_config(tmp_path, {"name": "zero"},
                          [-1.0, 1.0, 5], [0.0, 2.0, 4])
    code, out, _ = invoke(capsys, ["residual", "--config", cfg])
    assert code == 0
    assert json.loads(out)["results"]["sup_abs_residual"] == 0.0


def test_residual_linear_x_sup_is_max_x(capsys, tmp_path):
    # lam = x solves nothing: lam*lam_x - lam_t = x, so sup = max |x|
    cfg = residual_config(tmp_path, {"name": "linear-x"},
                          [0.0, 0.5, 6], [0.0, 0.2, 3])
    code, out, _ = invoke(capsys, ["residual", "--config", cfg])
    assert code == 0
    assert json.loads(out)["results"]["sup_abs_residual"] == pytest.approx(
        0.5, abs=1e-10)


def test_residual_entirely_invalid_grid_exits_2(capsys, tmp_path):
    # every t sits inside the fairlie guard band around t = 1
    cfg = residual_config(tmp_path, {"name": "fairlie", "a": 1.0, "delta": 0.2},
                          [0.0, 0.1, 2], [0.85, 0.95, 3])
    code, _, err = invoke(capsys, ["residual", "--config", cfg])
    assert code == 2
    assert "no valid grid points" in err


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def solve_config(tmp_path, x, t, **sections):
    payload = {"command": "solve", "grid": {"x": x, "t": t}}
    payload.update(sections)
    return write_config(tmp_path, payload)


def test_solve_whitham_affine_single_root(capsys, tmp_path):
    cfg = solve_config(tmp_path, [1.5, 1.5, 1], [0.5, 0.5, 1],
                       profile={"family": "affine", "a": 0.0, "b": 1.0})
    code, out, _ = invoke(capsys, ["solve", "--config", cfg])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["method"] == "whitham"
    assert results["breaking_time"] == pytest.approx(1.0, abs=1e-9)
    (point,) = results["points"]
    assert point["x"] == 1.5 and point["t"] == 0.5
    assert point["roots"] == pytest.approx([3.0], abs=1e-10)


def test_solve_flat_profile_root_at_zero(capsys, tmp_path):
    cfg = solve_config(tmp_path, [0.3, 0.3, 1], [1.7, 1.7, 1],
                       profile={"family": "affine", "a": 0.0, "b": 0.0})
    code, out, _ = invoke(capsys, ["solve", "--config", cfg])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["breaking_time"] is None
    assert results["points"][0]["roots"] == pytest.approx([0.0], abs=1e-12)


def test_solve_tanh_profile_three_roots_past_breaking(capsys, tmp_path):
    cfg = solve_config(tmp_path, [0.0, 0.0, 1], [2.0, 2.0, 1],
                       profile={"family": "tanh", "amplitude": 1.0, "scale": 1.0})
    code, out, _ = invoke(capsys, ["solve", "--config", cfg])
    assert code == 0
    roots = json.loads(out)["results"]["points"][0]["roots"]
    assert len(roots) == 3
    assert roots == sorted(roots)
    assert roots[1] == pytest.approx(0.0, abs=1e-10)
    # odd symmetry of tanh about x = 0
    assert roots[0] == pytest.approx(-roots[2], abs=1e-9)


def test_solve_leznov_identity_gauge(capsys, tmp_path):
    cfg = solve_config(tmp_path, [1.0, 1.0, 1], [1.0, 1.0, 1],
                       gauge={"coeffs": [0.0, 1.0]})
    code, out, _ = invoke(capsys, ["solve", "--config", cfg])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["method"] == "leznov"
    assert "breaking_time" not in results
    assert results["points"][0]["roots"] == pytest.approx([0.5], abs=1e-12)


def test_solve_requires_exactly_one_relation(capsys, tmp_path):
    both = solve_config(tmp_path, [0.0, 1.0, 2], [0.0, 0.5, 2],
                        profile={"family": "affine", "a": 0.0, "b": 1.0},
                        gauge={"coeffs": [0.0, 1.0]})
    code, _, err = invoke(capsys, ["solve", "--config", both])
    assert code == 2 and "exactly one" in err
    neither = solve_config(tmp_path, [0.0, 1.0, 2], [0.0, 0.5, 2])
    code, _, err = invoke(capsys, ["solve", "--config", neither])
    assert code == 2 and "exactly one" in err


# ---------------------------------------------------------------------------
# breaking-time
# ---------------------------------------------------------------------------

def test_breaking_time_affine(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "breaking-time",
        "profile": {"family": "affine", "a": 0.0, "b": 1.0},
    })
    code, out, _ = invoke(capsys, ["breaking-time", "--config", cfg])
    assert code == 0
    assert json.loads(out)["results"]["breaking_time"] == pytest.approx(
        1.0, abs=1e-9)


def test_breaking_time_decreasing_profile_is_null(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "breaking-time",
        "profile": {"family": "affine", "a": 0.0, "b": -1.0},
    })
    code, out, _ = invoke(capsys, ["breaking-time", "--config", cfg])
    assert code == 0
    assert json.loads(out)["results"]["breaking_time"] is None


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

def test_audit_all_report_order_and_gauge_sign(capsys):
    code, out, _ = invoke(capsys, ["audit"])
    assert code == 0
    results = json.loads(out)["results"]
    assert [r["audit_name"] for r in results["reports"]] == list(AUDIT_NAMES)
    for report in results["reports"]:
        assert set(report) == {"audit_name", "sup_deviation", "fitted_constants",
                               "worst_point", "samples_used", "verdict",
                               "tolerance_used"}
        assert report["verdict"] in ("consistent", "violated", "inconclusive")
    sign = results["leznov_sign_check"]
    assert sign["satisfied_sign"] == -1
    assert sign["sup_abs_residual_sign_minus"] <= 1e-10
    assert sign["sup_abs_residual_sign_plus"] > 0.1
    assert "elliptic_modulus_convention" in results["conventions"]


def test_audit_all_byte_deterministic(capsys):
    _, first, _ = invoke(capsys, ["audit", "all"])
    _, second, _ = invoke(capsys, ["audit", "all"])
    assert strip_timing(first) == strip_timing(second)
    # only the timing line may differ
    assert len(first.splitlines()) == len(strip_timing(first).splitlines()) + 1


def test_audit_single_name_skips_gauge_sign_check(capsys):
    code, out, _ = invoke(capsys, ["audit", "gradient-product"])
    assert code == 0
    results = json.loads(out)["results"]
    assert "leznov_sign_check" not in results
    assert [r["audit_name"] for r in results["reports"]] == ["gradient-product"]
    assert "conventions" in results


def test_audit_fail_on_violation_exit_codes(capsys):
    code, out, _ = invoke(capsys, ["audit", "antiderivative-first"])
    assert code == 0
    assert json.loads(out)["results"]["reports"][0]["verdict"] == "violated"
    code, _, _ = invoke(
        capsys, ["audit", "antiderivative-first", "--fail-on-violation"])
    assert code == 1
    code, out, _ = invoke(
        capsys, ["audit", "antiderivative-second", "--fail-on-violation"])
    assert code == 0
    assert json.loads(out)["results"]["reports"][0]["verdict"] == "consistent"


def test_audit_mixed_partials_zero_solution_consistent(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "audit",
        "audit": {"name": "mixed-partials"},
        "solution": {"name": "zero"},
        "grid": {"x": [0.0, 0.3, 4], "t": [0.0, 0.3, 4]},
    })
    code, out, _ = invoke(capsys, ["audit", "--config", cfg])
    assert code == 0
    report = json.loads(out)["results"]["reports"][0]
    assert report["verdict"] == "consistent"
    assert report["sup_deviation"] == 0.0


def test_audit_unknown_name_in_config_exits_2(capsys, tmp_path):
    cfg = write_config(tmp_path, {"command": "audit", "audit": {"name": "bogus"}})
    code, _, err = invoke(capsys, ["audit", "--config", cfg])
    assert code == 2
    assert "'bogus'" in err


def test_audit_unknown_parameter_key_exits_2(capsys, tmp_path):
    cfg = write_config(tmp_path, {"command": "audit", "audit": {"alpha": 1.0}})
    code, _, err = invoke(capsys, ["audit", "--config", cfg])
    assert code == 2
    assert "'alpha'" in err


# ---------------------------------------------------------------------------
# strict config handling
# ---------------------------------------------------------------------------

def test_unknown_top_level_key_is_named(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "residual",
        "solution": {"name": "zero"},
        "gird": {"x": [0.0, 1.0, 3], "t": [0.0, 1.0, 3]},
    })
    code, _, err = invoke(capsys, ["residual", "--config", cfg])
    assert code == 2
    assert "'gird'" in err


def test_command_mismatch_exits_2(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "solve",
        "solution": {"name": "zero"},
        "grid": {"x": [0.0, 1.0, 2], "t": [0.0, 1.0, 2]},
    })
    code, _, err = invoke(capsys, ["residual", "--config", cfg])
    assert code == 2
    assert "'solve'" in err and "'residual'" in err


def test_malformed_config_exits_2(capsys, tmp_path):
    not_object = tmp_path / "list.json"
    not_object.write_text("[1, 2]", encoding="utf-8")
    code, _, err = invoke(capsys, ["residual", "--config", str(not_object)])
    assert code == 2 and "JSON object" in err
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    code, _, err = invoke(capsys, ["residual", "--config", str(broken)])
    assert code == 2 and err.startswith("error:")


def test_config_echo_reproduces_run_byte_for_byte(capsys, tmp_path):
    cfg = residual_config(tmp_path, {"name": "fairlie", "a": 0.5},
                          [0.0, 0.4, 5], [0.0, 0.3, 4])
    code, first, _ = invoke(capsys, ["residual", "--config", cfg])
    assert code == 0
    echoed = write_config(tmp_path, json.loads(first)["config_echo"], "echo.json")
    code, second, _ = invoke(capsys, ["residual", "--config", echoed])
    assert code == 0
    assert strip_timing(first) == strip_timing(second)


# ---------------------------------------------------------------------------
# output formats
# ---------------------------------------------------------------------------

def test_csv_artifact_rows_summary_and_determinism(capsys, tmp_path):
    cfg = residual_config(tmp_path, {"name": "fairlie", "a": 1.0},
                          [0.0, 1.0, 3], [0.0, 0.5, 2])
    target = tmp_path / "rows.csv"
    code, out, _ = invoke(capsys, ["residual", "--config", cfg,
                                   "--format", "csv", "--out", str(target)])
    assert code == 0
    # the JSON envelope still lands on stdout when the CSV goes to a file
    assert json.loads(out)["config_echo"]["output"]["format"] == "csv"
    first = target.read_text(encoding="utf-8")
    header, data, summary = csv_rows(first)
    assert header == "x,t,lam,residual"
    assert len(data) == 6
    assert any(l.startswith("# sup_abs_residual=") for l in summary)
    assert any(l == "# points_skipped=0" for l in summary)
    invoke(capsys, ["residual", "--config", cfg,
                    "--format", "csv", "--out", str(target)])
    assert target.read_text(encoding="utf-8") == first


def test_csv_without_out_goes_to_stdout(capsys, tmp_path):
    cfg = residual_config(tmp_path, {"name": "zero"},
                          [0.0, 1.0, 2], [0.0, 1.0, 2])
    code, out, _ = invoke(capsys, ["residual", "--config", cfg,
                                   "--format", "csv"])
    assert code == 0
    assert out.startswith("x,t,lam,residual\n")


def test_plain_format_smoke(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "breaking-time",
        "profile": {"family": "affine", "a": 0.0, "b": 1.0},
    })
    code, out, _ = invoke(capsys, ["breaking-time", "--config", cfg,
                                   "--format", "plain"])
    assert code == 0
    assert out == "breaking_time = 1.0\n"
    cfg = solve_config(tmp_path, [1.5, 1.5, 1], [0.5, 0.5, 1],
                       profile={"family": "affine", "a": 0.0, "b": 1.0})
    code, out, _ = invoke(capsys, ["solve", "--config", cfg,
                                   "--format", "plain"])
    assert code == 0
    assert "roots=" in out and "breaking_time" in out


# ---------------------------------------------------------------------------
# plot-data
# ---------------------------------------------------------------------------

def test_plot_data_affine_profile_and_characteristics(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "plot-data",
        "profile": {"family": "affine", "a": 0.0, "b": 1.0},
        "plot": {"slices": [0.5], "x": [-1.0, 1.0, 5],
                 "xi": [-2.0, 2.0, 5], "t": [0.0, 1.0, 3]},
    })
    prefix = tmp_path / "affine"
    code, out, _ = invoke(capsys, ["plot-data", "--config", cfg,
                                   "--out", str(prefix)])
    assert code == 0
    results = json.loads(out)["results"]
    assert results["breaking_time"] == pytest.approx(1.0, abs=1e-9)
    assert results["empty_points"] == 0

    _, data, _ = csv_rows((tmp_path / "affine.profiles.csv").read_text())
    assert len(data) == results["profiles_rows"] == 5
    for line in data:
        t, x, branch, lam = line.split(",")
        assert float(t) == 0.5 and branch == "0"
        # single-valued regime: lam = x / (1 - t) = 2 x
        assert float(lam) == pytest.approx(2.0 * float(x), abs=1e-10)

    header, data, _ = csv_rows((tmp_path / "affine.characteristics.csv").read_text())
    assert header == "xi,t,x"
    assert len(data) == results["characteristics_rows"] == 15
    for line in data:
        xi, t, x = (float(v) for v in line.split(","))
        # straight-line characteristic x = xi - G(xi) t with G(xi) = xi
        assert x == pytest.approx(xi * (1.0 - t), abs=1e-14)


def test_plot_data_tanh_slice_is_multivalued(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "plot-data",
        "profile": {"family": "tanh", "amplitude": 1.0, "scale": 1.0},
        "plot": {"slices": [2.0], "x": [-1.0, 1.0, 21],
                 "xi": [-1.0, 1.0, 3], "t": [0.0, 1.0, 2]},
    })
    prefix = tmp_path / "tanh"
    code, out, _ = invoke(capsys, ["plot-data", "--config", cfg,
                                   "--out", str(prefix)])
    assert code == 0
    _, data, _ = csv_rows((tmp_path / "tanh.profiles.csv").read_text())
    branches = set()
    for line in data:
        t, x, branch, lam = line.split(",")
        branches.add(int(branch))
        # each listed branch satisfies the implicit relation lam = G(x + lam t)
        residual = float(lam) - math.tanh(float(x) + float(lam) * float(t))
        assert abs(residual) <= 1e-9
    assert branches == {0, 1, 2}
    assert len(data) == json.loads(out)["results"]["profiles_rows"]


def test_plot_data_requires_out_prefix(capsys, tmp_path):
    cfg = write_config(tmp_path, {
        "command": "plot-data",
        "profile": {"family": "affine", "a": 0.0, "b": 1.0},
    })
    code, _, err = invoke(capsys, ["plot-data", "--config", cfg])
    assert code == 2
    assert "--out" in err
