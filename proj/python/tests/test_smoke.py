import math
import os
import struct
import subprocess

import numpy as np
import pytest

import rwsdetect as rd


def test_mp_law_and_quantiles():
    law = rd.MPLaw(1.2)
    assert law.edge_plus == pytest.approx((1 + math.sqrt(1.2)) ** 2)
    assert law.cdf(law.edge_plus + 1.0) == pytest.approx(1.0)
    q = rd.quantiles(100, 120)
    assert len(q) == 100
    assert q[49] == pytest.approx(0.85587542673546309865, abs=1e-8)
    assert all(a > b for a, b in zip(q, q[1:]))


def test_log_integral_matches_scipy_quadrature():
    from scipy.integrate import quad

    g, t = 2.0, 6.5
    law = rd.MPLaw(g)
    val, _ = quad(lambda x: math.log(t - x) * law.density(x), law.edge_minus, law.edge_plus,
                  epsabs=1e-12, limit=200)
    val += law.point_mass_at_zero * math.log(t)
    assert rd.log_integral(g, t) == pytest.approx(val, abs=1e-8)


def test_sampling_and_spectrum_agree_with_numpy():
    x = rd.sample("null", 40, 50, seed=7)
    assert x.shape == (40, 50)
    spec = rd.eigenvalues(x)
    ref = np.sort(np.linalg.eigvalsh(x @ x.T / 40))[::-1]
    np.testing.assert_allclose(spec.lam, ref, atol=1e-10)
    np.testing.assert_array_equal(x, rd.sample("null", 40, 50, seed=7))


def test_rws_needs_params():
    with pytest.raises(ValueError):
        rd.sample("rws", 20, 24, seed=1)
    params = rd.SpikeParams.from_excess(20, 24, 2, 1.0)
    assert params.delta == pytest.approx(0.5)
    assert rd.sample("rws", 20, 24, seed=1, params=params).shape == (20, 24)


def test_detectors_and_ideal_error():
    cal = rd.calibrate_null(30, 36, 200, seed=3)
    assert rd.NullCalibration.from_json(cal.to_json()).to_json() == cal.to_json()
    spec = rd.eigenvalues(rd.sample("null", 30, 36, seed=99))
    tw = rd.tw_test(spec, cal)
    hc = rd.hc_star(spec, cal, 1e9)
    assert tw.name == "tw" and not hc.reject and hc.argmax_k >= 1
    assert rd.trace_test(spec).threshold == pytest.approx(math.sqrt(2 * math.log(30)))
    rep = rd.ideal_error(30, 36, 1, 3.0, 5, 2, ["trace", "tw"], 4, cal, threads=1)
    assert {t["test"] for t in rep["tests"]} == {"trace", "tw"}
    assert rd.ideal_error_from_values([0.0, 1.0], [2.0, 3.0]) == (0.0, 1.5)


def test_proxy_log_lr_no_spike():
    spec = rd.eigenvalues(rd.sample("null", 6, 8, seed=1))
    params = rd.SpikeParams(6, 8, 2, 0.1)
    value, guard = rd.proxy_log_lr(spec, params)
    assert math.isfinite(value) and not guard


def _cli():
    path = os.environ.get("RWSDETECT_CLI")
    if not path or not os.path.exists(path):
        pytest.skip("CLI binary not available")
    return path


def test_cli_numeric_failure_exit_code(tmp_path):
    cli = _cli()
    data = tmp_path / "nan.bin"
    n, p = 4, 5
    values = [1.0] * (n * p)
    values[3] = float("nan")
    data.write_bytes(struct.pack("<QQ", n, p) + struct.pack(f"<{n * p}d", *values))
    res = subprocess.run([cli, "test", "--data", str(data), "--stat", "trace"],
                         capture_output=True, text=True)
    assert res.returncode == 3, res.stderr


def test_cli_reads_python_written_data(tmp_path):
    cli = _cli()
    x = rd.sample("null", 20, 24, seed=5)
    data = tmp_path / "x.bin"
    data.write_bytes(struct.pack("<QQ", 20, 24) + x.astype("<f8").tobytes())
    res = subprocess.run([cli, "test", "--data", str(data), "--stat", "trace"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert '"trace"' in res.stdout
