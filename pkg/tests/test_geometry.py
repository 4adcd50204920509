import numpy as np
import pytest

from robinson.catalog import get_entry, random_coframe
from robinson.expr import Chart, parse_expr, sample_points
from robinson.geometry import (
    CoframeField, GeometryError, ManifestError, coframe_to_manifest, frame_data, load_manifest,
    metric_from_coframe, rho_identity_residual, robinson_three_form, verify_rho_identity,
)


def flat4():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    s = "(1/2)^(1/2)"
    return CoframeField.from_strings(ch, ["1", "0", "0", "0"], ["0", "0", "0", "1"],
                                     [["0", s, f"i*{s}", "0"]])


def test_flat_metric_has_lorentzian_signature():
    cf = flat4()
    fd = frame_data(cf, cf.sample(4))
    ev = np.linalg.eigvalsh(fd.g[0].real)
    assert (ev < 0).sum() == 1 and (ev > 0).sum() == 3


def test_dual_frame_pairs_with_coframe():
    cf = random_coframe(2, 3)
    fd = frame_data(cf, cf.sample(5, 1))
    eye = np.einsum("sra,saA->srA", fd.C, fd.F)
    assert np.allclose(eye, np.eye(cf.n)[None], atol=1e-12)
    # k and ell are null and g(k, ell) = 1
    assert np.allclose(np.einsum("sa,sab,sb->s", fd.k, fd.g, fd.k), 0, atol=1e-12)
    assert np.allclose(np.einsum("sa,sab,sb->s", fd.k, fd.g, fd.ell), 1, atol=1e-12)


def test_metric_expression_matches_numeric_metric():
    cf = get_entry("kerr-nut-ads-4").coframe
    s = cf.sample(5, 2)
    g_expr = metric_from_coframe(cf).values(s)
    assert np.allclose(g_expr, frame_data(cf, s).g, rtol=1e-12, atol=1e-12)


def test_metric_derivative_matches_finite_difference():
    cf = random_coframe(1, 4)
    s = cf.sample(3, 0)
    fd = frame_data(cf, s)
    h = 1e-6
    names = cf.chart.coordinate_names
    mf = metric_from_coframe(cf)
    for c, x in enumerate(names):
        num = (mf.values(s.shifted(x, h)) - mf.values(s.shifted(x, -h))) / (2 * h)
        assert np.allclose(fd.dg[:, c], num, atol=1e-7)


def test_singular_coframe_rejected():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    cf = CoframeField.from_strings(ch, ["1", "0", "0", "0"], ["1", "0", "0", "0"], [["0", "1", "i", "0"]])
    with pytest.raises(GeometryError):
        frame_data(cf, cf.sample(4))


def test_complex_kappa_rejected():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    cf = CoframeField.from_strings(ch, ["1", "i", "0", "0"], ["0", "0", "0", "1"], [["0", "1", "i", "0"]])
    with pytest.raises(GeometryError):
        frame_data(cf, cf.sample(4))


def test_undeclared_symbol_rejected():
    ch = Chart.build([("u", -1, 1), ("x", -1, 1), ("y", -1, 1), ("v", -1, 1)])
    with pytest.raises(Exception):
        CoframeField.from_strings(ch, ["1", "0", "0", "w"], ["0", "0", "0", "1"], [["0", "1", "i", "0"]])


def test_three_form_expression_matches_numeric():
    cf = random_coframe(2, 5)
    s = cf.sample(4, 0)
    fd = frame_data(cf, s)
    _, _, rho, _ = fd.omega_rho()
    rho_e = robinson_three_form(cf).rho_values(s)
    assert np.allclose(rho, rho_e, atol=1e-12)


def test_rho_identity_holds_and_detects_perturbation():
    cf = random_coframe(2, 6)
    s = cf.sample(6, 0)
    fd = frame_data(cf, s)
    _, _, rho, _ = fd.omega_rho()
    assert verify_rho_identity(fd.g, fd.kappa, rho, ginv=fd.ginv).is_zero
    bad = rho.copy()
    bad[:, 0, 1, 2] += 0.1
    bad[:, 1, 2, 0] += 0.1
    bad[:, 2, 0, 1] += 0.1
    bad[:, 1, 0, 2] -= 0.1
    bad[:, 0, 2, 1] -= 0.1
    bad[:, 2, 1, 0] -= 0.1
    assert not verify_rho_identity(fd.g, fd.kappa, bad, ginv=fd.ginv).is_zero


def test_manifest_round_trip():
    cf = get_entry("taub-nut-family-6").coframe
    text = coframe_to_manifest(cf, count=6, seed=4)
    man = load_manifest(text, is_text=True)
    assert man.count == 6 and man.seed == 4
    s = cf.sample(5, 1)
    assert np.allclose(frame_data(man.coframe, s).g, frame_data(cf, s).g, atol=1e-13)


def test_manifest_error_has_line_and_column():
    text = coframe_to_manifest(get_entry("minkowski-4").coframe)
    broken = text.replace('kappa = ["1"', 'kappa = ["1+*u"', 1)
    with pytest.raises(ManifestError) as info:
        load_manifest(broken, is_text=True)
    line = broken.splitlines()[info.value.line - 1]
    assert line.startswith("kappa")
    assert line[info.value.column - 1] == "*"


def test_manifest_toml_syntax_error_located():
    text = coframe_to_manifest(get_entry("minkowski-4").coframe).replace("[coframe]", "[coframe", 1)
    with pytest.raises(ManifestError) as info:
        load_manifest(text, is_text=True)
    assert info.value.line is not None


def test_manifest_missing_table():
    with pytest.raises(ManifestError, match="missing table"):
        load_manifest("[chart]\nm = 1\ncoordinates = ['u','x','y','v']\n", is_text=True)
