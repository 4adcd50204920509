import numpy as np
import pytest

from conftest import entry_run
from robinson.catalog import get_entry, random_coframe
from robinson.connection import levi_civita
from robinson.geometry import frame_data, metric_from_coframe
from robinson.transform import (
    ConformalRescale, ODeform, TierViolation, conformal_transform, conformal_transform_and_reclassify,
    o_transform_and_reclassify, predict_o_transform,
)
from robinson.expr import parse_expr

KUNDT_ALPHA = ["0.1*x1", "0.2*u", "0", "0.1*y1*u", "0", "0.05"]


def test_conformal_rescale_scales_metric():
    cf = random_coframe(2, 1)
    s = cf.sample(4, 0)
    r = ConformalRescale(parse_expr("0.3*x1 - 0.2*v", cf.chart))
    assert r.metric_residual(cf, s) < 1e-13


def test_o_deformation_adds_symmetric_product():
    cf = get_entry("kundt-generic-6").coframe
    s = cf.sample(4, 0)
    od = ODeform.from_strings(cf, KUNDT_ALPHA)
    g0 = metric_from_coframe(cf).values(s)
    g1 = metric_from_coframe(od.apply(cf)).values(s)
    k = frame_data(cf, s).kappa
    a = od.values(s)
    assert np.allclose(g1 - g0, np.einsum("sa,sb->sab", k, a) + np.einsum("sa,sb->sab", a, k), atol=1e-13)


def test_tier_checks():
    e = get_entry("cahen-wallach-6")
    cf, s = e.coframe, e.samples(4, 0)
    ODeform.kerr_schild(cf, "0.3*x1").check_tier(cf, s)
    with pytest.raises(TierViolation):
        ODeform.from_strings(cf, ["0", "0", "0", "0", "0", "1"], "kerr-schild").check_tier(cf, s)
    with pytest.raises(TierViolation):
        ODeform.from_strings(cf, ["0", "0", "0", "0", "0", "1"], "restricted").check_tier(cf, s)
    with pytest.raises(TierViolation):
        ODeform.from_strings(cf, ["i", "0", "0", "0", "0", "0"]).check_tier(cf, s)
    with pytest.raises(ValueError):
        ODeform.from_strings(cf, ["0"])
    with pytest.raises(ValueError):
        ODeform((), "sideways")


def test_difference_tensor_matches_christoffel_difference():
    e = get_entry("kundt-generic-6")
    cf, s = e.coframe, e.samples(4, 0)
    pred = predict_o_transform(cf, KUNDT_ALPHA, s)
    od = ODeform.from_strings(cf, KUNDT_ALPHA)
    D = levi_civita(od.apply(cf), s).gamma - levi_civita(cf, s).gamma
    # gamma[s, d, a, b] = Gamma^d_ab while Q[s, a, b, d] = Q_ab^d
    assert np.allclose(np.transpose(D, (0, 2, 3, 1)), pred.Q, atol=1e-12)


@pytest.mark.parametrize("name", ["kundt-generic-6", "kerr-nut-ads-6", "rt-generic-6"])
def test_analytic_predictions_match_recomputation(name):
    e = get_entry(name)
    cf, s = e.coframe, e.samples(4, 0)
    c = cf.chart.coordinate_names
    alpha = [f"0.1*{c[1]}", f"0.05*{c[0]}", "0", f"0.1*{c[2]}", "0", "0.02"]
    pred = predict_o_transform(cf, alpha, s)
    bad = {k: v for k, v in pred.residuals.items() if v > 1e-8}
    assert not bad


def test_printed_dd8_form_differs_from_recomputation():
    # the literal printed form carries a spurious factor on Q; it must not agree in general
    e = get_entry("kundt-generic-6")
    pred = predict_o_transform(e.coframe, KUNDT_ALPHA, e.samples(4, 0))
    assert pred.printed["DD8"] > 1e-7
    assert pred.residuals["DD8"] < 1e-10


def test_conformal_sweep_keeps_invariant_classes():
    name = "kerr-nut-ads-6"
    ent, s, _, cls = entry_run(name)
    after, comp = conformal_transform_and_reclassify(ent.coframe, "0.2*x1 + 0.1*r", s, before=cls)
    assert comp.ok, comp.violations
    assert after.m == cls.m


def test_conformal_changes_expansion_class():
    ent, s, _, cls = entry_run("rt-generic-6")
    assert not cls.member("G_{-1}^{0,0}")
    _, comp = conformal_transform_and_reclassify(ent.coframe, "-0.3*v", s, before=cls)
    assert comp.ok
    assert "G_{-1}^{0,0}" in comp.changed


def test_kerr_schild_deformation_preserves_all_tiers():
    ent, s, _, cls = entry_run("cahen-wallach-6")
    od = ODeform.kerr_schild(ent.coframe, "0.2*x1*u")
    _, comp = o_transform_and_reclassify(ent.coframe, od, "kerr-schild", s, before=cls)
    assert comp.ok, comp.violations
    d = comp.to_dict()
    assert d["kind"] == "o:kerr-schild" and d["ok"]


def test_tier_violation_raised_before_reclassification():
    ent, s, _, cls = entry_run("cahen-wallach-6")
    with pytest.raises(TierViolation):
        o_transform_and_reclassify(ent.coframe, ["0", "0", "0", "0", "0", "1"], "kerr-schild", s, before=cls)


def test_conformal_transform_roundtrip():
    cf = random_coframe(1, 4)
    s = cf.sample(4, 0)
    back = conformal_transform(conformal_transform(cf, "0.2*x1"), "-0.2*x1")
    assert np.allclose(metric_from_coframe(back).values(s), metric_from_coframe(cf).values(s), atol=1e-13)
