import numpy as np
import pytest

from robinson.catalog import get_entry, random_coframe
from robinson.expr import evaluate, parse_expr
from robinson.torsion import (
    boost_rotate, compare_components, components_of, null_rotate_coframe, null_rotation_law,
    symmetry_residuals, verify_coframe_change,
)
from robinson.geometry import frame_data


@pytest.mark.parametrize("m,seed", [(1, 0), (2, 1), (2, 2), (3, 3)])
def test_symmetry_identities_on_random_coframes(m, seed):
    cf = random_coframe(m, seed)
    c = components_of(cf, cf.sample(4, 0))
    res = symmetry_residuals(c)
    bad = {k: v for k, v in res.items() if v > 1e-9}
    assert not bad


def test_symmetry_identities_on_kerr_nut():
    e = get_entry("kerr-nut-ads-6")
    c = components_of(e.coframe, e.samples(4, 0))
    assert max(symmetry_residuals(c).values()) < 1e-9


def test_null_rotation_preserves_metric():
    cf = random_coframe(2, 4)
    new = null_rotate_coframe(cf, ["0.3*x1 + 0.2*i", "0.1*u - 0.2*i*y2"], varphi="0.2*v")
    s = cf.sample(4, 0)
    assert np.allclose(frame_data(new, s).g, frame_data(cf, s).g, atol=1e-12)


def test_null_rotation_law_matches_recomputation():
    cf = random_coframe(2, 7)
    s = cf.sample(4, 0)
    phi = ["0.3*x1 + 0.2*i", "0.1*u - 0.2*i*y2"]
    before = components_of(cf, s)
    after = components_of(null_rotate_coframe(cf, phi), s)
    P = np.stack([evaluate(parse_expr(p, cf.chart), s) for p in phi], axis=1)
    pred = null_rotation_law(before, P)
    res = compare_components(pred, after)
    assert max(res.values()) < 1e-8, res


def test_boost_rotation_is_tensorial():
    cf = random_coframe(2, 8)
    s = cf.sample(3, 0)
    before = components_of(cf, s)
    # a constant phase e^{ia} times the identity is unitary for any h
    a = 0.4
    psi = [[f"cos({a}) + i*sin({a})", "0"], ["0", f"cos({a}) + i*sin({a})"]]
    new = null_rotate_coframe(cf, ["0", "0"], varphi="0.3", psi=psi)
    after = components_of(new, s)
    P = np.broadcast_to(np.exp(1j * a) * np.eye(2), (len(s), 2, 2)).copy()
    pred = boost_rotate(before, np.full(len(s), 0.3), P)
    assert max(compare_components(pred, after).values()) < 1e-9


def test_verify_coframe_change_full_law():
    cf = random_coframe(2, 5)
    rep = verify_coframe_change(cf, cf.sample(4, 0), ["0.2*x1 + 0.1*i*v", "0.3 - 0.2*u"], varphi="0.1*x2",
                                psi=[["cos(0.3) + i*sin(0.3)", "0"], ["0", "cos(0.3) + i*sin(0.3)"]])
    assert rep.ok, rep.failures()


def test_verify_coframe_change_rejects_non_unitary_psi():
    cf = random_coframe(1, 2)
    with pytest.raises(ValueError, match="unitary"):
        verify_coframe_change(cf, cf.sample(3, 0), ["0"], psi=[["2"]])
