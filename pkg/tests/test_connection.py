import numpy as np

from robinson.catalog import get_entry, random_coframe
from robinson.connection import (
    build_compatible_connection, christoffel, christoffel_from_metric, levi_civita,
)
from robinson.geometry import frame_data, metric_from_coframe, robinson_three_form
from robinson.torsion import extract_components


def _fd_christoffel(cf, s, h=1e-5):
    """Christoffel symbols from a centred finite difference of the metric."""
    mf = metric_from_coframe(cf)
    names = cf.chart.coordinate_names
    dg = np.stack([(mf.values(s.shifted(x, h)) - mf.values(s.shifted(x, -h))) / (2 * h) for x in names], axis=1)
    return christoffel(dg, np.linalg.inv(mf.values(s)))


def test_christoffel_symbols_match_finite_differences():
    cf = random_coframe(1, 2)
    s = cf.sample(4, 1)
    conn = levi_civita(cf, s)
    assert np.allclose(conn.gamma, _fd_christoffel(cf, s), atol=1e-8)
    assert np.allclose(conn.gamma, christoffel_from_metric(metric_from_coframe(cf), s), atol=1e-12)


def test_christoffel_symmetric_in_lower_indices():
    cf = random_coframe(2, 4)
    conn = levi_civita(cf, cf.sample(3, 0))
    assert np.allclose(conn.gamma, np.swapaxes(conn.gamma, 2, 3), atol=1e-13)


def test_levi_civita_is_metric_and_torsion_free():
    cf = get_entry("kerr-nut-ads-6").coframe
    conn = levi_civita(cf, cf.sample(5, 2))
    assert np.max(np.abs(conn.compatibility_residual())) < 1e-11
    assert np.max(np.abs(conn.dkappa_residual())) < 1e-11


def test_nabla_rho_matches_finite_difference_of_three_form():
    cf = random_coframe(1, 5)
    s = cf.sample(3, 0)
    conn = levi_civita(cf, s)
    forms = robinson_three_form(cf)
    h = 1e-5
    names = cf.chart.coordinate_names
    drho = np.stack([(forms.rho_values(s.shifted(x, h)) - forms.rho_values(s.shifted(x, -h))) / (2 * h)
                     for x in names], axis=1)
    rho = forms.rho_values(s)
    G = conn.gamma
    ref = (drho - np.einsum("seab,secd->sabcd", G, rho) - np.einsum("seac,sbed->sabcd", G, rho)
           - np.einsum("sead,sbce->sabcd", G, rho))
    assert np.allclose(conn.nr, ref, atol=1e-8)


def test_nabla_rho_is_alternating():
    cf = random_coframe(2, 6)
    nr = levi_civita(cf, cf.sample(3, 0)).nr
    assert np.allclose(nr, -np.swapaxes(nr, 2, 3), atol=1e-13)
    assert np.allclose(nr, -np.swapaxes(nr, 3, 4), atol=1e-13)


def test_restriction_to_a_single_sample():
    cf = random_coframe(1, 7)
    conn = levi_civita(cf, cf.sample(4, 0))
    one = conn.at(2)
    assert np.array_equal(one.nk[0], conn.nk[2])
    assert len(one.samples) == 1


def test_compatible_connection_vanishes_on_flat_space():
    cf = get_entry("minkowski-4").coframe
    cc = build_compatible_connection(levi_civita(cf, cf.sample(4, 0)))
    assert np.max(np.abs(cc.Q)) < 1e-12


def test_compatible_connection_properties_and_forced_torsion():
    cf = random_coframe(1, 3)
    conn = levi_civita(cf, cf.sample(4, 0))
    cc = build_compatible_connection(conn)
    for name, r in cc.compatibility_residuals().items():
        assert np.max(np.abs(r)) < 1e-10, name
    c = extract_components(conn)
    forced = cc.forced_components()
    # T(k, e_i)^0 = -gamma_i and T(e_i, e_j)^0 = -2 tau_ij in the complex screen basis
    assert np.allclose(forced["T0j0"], -c.gamma_i, atol=1e-10)
    Ks = c.Kf[:, 1:-1, 1:-1]
    assert np.allclose(forced["Tij0"], -(Ks - np.swapaxes(Ks, 1, 2)), atol=1e-10)
