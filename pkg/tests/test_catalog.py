import numpy as np
import pytest

from conftest import entry_run
from robinson.catalog import (
    build_lift, catalog_entries, entry_names, expected_residuals, get_entry, random_coframe,
    random_lift_spec,
)
from robinson.cli import check_entry
from robinson.geometry import GeometryError, frame_data
from robinson.torsion import components_of


def test_catalog_lists_required_entries():
    names = entry_names()
    for n in ("minkowski-4", "minkowski-6", "minkowski-8", "kerr-nut-ads-6", "cahen-wallach-6",
              "taub-nut-family-6", "taub-nut-family-8"):
        assert n in names
    assert len(catalog_entries()) == len(names)
    with pytest.raises(KeyError):
        get_entry("no-such-entry")


@pytest.mark.parametrize("name", entry_names())
def test_entry_has_lorentzian_metric(name):
    e = get_entry(name)
    fd = frame_data(e.coframe, e.samples(4, 0))
    ev = np.linalg.eigvalsh(fd.g.real)
    assert np.all((ev < 0).sum(1) == 1)
    assert e.description and e.citation


@pytest.mark.parametrize("name", entry_names())
def test_entry_structural_expectations(name):
    e, s, _, cls = entry_run(name)
    bad = check_entry(e, cls, s)
    assert not bad


@pytest.mark.parametrize("name", entry_names())
def test_entry_closed_forms(name):
    e, s, c, _ = entry_run(name)
    res = {k: r for k, (r, status) in expected_residuals(e, c, s).items() if status == "exact"}
    assert all(r < 1e-8 for r in res.values()), res


def test_random_coframe_is_seeded_and_well_conditioned():
    a, b = random_coframe(2, 9), random_coframe(2, 9)
    s = a.sample(6, 0)
    assert np.array_equal(frame_data(a, s).g, frame_data(b, s).g)
    assert np.max(np.linalg.cond(frame_data(a, s).C)) < 10


@pytest.mark.parametrize("m", [1, 2])
def test_random_lift_builds(m):
    cf = build_lift(random_lift_spec(m, 3))
    assert cf.m == m
    c = components_of(cf, cf.sample(4, 0))
    assert np.max(np.abs(c.gamma)) < 1e-10


def test_lift_rejects_fiber_dependence():
    spec = random_lift_spec(1, 0)
    bad = type(spec)(spec.chart, ("1", "v", "0", "0"), spec.theta, spec.h, spec.lam_alpha, spec.lam0)
    with pytest.raises(GeometryError):
        build_lift(bad)
