import numpy as np
import pytest

from conftest import entry_run
from robinson.catalog import entry_names, get_entry, random_coframe
from robinson.classify import (
    NotApplicable, class_names, classify, conformal_invariant_list, detect_family, gray_hervella,
    lattice_edges, membership, o_invariant_list,
)
from robinson.torsion import components_of


def _flat(m, n=6):
    e = get_entry(f"minkowski-{2 * m + 2}")
    return components_of(e.coframe, e.samples(n, 0))


def test_flat_space_is_in_every_class():
    for name in ("minkowski-4", "minkowski-6", "minkowski-8"):
        _, _, _, cls = entry_run(name)
        assert all(v.member for v in cls.classes.values())
        assert cls.flags["torsion_free"]


def test_class_names_cover_the_lattice():
    for m in (1, 2, 3):
        names = set(class_names(m)) | {"G"}
        for big, small in lattice_edges(m):
            for part in (big, small):
                assert all(p in names for p in part.split(" & "))


@pytest.mark.parametrize("name", entry_names())
def test_catalog_classification_is_lattice_consistent(name):
    _, _, _, cls = entry_run(name)
    assert not [w for w in cls.warnings if w.startswith("lattice")]


def test_random_coframes_are_lattice_consistent():
    for seed in range(4):
        cf = random_coframe(2, seed)
        cls = classify(components_of(cf, cf.sample(6, 0)))
        assert not [w for w in cls.warnings if w.startswith("lattice")]
        # a generic coframe has no vanishing torsion at all
        assert not cls.flags["geodesic"]
        assert cls.members() == []


def test_family_parameter_detected_from_synthetic_components():
    c = _flat(2)
    rng = np.random.default_rng(3)
    N = c.n_samples
    t = rng.normal(size=(N,)) + 1j * rng.normal(size=(N,))
    tau = np.zeros((N, 2, 2), complex)
    tau[:, 0, 1], tau[:, 1, 0] = t, -t
    z, w = 2j, 1.0
    c2 = c.replace(tau=tau, zeta=-(z / w) * tau)
    fr = detect_family(c2, "1x3_-1")
    assert fr.kind == "unique" and fr.matches(z, w)
    cls = classify(c2)
    assert cls.member("(G_{-1}^{1x3})[2i:1]")
    assert not cls.member("(G_{-1}^{1x3})[-2i:1]")


def test_real_family_gives_real_parameter():
    c = _flat(1)
    rng = np.random.default_rng(4)
    e = rng.normal(size=c.n_samples)
    c2 = c.replace(eps=e, tau_w=-2.0 * e)
    fr = detect_family(c2, "0x1_-1")
    assert fr.kind == "unique" and fr.matches(2, 1)
    assert all(abs(p.imag) < 1e-14 for p in fr.param)


def test_family_all_on_flat_and_none_when_side_fails():
    c = _flat(2)
    assert detect_family(c, "1x3_-1").kind == "all"
    g = np.ones((c.n_samples, 2), complex)
    assert detect_family(c.replace(gamma=g), "0x1_-1").kind == "none"


def test_mixed_component_reported_as_warning():
    c = _flat(1, n=8)
    e = np.zeros(8)
    e[3] = 1.0
    cls = classify(c.replace(eps=e))
    assert cls.components["eps"].verdict == "mixed"
    assert cls.is_zero("eps")
    assert any("eps" in w for w in cls.warnings)


def test_too_few_samples_rejected():
    e = get_entry("minkowski-4")
    with pytest.raises(ValueError):
        classify(components_of(e.coframe, e.samples(3, 0)))


def test_membership_of_intersections():
    _, _, _, cls = entry_run("kerr-nut-ads-6")
    assert membership(cls, "G")
    assert membership(cls, "G_0^{1,1} & G_0^{1,2}")
    assert not membership(cls, "G_0^{1,1} & G_0^{0,0}")


def test_gray_hervella_label_and_non_applicability():
    _, _, _, cls = entry_run("kundt-almost-kahler-6")
    assert cls.flags["nearly_robinson"] and cls.flags["kundt"]
    assert cls.gray_hervella == gray_hervella(cls)
    assert "almost Kähler" in cls.gray_hervella
    _, _, _, kn = entry_run("kerr-nut-ads-6")
    with pytest.raises(NotApplicable):
        gray_hervella(kn)


def test_kundt_and_robinson_trautman_flags():
    assert entry_run("cahen-wallach-6")[3].flags["kundt"]
    assert entry_run("kundt-generic-6")[3].flags["kundt"]
    rt = entry_run("rt-generic-6")[3].flags
    assert rt["robinson_trautman"] and not rt["kundt"]


def test_invariance_lists_are_nested():
    for m in (2, 3):
        g, _ = o_invariant_list(m, "general")
        r, _ = o_invariant_list(m, "restricted")
        k, _ = o_invariant_list(m, "kerr-schild")
        assert set(g) < set(r) < set(k)
        conf, fams = conformal_invariant_list(m)
        assert "G_{-1}^{0,0}" not in conf and "1x3_-1" in fams


def test_invariance_annotation_present():
    _, _, _, cls = entry_run("kerr-nut-ads-6")
    assert cls.invariance["G_{-1}^{1,1}"]["conformal"] is True
    assert cls.invariance["G_{-1}^{0,0}"]["conformal"] is False
