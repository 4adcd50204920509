"""Acceptance suite: one test per criterion, each recording a pass/fail line.

The lines are printed in the terminal summary by ``conftest.py``.
"""
import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, entry_run, random_expression
from robinson.catalog import (
    build_lift, entry_names, expected_residuals, get_entry, random_coframe, random_lift_spec,
)
from robinson.classify import classify
from robinson.connection import levi_civita
from robinson.expr import conj, diff, evaluate, parse_expr, to_string
from robinson.geometry import frame_data, verify_rho_identity
from robinson.torsion import (
    COMPONENT_NAMES, compare_components, components_of, null_rotate_coframe, symmetry_residuals,
    verify_coframe_change,
)
from robinson.transform import (
    ODeform, conformal_transform_and_reclassify, o_transform_and_reclassify, predict_o_transform,
)


def record(k, ok, detail):
    ACCEPTANCE_RESULTS[k] = (bool(ok), detail)
    print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def _max_abs(c, name):
    x = np.asarray(c.get(name))
    return float(np.max(np.abs(x))) if x.size else 0.0


def _generic_member(m, zero, seed=0):
    """Random components with only the listed blocks (and those vanishing identically for m = 2) zero."""
    flat = entry_run(f"minkowski-{2 * m + 2}")[2]
    rng = np.random.default_rng(seed)
    kw = {}
    for k in COMPONENT_NAMES:
        x = np.asarray(flat.get(k))
        r = rng.normal(size=x.shape) + (1j * rng.normal(size=x.shape) if k not in ("eps", "tau_w") else 0)
        structural = m == 2 and k in ("G3", "Go")
        kw[k] = np.zeros_like(r) if (k in zero or structural) else r
    return flat.replace(**kw, G=None, Gbar=None, Kf=None, Rf=None)


def test_criterion_01_minkowski_flat():
    worst, problems = 0.0, []
    for name in ("minkowski-4", "minkowski-6", "minkowski-8"):
        _, _, c, cls = entry_run(name, 8, 0)
        worst = max(worst, max(_max_abs(c, k) for k in COMPONENT_NAMES))
        if not all(v.member for v in cls.classes.values()):
            problems.append(f"{name} not in every class")
        if not cls.flags["torsion_free"]:
            problems.append(f"{name} not torsion-free")
    ok = worst < 1e-10 and not problems
    assert record(1, ok, f"max component {worst:.1e} (abs tol 1e-10) {problems or ''}")


def test_criterion_02_quadratic_identity_on_catalog():
    worst, who = 0.0, ""
    for name in entry_names():
        e = get_entry(name)
        fd = frame_data(e.coframe, e.samples(8, 0))
        _, _, rho, _ = fd.omega_rho()
        v = verify_rho_identity(fd.g, fd.kappa, rho, ginv=fd.ginv)
        if v.max_rel >= worst:
            worst, who = v.max_rel, name
    assert record(2, worst < 1e-9, f"max relative residual {worst:.1e} ({who}) over {len(entry_names())} entries")


def test_criterion_03_cahen_wallach_parallel():
    e, s, _, cls = entry_run("cahen-wallach-6")
    conn = levi_civita(e.coframe, s)
    nk, nr = float(np.max(np.abs(conn.nk))), float(np.max(np.abs(conn.nr)))
    ok = nk < 1e-10 and nr < 1e-10 and cls.flags["torsion_free"] and cls.flags["kundt"]
    assert record(3, ok, f"|nabla kappa| {nk:.1e}, |nabla rho| {nr:.1e}, torsion-free "
                         f"{cls.flags['torsion_free']}, Kundt {cls.flags['kundt']}")


def test_criterion_04_kerr_nut_ads():
    e, s, c, cls = entry_run("kerr-nut-ads-6")
    res = {k: r for k, (r, status) in expected_residuals(e, c, s).items() if status == "exact"}
    formulas_ok = {"Khb", "E", "Gbar"} <= set(res) and all(r < 1e-8 for r in res.values())
    zero_set = ("gamma", "sigma", "tau", "zeta", "G3", "Gh", "B")
    zeros_ok = all(cls.is_zero(k) for k in zero_set)
    # no further degeneracy: compare with a generic point of G_0^{1,1} & G_0^{1,2} that also has B = 0
    generic = classify(_generic_member(2, zero_set))
    assert generic.member("G_0^{1,1}") and generic.member("G_0^{1,2}")
    others_ok = all(cls.is_zero(k) == generic.is_zero(k) for k in COMPONENT_NAMES)
    want = set(generic.members())
    got = set(cls.members())
    class_ok = got == want
    fam_ok = all(cls.families[f].kind == generic.families[f].kind for f in cls.families)
    flags = ("geodesic", "expanding", "maximally_twisting", "shearing", "involutive")
    flags_ok = all(cls.flags[f] for f in flags)
    ok = formulas_ok and zeros_ok and others_ok and class_ok and fam_ok and flags_ok
    worst = max(res.values()) if res else float("inf")
    assert record(4, ok, f"formula residual {worst:.1e}; zero set {zeros_ok}; class "
                         f"{'exact' if class_ok else sorted(got ^ want)}; families {fam_ok}; flags {flags_ok}")


@pytest.mark.parametrize("m", [2, 3])
def test_criterion_05_taub_nut_family(m):
    name = f"taub-nut-family-{2 * m + 2}"
    e, s, c, cls = entry_run(name)
    p = evaluate(e.expr("p"), s).real
    tw = float(np.max(np.abs(c.tau_w - 1 / np.cos(p) ** 2)))
    ep = float(np.max(np.abs(c.eps - 2 * m * np.tan(p))))
    rest = [k for k in COMPONENT_NAMES if k not in ("eps", "tau_w") and not cls.is_zero(k)]
    fam = cls.families["0x1_0"]
    fam_ok = fam.kind == "unique" and fam.matches(2 * (m - 1) * 1j, -1) and fam.residual < 1e-8
    flags_ok = all(cls.flags[f] for f in ("twist_induced", "non_shearing", "nearly_robinson"))
    ok = tw < 1e-8 and ep < 1e-8 and not rest and cls.member("G_1^{0,0}") and fam_ok and flags_ok
    detail = (f"m={m}: |tau_w - sec^2| {tw:.1e}, |eps - 2m tan| {ep:.1e}, other nonzero {rest}, "
              f"G_1^(0,0) {cls.member('G_1^{0,0}')}, family {fam.label()} res {fam.residual:.1e}, flags {flags_ok}")
    prev = ACCEPTANCE_RESULTS.get(5)
    if prev is not None:
        ok_all = prev[0] and ok
        detail = prev[1] + " | " + detail
    else:
        ok_all = ok
    record(5, ok_all, detail)
    assert ok, detail


def test_criterion_06_conformal_invariance():
    rng = np.random.default_rng(6)
    violations, checked = [], 0
    for name in entry_names():
        e, s, _, before = entry_run(name)
        coords = e.chart.coordinate_names
        for _ in range(5):
            v1, v2 = rng.choice(coords, 2)
            a, b = rng.normal(size=2) * 0.4
            phi = f"{a:.3f}*sin({b:.3f}*{v1}+{v2})+0.1*{v2}"
            _, comp = conformal_transform_and_reclassify(e.coframe, phi, s, before=before)
            checked += 1
            violations += [f"{name}: {v}" for v in comp.violations]
    e, s, _, before = entry_run("rt-generic-6")
    _, comp = conformal_transform_and_reclassify(e.coframe, "-0.3*v", s, before=before)
    changed = "G_{-1}^{0,0}" in comp.changed and before.flags["expanding"]
    ok = not violations and changed
    assert record(6, ok, f"{checked} rescalings, violations {violations or 'none'}; "
                         f"G_(-1)^(0,0) changes on expanding rt-generic-6: {changed}")


def _restricted_alpha(cf):
    nm = cf.chart.coordinate_names
    w = parse_expr(f"0.2*{nm[1]}+0.1*i", cf.chart)
    f = parse_expr(f"0.1*{nm[0]}", cf.chart)
    return tuple(f * cf.kappa[j] + w * cf.theta[0][j] + conj(w) * conj(cf.theta[0][j]) for j in range(cf.n))


def test_criterion_07_o_invariance():
    parts, ok = [], True
    for name, f in (("cahen-wallach-6", "0.3*sin(x1)+0.2*u*x2"), ("kundt-generic-6", "0.2*cos(x1+v)+0.1*u")):
        e, s, _, before = entry_run(name)
        _, comp = o_transform_and_reclassify(e.coframe, ODeform.kerr_schild(e.coframe, f), "kerr-schild", s,
                                             before=before)
        ok &= comp.ok
        parts.append(f"{name} Kerr-Schild {'ok' if comp.ok else comp.violations}")
    e, s, _, before = entry_run("kerr-nut-ads-6")
    assert before.flags["twisting"]
    od = ODeform(_restricted_alpha(e.coframe), "restricted")
    _, comp = o_transform_and_reclassify(e.coframe, od, "restricted", s, before=before)
    ok &= comp.ok
    parts.append(f"kerr-nut-ads-6 restricted {'ok' if comp.ok else comp.violations}")
    # analytic predictions against direct recomputation
    worst = 0.0
    pairs = [("kundt-generic-6", ["0.1*x1", "0.2*u", "0", "0.1*y1*u", "0", "0.05"]),
             ("kerr-nut-ads-6", None),
             ("rt-generic-6", ["0.1*x1", "0.05*u", "0", "0.1*y1", "0", "0.02"])]
    for name, alpha in pairs:
        e = get_entry(name)
        s = e.samples(8, 0)
        al = alpha if alpha is not None else ODeform(_restricted_alpha(e.coframe), "restricted")
        pred = predict_o_transform(e.coframe, al, s)
        worst = max(worst, max(pred.residuals.values()))
    ok &= worst < 1e-8
    parts.append(f"predicted deltas max residual {worst:.1e} on {len(pairs)} pairs")
    assert record(7, ok, "; ".join(parts))


def test_criterion_08_lifts_are_nearly_robinson():
    worst, failures = 0.0, []
    for k in range(20):
        m = 1 + k % 2
        spec = random_lift_spec(m, 100 + k, kundt=(k % 4 == 2), expanding=(k % 5 == 3))
        cf = build_lift(spec)
        c = components_of(cf, cf.sample(8, k))
        sc = (1.0 + c.scale)
        r = max(float(np.max(np.abs(c.gamma).max(1) / sc ** 2)),
                float(np.max(np.abs(c.sigma).reshape(8, -1).max(1) / sc ** 2)),
                float(np.max(np.abs(c.zeta - 2j * c.tau).reshape(8, -1).max(1) / sc ** 3)))
        worst = max(worst, r)
        if r >= 1e-9 or not classify(c).flags["nearly_robinson"]:
            failures.append(spec.name)
    assert record(8, not failures, f"20 lifts, max residual {worst:.1e}, failures {failures or 'none'}")


def test_criterion_09_symmetry_suite():
    worst, who = 0.0, ""
    count = 0
    for name in entry_names():
        _, _, c, _ = entry_run(name)
        r = max(symmetry_residuals(c).values())
        count += 1
        if r >= worst:
            worst, who = r, name
    for k in range(20):
        cf = random_coframe(1 + k % 3, 200 + k)
        c = components_of(cf, cf.sample(6, k))
        r = max(symmetry_residuals(c).values())
        count += 1
        if r >= worst:
            worst, who = r, cf.name
    assert record(9, worst < 1e-9, f"{count} structures, max residual {worst:.1e} ({who})")


def test_criterion_10_coframe_changes():
    rng = np.random.default_rng(10)
    worst_inv, worst_law, entries = 0.0, 0.0, []
    for name in entry_names():
        e, s, _, cls = entry_run(name)
        if not cls.flags["geodesic"]:
            continue
        entries.append(name)
        cf = e.coframe
        coords = cf.chart.coordinate_names
        terms = lambda: "+".join(f"({a:.3f})*sin({coords[j]})"  # noqa: E731
                                 for a, j in zip(rng.normal(size=2) * 0.3, rng.integers(0, cf.n, 2)))
        phi = [f"{terms()}+i*({terms()})" for _ in range(cf.m)]
        before = components_of(cf, s)
        after = components_of(null_rotate_coframe(cf, phi), s)
        worst_inv = max(worst_inv, max(compare_components(before, after, ("tau", "sigma", "zeta")).values()))
        a = rng.normal()
        psi = [[f"cos({a:.3f})+i*sin({a:.3f})" if i == j else "0" for j in range(cf.m)] for i in range(cf.m)]
        rep = verify_coframe_change(cf, s, phi, varphi=f"0.2*sin({coords[1]})", psi=psi)
        worst_law = max(worst_law, max(rep.residuals[k] for k in ("tau", "sigma", "zeta")))
    cf = random_coframe(2, 31)
    s = cf.sample(8, 0)
    c0 = components_of(cf, s)
    geodesic = float(np.max(np.abs(c0.gamma))) < 1e-8
    rep = verify_coframe_change(cf, s, ["0.2*x1+0.1*i*v", "0.3-0.2*i*u"], varphi="0.1*x2",
                                psi=[["cos(0.4)+i*sin(0.4)", "0"], ["0", "cos(0.4)+i*sin(0.4)"]])
    b = rep.residuals["B"]
    ok = worst_inv < 1e-8 and worst_law < 1e-8 and not geodesic and b < 1e-8 and rep.ok
    assert record(10, ok, f"{len(entries)} geodesic entries: tau/sigma/zeta change {worst_inv:.1e}, "
                          f"boosted law {worst_law:.1e}; non-geodesic B-law residual {b:.1e}, "
                          f"all laws {'ok' if rep.ok else rep.failures()}")


def test_criterion_11_expression_engine():
    rng = np.random.default_rng(11)
    names = ["x", "y", "z"]
    h = 1e-5
    worst, trips = 0.0, 0
    for _ in range(100):
        e = parse_expr(random_expression(rng, names, 3))
        trips += parse_expr(to_string(e)) is e
        p = {n: rng.uniform(-0.8, 0.8, size=4) for n in names}
        for n in names:
            d = evaluate(diff(e, n), p)
            fd = (evaluate(e, dict(p, **{n: p[n] + h})) - evaluate(e, dict(p, **{n: p[n] - h}))) / (2 * h)
            worst = max(worst, float(np.max(np.abs(d - fd) / (1 + np.abs(fd)))))
    ok = worst < 1e-6 and trips == 100
    assert record(11, ok, f"100 expressions: max relative derivative error {worst:.1e}, round trips {trips}/100")
