"""Ready-made almost Robinson structures and a CR-lift builder.

Each :class:`CatalogEntry` holds a coframe together with the component
values, class memberships and flags it is expected to reproduce.  Expected
component formulas are stored as expression strings in the entry's chart so
they can be evaluated at the same samples as the computed components.

Conventions.  Entries tagged ``"standard"`` use g = 2 kappa lambda +
2 h theta thetabar with unitary theta.  Lift entries (``"lift"``) use
kappa = 2 theta^0 so that g = 4 theta^0 lambda + 2 h theta thetabar, with a
general Hermitian h.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .expr import Chart, Expr, SampleSet, as_expr, conj, evaluate, free_symbols, parse_expr, to_string
from .geometry import CoframeField, GeometryError

__all__ = [
    "CatalogEntry", "ExpectedComponent", "CRLiftSpec", "catalog_entries", "get_entry",
    "entry_names", "build_lift", "random_lift_spec", "random_coframe", "expected_residuals",
]

SQ = "(1/2)^(1/2)"


@dataclass(frozen=True)
class ExpectedComponent:
    """Closed-form values of one component block.

    ``key`` names a block of :class:`robinson.torsion.TorsionComponents`
    (``"Khb"`` is the combined (eps/2m) h + sigma + tau in barred indices).
    ``values`` maps index tuples to expression strings; unlisted indices are
    expected to vanish.  ``status`` is ``"exact"`` when the formula must be
    reproduced and ``"reported"`` when a known discrepancy is only recorded.
    """

    key: str
    values: Mapping[Tuple[int, ...], str]
    provenance: str
    status: str = "exact"
    note: str = ""


@dataclass
class CatalogEntry:
    name: str
    coframe: CoframeField
    description: str
    citation: str
    expected_components: List[ExpectedComponent] = field(default_factory=list)
    expected_zero: Tuple[str, ...] = ()
    expected_nonzero: Tuple[str, ...] = ()
    expected_members: Tuple[str, ...] = ()
    expected_nonmembers: Tuple[str, ...] = ()
    expected_flags: Mapping[str, bool] = field(default_factory=dict)
    defs: Mapping[str, Expr] = field(default_factory=dict)
    notes: str = ""

    @property
    def m(self) -> int:
        return self.coframe.m

    @property
    def chart(self) -> Chart:
        return self.coframe.chart

    def samples(self, count: int = 8, seed: int = 0) -> SampleSet:
        return self.coframe.sample(count, seed)

    def expr(self, source: str) -> Expr:
        return parse_expr(source, self.chart, self.defs)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _basis(n: int, i: int, coef: str = "1") -> List[str]:
    return [coef if j == i else "0" for j in range(n)]


def _combo(n: int, terms: Mapping[int, str]) -> List[str]:
    out = ["0"] * n
    for j, s in terms.items():
        out[j] = s if out[j] == "0" else f"({out[j]})+({s})"
    return out


def _flat_theta(n: int, m: int, xi, yi) -> List[List[str]]:
    return [_combo(n, {xi(a): SQ, yi(a): f"i*{SQ}"}) for a in range(m)]


def _esym(vals: Sequence[str], k: int) -> str:
    """Elementary symmetric polynomial of degree k in the given strings."""
    if k == 0:
        return "1"
    if k > len(vals):
        return "0"
    terms = ["*".join(f"({v})" for v in c) for c in combinations(vals, k)]
    return "+".join(terms)


# ---------------------------------------------------------------------------
# Minkowski
# ---------------------------------------------------------------------------

def minkowski(m: int) -> CatalogEntry:
    n = 2 * m + 2
    names = ["u"] + [f"{c}{a + 1}" for a in range(m) for c in "xy"] + ["v"]
    ch = Chart.build([(x, -1, 1) for x in names])
    theta = _flat_theta(n, m, lambda a: 1 + 2 * a, lambda a: 2 + 2 * a)
    cf = CoframeField.from_strings(ch, _basis(n, 0), _basis(n, n - 1), theta, name=f"minkowski-{n}")
    from .torsion import COMPONENT_NAMES
    return CatalogEntry(
        f"minkowski-{n}", cf, f"flat space in dimension {n} with a constant Robinson coframe",
        "flat model", expected_zero=tuple(COMPONENT_NAMES),
        expected_flags={"torsion_free": True, "kundt": True, "involutive": True},
    )


# ---------------------------------------------------------------------------
# Kerr–NUT–(A)dS and Myers–Perry
# ---------------------------------------------------------------------------

def _kerr_nut_defs(ch: Chart, m: int, X_src: str, Xa_src: Sequence[str]) -> Dict[str, Expr]:
    xs = [f"x{a + 1}" for a in range(m)]
    defs: Dict[str, Expr] = {}
    p = lambda s: parse_expr(s, ch, defs)  # noqa: E731
    defs["U"] = p("*".join(f"(r^2+{x}^2)" for x in xs))
    defs["X"] = p(X_src)
    for a, x in enumerate(xs):
        others = [y for y in xs if y != x]
        prod = "*".join(f"({y}^2-{x}^2)" for y in others) or "1"
        defs[f"U{a + 1}"] = p(f"(r^2+{x}^2)*{prod}")
        defs[f"X{a + 1}"] = p(Xa_src[a])
    for k in range(1, m + 1):
        defs[f"A{k}"] = p(_esym([f"{x}^2" for x in xs], k))
        for a, x in enumerate(xs):
            others = [f"{y}^2" for y in xs if y != x]
            defs[f"A{k}_{a + 1}"] = p(f"({_esym(others, k)})-r^2*({_esym(others, k - 1)})")
    return defs


def _kerr_nut_coframe(ch: Chart, m: int, defs: Dict[str, Expr], name: str) -> CoframeField:
    # coordinates: r, x_1..x_m, t, psi_1..psi_m
    n = 2 * m + 2
    ir, it = 0, m + 1
    ix = lambda a: 1 + a  # noqa: E731
    ipsi = lambda k: m + 2 + k  # noqa: E731

    def dt_plus(pref: str, coeffs: Sequence[str]) -> Dict[int, str]:
        d = {it: pref}
        for k, c in enumerate(coeffs):
            d[ipsi(k)] = f"{pref}*({c})"
        return d

    A = [f"A{k + 1}" for k in range(m)]
    kap = _combo(n, {ir: "(U/(2*X))^(1/2)", **dt_plus("(U/(2*X))^(1/2)*X/U", A)})
    lam = _combo(n, {ir: "(U/(2*X))^(1/2)", **dt_plus("-(U/(2*X))^(1/2)*X/U", A)})
    theta = []
    for a in range(m):
        Ua, Xa = f"U{a + 1}", f"X{a + 1}"
        pref = f"({Ua}/(2*{Xa}))^(1/2)"
        Aa = [f"A{k + 1}_{a + 1}" for k in range(m)]
        theta.append(_combo(n, {ix(a): pref, **dt_plus(f"i*{pref}*{Xa}/{Ua}", Aa)}))
    return CoframeField.from_strings(ch, kap, lam, theta, defs=defs, name=name)


def _kerr_nut_expected(m: int) -> List[ExpectedComponent]:
    prov = "Kerr–NUT–(A)dS example, component list"
    khb = {(a, a): f"(X/(2*U))^(1/2)*(r-i*x{a + 1})/(r^2+x{a + 1}^2)" for a in range(m)}
    E = {(a,): f"i*(X{a + 1}/(2*U{a + 1}))^(1/2)*(r+i*x{a + 1})/(r^2+x{a + 1}^2)" for a in range(m)}
    printed = {}
    for a in range(m):
        for b in range(m):
            printed[(a, a, b)] = f"-i*(2*X{b + 1}/U{b + 1})^(1/2)/(x{a + 1}+x{b + 1})"
    anti = {}
    for a in range(m):
        for b in range(m):
            if a != b:
                anti[(a, a, b)] = f"-i*(2*X{b + 1}/U{b + 1})^(1/2)/(x{a + 1}+x{b + 1})"
                anti[(a, b, a)] = f"i*(2*X{b + 1}/U{b + 1})^(1/2)/(x{a + 1}+x{b + 1})"
    out = [
        ExpectedComponent("Khb", khb, prov),
        ExpectedComponent("E", E, prov),
        ExpectedComponent("Gbar", anti, prov + " (off-diagonal entries, antisymmetrised)",
                          note="the printed G_{cbar a b} is taken for a != b and extended by the "
                               "antisymmetry G_{cbar a b} = -G_{cbar b a}"),
        ExpectedComponent("Gbar", printed, prov, status="reported",
                          note="printed formula including a = b; not antisymmetric in its last pair"),
    ]
    return out


def kerr_nut_ads(m: int) -> CatalogEntry:
    n = 2 * m + 2
    xs = [f"x{a + 1}" for a in range(m)]
    # x_alpha kept in disjoint intervals so that the U_alpha have fixed signs
    xranges = [(0.25 + 0.6 * a, 0.45 + 0.6 * a) for a in range(m)]
    coords = [("r", 1.0, 2.0)] + [(x, lo, hi) for x, (lo, hi) in zip(xs, xranges)] + [("t", -1, 1)] + \
             [(f"psi{a + 1}", -1, 1) for a in range(m)]
    params = [("M", 1.5, 2.5), ("c1", -1.2, -0.8), ("c2", 0.05, 0.15), ("c3", -0.02, 0.0)]
    params += [(f"L{a + 1}", (1.0, 1.5) if a % 2 == 0 else (-1.5, -1.0)) for a in range(m)]
    params = [(p[0], *p[1]) if isinstance(p[1], tuple) else p for p in params]
    cs = ["c1", "c2", "c3"][: m + 1]
    X = "+".join(f"(-1)^{k + 1}*{c}*r^{2 * (k + 1)}" for k, c in enumerate(cs)) + "+M*r"
    Xa = ["+".join(f"{c}*{x}^{2 * (k + 1)}" for k, c in enumerate(cs)) + f"+L{a + 1}*{x}"
          for a, x in enumerate(xs)]
    probe = Chart.build(coords, params)
    defs = _kerr_nut_defs(probe, m, X, Xa)
    positive = [defs["X"]] + [defs[f"U{a + 1}"] / defs[f"X{a + 1}"] for a in range(m)]
    ch = Chart(probe.coordinates, probe.parameters, (), tuple(positive))
    defs = _kerr_nut_defs(ch, m, X, Xa)
    cf = _kerr_nut_coframe(ch, m, defs, f"kerr-nut-ads-{n}")
    members = ("G_0^{1,1}", "G_0^{1,2}")
    nonmembers = ("G_{-1}^{1,0}", "G_{-1}^{0,0}", "G_0^{0,0}", "G_0^{1,0}")
    flags = {"geodesic": True, "expanding": True, "twisting": True, "involutive": True,
             "nearly_robinson": True}
    if m > 1:
        flags.update({"shearing": True, "maximally_twisting": True})
        nonmembers = nonmembers + ("G_0^{1,3}", "G_1^{0,0}", "G_{-1}^{2,0}")
    else:
        flags.update({"shearing": False})
    return CatalogEntry(
        f"kerr-nut-ads-{n}", cf,
        "Kerr–NUT–(A)dS metric in canonical coordinates with the optical coframe (kappa, lambda, theta)",
        "Kerr–NUT–(A)dS example",
        expected_components=_kerr_nut_expected(m),
        expected_zero=("gamma", "sigma", "tau", "zeta", "G3", "Gh", "B"),
        expected_nonzero=("eps", "tau_w", "E"),
        expected_members=members, expected_nonmembers=nonmembers, expected_flags=flags, defs=defs,
        notes="U is read as a product and X as a sum (the printed symbols are swapped); "
              "X_alpha uses L_alpha x_alpha.",
    )


def myers_perry6() -> CatalogEntry:
    """Myers–Perry in the canonical coordinates of the Kerr–NUT family.

    The Kerr–Schild presentation defines r only implicitly, so the entry uses
    the vanishing-NUT, vanishing-Lambda limit of the Kerr–NUT coframe: X and
    X_alpha lose their top-degree and L_alpha terms.
    """
    m, n = 2, 6
    coords = [("r", 0.5, 1.0), ("x1", 0.2, 0.5), ("x2", 0.8, 1.0), ("t", -1, 1), ("psi1", -1, 1),
              ("psi2", -1, 1)]
    params = [("M", 4.5, 5.5), ("c1", 0.9, 1.1), ("c2", -2.2, -1.8)]
    X = "-c1*r^2+c2*r^4+M*r"
    Xa = ["c1*x1^2+c2*x1^4", "c1*x2^2+c2*x2^4"]
    probe = Chart.build(coords, params)
    defs = _kerr_nut_defs(probe, m, X, Xa)
    positive = [defs["X"]] + [defs[f"U{a + 1}"] / defs[f"X{a + 1}"] for a in range(m)]
    ch = Chart(probe.coordinates, probe.parameters, (), tuple(positive))
    defs = _kerr_nut_defs(ch, m, X, Xa)
    cf = _kerr_nut_coframe(ch, m, defs, "myers-perry-6")
    return CatalogEntry(
        "myers-perry-6", cf, "Myers–Perry metric (zero NUT charges and cosmological constant)",
        "Myers–Perry example", expected_components=_kerr_nut_expected(m)[:2],
        expected_zero=("gamma", "sigma", "tau", "zeta", "G3", "Gh", "B"),
        expected_nonzero=("eps", "tau_w", "E"),
        expected_members=("G_0^{1,1}", "G_0^{1,2}"),
        expected_nonmembers=("G_1^{0,0}", "G_{-1}^{1,0}", "G_{-1}^{2,0}"),
        expected_flags={"geodesic": True, "expanding": True, "twisting": True, "shearing": True,
                        "involutive": True},
        defs=defs,
        notes="canonical-coordinate form used in place of the Kerr–Schild form",
    )


# ---------------------------------------------------------------------------
# Cahen–Wallach
# ---------------------------------------------------------------------------

def cahen_wallach6() -> CatalogEntry:
    n = 6
    names = ["u", "x1", "x2", "x3", "x4", "v"]
    ch = Chart.build([(x, -1, 1) for x in names])
    kap = _basis(n, 0)
    # g = du (dv - 1/2 |x|^2 du) + |dx|^2  =>  2 kappa lambda = du dv - 1/2 |x|^2 du^2
    lam = _combo(n, {0: "-(x1^2+x2^2+x3^2+x4^2)/4", 5: "1/2"})
    theta = _flat_theta(n, 2, lambda a: 1 + 2 * a, lambda a: 2 + 2 * a)
    cf = CoframeField.from_strings(ch, kap, lam, theta, name="cahen-wallach-6")
    from .torsion import COMPONENT_NAMES
    return CatalogEntry(
        "cahen-wallach-6", cf, "six-dimensional Cahen–Wallach (Nappi–Witten) space, kappa = du",
        "supergravity example", expected_zero=tuple(COMPONENT_NAMES),
        expected_flags={"torsion_free": True, "kundt": True},
        notes="rho = du ^ (dx1 ^ dx2 + dx3 ^ dx4), half of the printed 3-form",
    )


# ---------------------------------------------------------------------------
# Taub–NUT / Fefferman–Einstein family
# ---------------------------------------------------------------------------

def taub_nut_lambda0(m: int) -> str:
    """The fiber function lambda_0(phi) with constants Lam, Lamb, cb."""
    af = [Fraction(1)]
    for j in range(1, m + 1):
        af.append(af[-1] * Fraction(2 * m - 2 * j + 4, 2 * m - 2 * j + 1))
    poly = "+".join(f"({f})*cos(p)^{2 * j}" for j, f in enumerate(af)) + f"-2*({af[m]})*cos(p)^{2 * m + 2}"
    return (f"Lamb/{2 * m + 2}+(Lam/{2 * m + 1}-Lamb/{2 * m + 2})*({poly})"
            f"+cb*cos(p)^{2 * m + 1}*sin(p)")


def taub_nut_family(m: int, rescaled: bool = True) -> CatalogEntry:
    """Lift of a flat Kähler base with the fiber function lambda_0.

    theta^0 = dt + c0 sum(y dx - x dy) with c0 = 1/(4m) so that tau_w = 1
    for g; the catalog metric is g-hat = sec^2(phi) g realised by the conformal
    coframe (sec^2 kappa, sec theta, lambda).
    """
    n = 2 * m + 2
    names = ["t"] + [f"{c}{a + 1}" for a in range(m) for c in "xy"] + ["p"]
    ch = Chart.build([(x, -1, 1) for x in names[:-1]] + [("p", -1.2, 1.2)],
                     [("Lam", -1, 1), ("Lamb", -1, 1), ("cb", -1, 1)])
    c0 = f"1/{4 * m}"
    th0 = {0: "1"}
    for a in range(m):
        th0[1 + 2 * a] = f"{c0}*y{a + 1}"
        th0[2 + 2 * a] = f"-{c0}*x{a + 1}"
    l0 = taub_nut_lambda0(m)
    w = "sec(p)^2" if rescaled else "1"
    s = "sec(p)" if rescaled else "1"
    kap = _combo(n, {j: f"2*{w}*({v})" for j, v in th0.items()})
    lam = _combo(n, {n - 1: "1", **{j: f"({l0})*({v})" for j, v in th0.items()}})
    theta = [_combo(n, {1 + 2 * a: f"{s}*{SQ}", 2 + 2 * a: f"i*{s}*{SQ}"}) for a in range(m)]
    name = f"taub-nut-family-{n}" if rescaled else f"taub-nut-base-{n}"
    cf = CoframeField.from_strings(ch, kap, lam, theta, name=name, convention="lift")
    prov = "Taub–NUT / Fefferman–Einstein example"
    if rescaled:
        exp = [ExpectedComponent("tau_w", {(): "sec(p)^2"}, prov),
               ExpectedComponent("eps", {(): f"{2 * m}*tan(p)"}, prov)]
    else:
        exp = [ExpectedComponent("tau_w", {(): "1"}, prov), ExpectedComponent("eps", {(): "0"}, prov)]
    members = ["G_0^{1,1}", "G_0^{1,3}", "(G_0^{0x1})[-2(m-1)i:1]", "G_1^{0,0}"]
    return CatalogEntry(
        name, cf, f"Fefferman–Einstein / Taub–NUT family over flat C^{m}"
        + (" (metric sec^2(phi) g)" if rescaled else " (metric g)"),
        prov, expected_components=exp,
        expected_zero=("gamma", "sigma", "sigma_hb", "tau", "tau_o", "zeta", "E", "G_a", "G3", "Gh",
                       "Go", "B"),
        expected_nonzero=("tau_w",) + (("eps",) if rescaled else ()),
        expected_members=tuple(members),
        expected_flags={"twist_induced": True, "non_shearing": True, "nearly_robinson": True,
                        "involutive": True, "geodesic": True},
        notes="kappa = 2 theta^0 (lift normalisation)",
    )


# ---------------------------------------------------------------------------
# CR lifts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CRLiftSpec:
    """Data for a lift of an almost CR structure to a line bundle.

    ``chart`` has the base coordinates first and the fiber coordinate
    ``fiber`` last.  ``theta0`` and ``theta`` are the CR coframe in
    coordinate components (base coordinates only); ``h`` is a positive
    Hermitian matrix on the total space (``None`` for the identity);
    ``lam_alpha`` and ``lam0`` give lambda = d(fiber) + lam_alpha theta^alpha
    + conj(lam_alpha) thetabar^alpha + lam0 theta^0.
    """

    chart: Chart
    theta0: Tuple[str, ...]
    theta: Tuple[Tuple[str, ...], ...]
    h: Optional[Tuple[Tuple[str, ...], ...]] = None
    lam_alpha: Tuple[str, ...] = ()
    lam0: str = "0"
    fiber: str = "v"
    name: str = "lift"


def build_lift(spec: CRLiftSpec) -> CoframeField:
    """Coframe kappa = 2 theta^0, theta^alpha = theta^alpha, lambda as specified."""
    ch = spec.chart
    n, m = ch.n, ch.m
    names = ch.coordinate_names
    if names[-1] != spec.fiber:
        raise GeometryError("the fiber coordinate must be the last chart coordinate")
    p = lambda s: s if isinstance(s, Expr) else parse_expr(s, ch)  # noqa: E731
    th0 = [p(s) for s in spec.theta0]
    th = [[p(s) for s in row] for row in spec.theta]
    if len(th0) != n or len(th) != m or any(len(r) != n for r in th):
        raise GeometryError("CR coframe has the wrong shape")
    for e in th0 + [x for r in th for x in r]:
        if spec.fiber in free_symbols(e):
            raise GeometryError("the CR coframe must not depend on the fiber coordinate")
    if not (th0[-1] == as_expr(0) and all(r[-1] == as_expr(0) for r in th)):
        raise GeometryError("the CR coframe must not have a fiber component")
    la = [p(s) for s in spec.lam_alpha] or [as_expr(0)] * m
    l0 = p(spec.lam0)
    lam = []
    for j in range(n):
        e = as_expr(1) if j == n - 1 else as_expr(0)
        e = e + l0 * th0[j]
        for a in range(m):
            e = e + la[a] * th[a][j] + conj(la[a]) * conj(th[a][j])
        lam.append(e)
    h = None if spec.h is None else tuple(tuple(p(s) for s in r) for r in spec.h)
    return CoframeField(ch, tuple(2 * x for x in th0), tuple(lam), tuple(tuple(r) for r in th), h,
                        convention="lift", name=spec.name)


def _rand_term(rng: np.random.Generator, names: Sequence[str], amp: float = 0.3) -> str:
    a, b = rng.normal(size=2) * amp
    v1, v2 = rng.choice(list(names), 2)
    f = rng.choice(["sin", "cos"])
    return f"({a:.4f})*{f}({b:.4f}*{v1}+{v2})"


def random_lift_spec(m: int, seed: int, kundt: bool = False, expanding: bool = False) -> CRLiftSpec:
    """A random CR lift over a (2m+1)-dimensional chart.

    ``kundt`` forces theta^0 = du, v-independent h and lambda components
    allowed to depend on v; ``expanding`` multiplies h by exp(2 v a) so the
    congruence expands.
    """
    rng = np.random.default_rng(seed)
    base = ["u"] + [f"{c}{a + 1}" for a in range(m) for c in "xy"]
    ch = Chart.build([(x, -1, 1) for x in base] + [("v", -1, 1)])
    n = 2 * m + 2
    def rt():
        return _rand_term(rng, base)
    if kundt:
        th0 = _basis(n, 0)
    else:
        th0 = ["1"] + [rt() for _ in range(n - 2)] + ["0"]
        # make theta^0 contact-like with a definite twist
        for a in range(m):
            th0[1 + 2 * a] = f"({th0[1 + 2 * a]})+y{a + 1}/2"
            th0[2 + 2 * a] = f"({th0[2 + 2 * a]})-x{a + 1}/2"
    th = []
    for a in range(m):
        row = []
        for j in range(n - 1):
            if j == 1 + 2 * a:
                lead = "1"
            elif j == 2 + 2 * a:
                lead = "i"
            else:
                lead = "0"
            row.append(f"{lead}+({rt()})+i*({rt()})")
        th.append(row + ["0"])
    h = None
    if not kundt or expanding:
        hv = "exp(0.6*v)" if expanding else "1"
        vdep = "" if kundt else "+0.1*v^2"
        upper = {}
        for a in range(m):
            for b in range(a, m):
                if a == b:
                    extra = "" if kundt else f"+0.2*({rt()})^2"
                    upper[a, b] = f"{hv}*(1{extra}{vdep})"
                else:
                    upper[a, b] = f"{hv}*0.1*(({rt()})+i*({rt()}){'' if kundt else '+v'})"
        h = tuple(tuple(upper[a, b] if a <= b else to_string(conj(parse_expr(upper[b, a], ch)))
                        for b in range(m)) for a in range(m))
    lam_alpha = tuple(f"({rt()})+i*({rt()})+0.1*v" for _ in range(m))
    lam0 = f"{rt()}+0.2*v^2"
    return CRLiftSpec(ch, tuple(th0), tuple(tuple(r) for r in th), h, lam_alpha, lam0, "v",
                      name=f"lift-m{m}-s{seed}")


def random_coframe(m: int, seed: int, hermitian: bool = True, amp: float = 0.2) -> CoframeField:
    """A generic Robinson coframe close to the flat one, with no special torsion.

    Every coframe component gets a random smooth perturbation depending on all
    coordinates, so the congruence is in general neither geodesic nor
    twist-free.  With ``hermitian`` the screen matrix h is a random positive
    Hermitian field as well.
    """
    rng = np.random.default_rng(seed)
    names = ["u"] + [f"{c}{a + 1}" for a in range(m) for c in "xy"] + ["v"]
    ch = Chart.build([(x, -1, 1) for x in names])
    n = 2 * m + 2

    def rt():
        return _rand_term(rng, names, amp)

    kappa = [f"{'1' if j == 0 else '0'}+({rt()})" for j in range(n)]
    lam = [f"{'1' if j == n - 1 else '0'}+({rt()})" for j in range(n)]
    theta = []
    for a in range(m):
        row = []
        for j in range(n):
            lead = SQ if j == 1 + 2 * a else (f"i*{SQ}" if j == 2 + 2 * a else "0")
            row.append(f"{lead}+({rt()})+i*({rt()})")
        theta.append(row)
    h = None
    if hermitian:
        upper = {}
        for a in range(m):
            for b in range(a, m):
                upper[a, b] = (f"1+0.3*({rt()})^2" if a == b else f"0.2*(({rt()})+i*({rt()}))")
        h = tuple(tuple(upper[a, b] if a <= b else to_string(conj(parse_expr(upper[b, a], ch)))
                        for b in range(m)) for a in range(m))
    return CoframeField.from_strings(ch, kappa, lam, theta, h, name=f"random-m{m}-s{seed}")


def kundt_generic6() -> CatalogEntry:
    spec = random_lift_spec(2, 11, kundt=True)
    cf = build_lift(spec).replace(name="kundt-generic-6")
    return CatalogEntry(
        "kundt-generic-6", cf, "synthetic nearly Robinson lift of Kundt type (theta^0 = du)",
        "lift proposition", expected_zero=("gamma", "eps", "tau_w", "tau", "tau_o", "sigma_hb",
                                            "sigma", "zeta"),
        expected_flags={"kundt": True, "nearly_robinson": True, "geodesic": True},
    )


def rt_generic6() -> CatalogEntry:
    spec = random_lift_spec(2, 12, kundt=True, expanding=True)
    cf = build_lift(spec).replace(name="rt-generic-6")
    return CatalogEntry(
        "rt-generic-6", cf, "synthetic lift of Robinson–Trautman type (h = exp(0.6 v) h0)",
        "lift proposition", expected_zero=("gamma", "tau_w", "tau", "tau_o", "sigma_hb", "sigma"),
        expected_nonzero=("eps",),
        expected_flags={"robinson_trautman": True, "nearly_robinson": True, "geodesic": True},
    )


def kundt_almost_kahler6() -> CatalogEntry:
    """Kundt lift whose leaves carry the Kodaira–Thurston almost Kähler structure.

    Base coframe e1 = dx, e2 = dy, e3 = dz, e4 = dw - x dy with
    theta^1 = e1 + i e3, theta^2 = e2 + i e4: the 2-form e13 + e24 is closed
    while the almost complex structure is not integrable.
    """
    names = ["u", "x", "y", "z", "w", "v"]
    ch = Chart.build([(x, -1, 1) for x in names])
    spec = CRLiftSpec(ch, tuple(_basis(6, 0)),
                      (("0", "1", "0", "i", "0", "0"), ("0", "0", "1-i*x", "0", "i", "0")),
                      (("1/2", "0"), ("0", "1/2")), ("0.3*u+0.1*v*x", "0.2*y"), "u*x+v^2/3", "v",
                      name="kundt-almost-kahler-6")
    cf = build_lift(spec)
    return CatalogEntry(
        "kundt-almost-kahler-6", cf, "Kundt lift over the Kodaira–Thurston almost Kähler 4-manifold",
        "Gray–Hervella table", expected_zero=("gamma", "eps", "tau_w", "tau", "tau_o", "sigma_hb",
                                               "sigma", "zeta", "G3", "Go", "G_a"),
        expected_nonzero=("Gh",),
        expected_flags={"kundt": True, "nearly_robinson": True},
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_BUILDERS: Dict[str, Callable[[], CatalogEntry]] = {
    "minkowski-4": lambda: minkowski(1),
    "minkowski-6": lambda: minkowski(2),
    "minkowski-8": lambda: minkowski(3),
    "kerr-nut-ads-4": lambda: kerr_nut_ads(1),
    "kerr-nut-ads-6": lambda: kerr_nut_ads(2),
    "cahen-wallach-6": cahen_wallach6,
    "taub-nut-family-6": lambda: taub_nut_family(2),
    "taub-nut-family-8": lambda: taub_nut_family(3),
    "taub-nut-base-6": lambda: taub_nut_family(2, rescaled=False),
    "myers-perry-6": myers_perry6,
    "kundt-generic-6": kundt_generic6,
    "rt-generic-6": rt_generic6,
    "kundt-almost-kahler-6": kundt_almost_kahler6,
}

_CACHE: Dict[str, CatalogEntry] = {}


def entry_names() -> List[str]:
    return list(_BUILDERS)


def get_entry(name: str) -> CatalogEntry:
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


def catalog_entries() -> List[CatalogEntry]:
    return [get_entry(n) for n in _BUILDERS]


def expected_residuals(entry: CatalogEntry, comps, samples: SampleSet) -> Dict[str, Tuple[float, str]]:
    """Scale-relative mismatch of every expected formula: name -> (residual, status)."""
    out: Dict[str, Tuple[float, str]] = {}
    for k, ec in enumerate(entry.expected_components):
        arr = np.asarray(comps.get(ec.key))
        want = np.zeros_like(arr, dtype=complex)
        for idx, src in ec.values.items():
            want[(slice(None),) + tuple(idx)] = evaluate(entry.expr(src), samples)
        diff = np.abs(arr - want).reshape(arr.shape[0], -1).max(1)
        ref = np.maximum(np.abs(want).reshape(arr.shape[0], -1).max(1), 1.0)
        key = ec.key if ec.status == "exact" else f"{ec.key}[{ec.status}]"
        if key in out:
            key = f"{key}#{k}"
        out[key] = (float((diff / ref).max()), ec.status)
    return out
