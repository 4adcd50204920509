"""Intrinsic-torsion components of an almost Robinson structure.

Given nabla kappa and nabla rho in coordinates, the pieces are frame
contractions with the dual frame (ell, e_alpha, ebar_alpha, k).  Index rules:
a lower 0 contracts with ell, an upper 0 with k, and the first slot of a
covariant derivative is the differentiation direction.  Screen indices are
complex: ``X[alpha, beta]`` of an array stands for X_{alpha beta}, and for
mixed objects such as sigma_{alpha betabar} the array index order follows the
written index order.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Dict, Iterable, Optional, Tuple

import numpy as np

from .connection import Connection, levi_civita
from .geometry import CoframeField, FrameData, frame_data
from .expr import Expr, SampleSet, as_expr, conj, evaluate, parse_expr

__all__ = [
    "TorsionComponents", "COMPONENT_NAMES", "extract_components", "components_of",
    "decompose_G", "null_rotation_law", "boost_rotate", "verify_coframe_change",
    "null_rotate_coframe", "CoframeChangeReport", "symmetry_residuals",
]

# names used in reports (stable keys)
COMPONENT_NAMES = ("gamma", "eps", "tau_w", "tau", "tau_o", "sigma_hb", "sigma", "zeta",
                   "E", "G_a", "G3", "Gh", "Go", "B")


@dataclass
class TorsionComponents:
    """Irreducible intrinsic-torsion pieces at a batch of samples.

    Shapes (N samples, screen dimension m): ``gamma``, ``E``, ``G_a``: (N, m);
    ``eps``, ``tau_w``: (N,); ``tau`` (tau_{ab}), ``tau_o`` (tau°_{a bbar}),
    ``sigma_hb`` (sigma_{a bbar}), ``sigma`` (sigma_{ab}), ``zeta``, ``B``:
    (N, m, m); ``G3``, ``Gh`` (hook part), ``Go`` (G°_{abar b c} stored as
    [a, b, c]): (N, m, m, m).  The raw blocks ``G`` (G_{abc}), ``Gbar``
    (G_{abar bc}), ``tau_hb`` (tau_{a bbar}) and ``Khb`` ((nabla kappa)_{a bbar})
    are kept for cross-checks.  ``scale`` is the per-sample magnitude used for
    relative zero tests.
    """

    m: int
    gamma: np.ndarray
    eps: np.ndarray
    tau_w: np.ndarray
    tau: np.ndarray
    tau_o: np.ndarray
    sigma_hb: np.ndarray
    sigma: np.ndarray
    zeta: np.ndarray
    E: np.ndarray
    G_a: np.ndarray
    G3: np.ndarray
    Gh: np.ndarray
    Go: np.ndarray
    B: np.ndarray
    H: np.ndarray
    scale: np.ndarray
    G: Optional[np.ndarray] = None
    Gbar: Optional[np.ndarray] = None
    tau_hb: Optional[np.ndarray] = None
    Khb: Optional[np.ndarray] = None
    Kf: Optional[np.ndarray] = None
    Rf: Optional[np.ndarray] = None

    @property
    def n_samples(self) -> int:
        return int(self.eps.shape[0])

    def get(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {k: getattr(self, k) for k in COMPONENT_NAMES}

    @property
    def gamma_i(self) -> np.ndarray:
        """gamma_i in the complex basis (gamma_alpha, gamma_alphabar)."""
        return np.concatenate([self.gamma, np.conj(self.gamma)], axis=1)

    @property
    def Hinv(self) -> np.ndarray:
        return np.linalg.inv(np.swapaxes(self.H, 1, 2))

    def replace(self, **kw) -> "TorsionComponents":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(kw)
        return TorsionComponents(**data)

    def take(self, idx) -> "TorsionComponents":
        data = {}
        for f in fields(self):
            v = getattr(self, f.name)
            data[f.name] = v[idx] if isinstance(v, np.ndarray) else v
        return TorsionComponents(**data)


def decompose_G(G: np.ndarray, Gbar: np.ndarray, H: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split G_{abc} and G_{abar bc} into G^[3], the hook part, G_a and G°."""
    m = G.shape[-1]
    G3 = (G + np.transpose(G, (0, 2, 3, 1)) + np.transpose(G, (0, 3, 1, 2))) / 3.0
    Gh = (2 * G - np.transpose(G, (0, 2, 3, 1)) - np.transpose(G, (0, 3, 1, 2))) / 3.0
    Hinv = np.linalg.inv(np.swapaxes(H, 1, 2))
    # G_a = h^{b cbar} G_{cbar b a}; Gbar[s, c, b, a] = G_{cbar b a}
    Ga = np.einsum("sbc,scba->sa", Hinv, Gbar)
    if m >= 2:
        # G°_{abar b c} = G_{abar b c} + 2/(m-1) G_[b h_c]abar ; h_{c abar} = H[c, a]
        corr = (np.einsum("sb,sca->sabc", Ga, H) - np.einsum("sc,sba->sabc", Ga, H)) / (m - 1)
        Go = Gbar + corr
    else:
        Go = np.zeros_like(Gbar)
        Ga = np.zeros_like(Ga)
    return G3, Gh, Ga, Go


def extract_components(conn: Connection) -> TorsionComponents:
    """Contract nabla kappa and nabla rho with the dual frame and decompose."""
    fd = conn.fd
    m, n = fd.m, fd.n
    F = fd.F
    Kf = np.einsum("sab,saA,sbB->sAB", conn.nk, F, F)
    Rf = np.einsum("sabcd,saA,sbB,scC,sdD->sABCD", conn.nr, F, F, F, F)
    H = fd.H
    Hinv = np.linalg.inv(np.swapaxes(H, 1, 2))
    u = slice(1, 1 + m)
    b = slice(1 + m, 1 + 2 * m)
    L, K = 0, n - 1
    gamma = Kf[:, K, u]
    E = Kf[:, L, u]
    Kab = Kf[:, u, u]
    Kahb = Kf[:, u, b]                               # K_{a bbar}
    Khba = np.swapaxes(Kf[:, b, u], 1, 2)           # K_{bbar a} stored [a, b]
    eps = np.einsum("sab,sab->s", Hinv, Kahb + Khba)
    tau_hb = 0.5 * (Kahb - Khba)
    tau_w = 2j * np.einsum("sab,sab->s", Hinv, tau_hb)
    tau_o = tau_hb + (1j / (2 * m)) * tau_w[:, None, None] * H
    sigma_hb = 0.5 * (Kahb + Khba) - (eps / (2 * m))[:, None, None] * H
    sigma = 0.5 * (Kab + np.swapaxes(Kab, 1, 2))
    tau = 0.5 * (Kab - np.swapaxes(Kab, 1, 2))
    zeta = Rf[:, K, u, u, L]
    G = Rf[:, u, u, u, L]
    Gbar = Rf[:, b, u, u, L]
    B = Rf[:, L, u, u, L]
    G3, Gh, Ga, Go = decompose_G(G, Gbar, H)
    scale = fd.scale
    return TorsionComponents(m, gamma, eps, tau_w, tau, tau_o, sigma_hb, sigma, zeta, E, Ga, G3, Gh,
                             Go, B, H, scale, G, Gbar, tau_hb, Kahb, Kf, Rf)


def components_of(cf: CoframeField, samples: SampleSet) -> TorsionComponents:
    """Convenience: frame data, Levi-Civita connection and components in one call."""
    return extract_components(levi_civita(cf, samples))


# ---------------------------------------------------------------------------
# symmetry checks
# ---------------------------------------------------------------------------

def symmetry_residuals(c: TorsionComponents) -> Dict[str, float]:
    """Maximum scale-relative violation of every structural identity."""
    m = c.m
    sc = (1.0 + c.scale)
    H = c.H
    Hinv = c.Hinv
    sw = lambda x: np.swapaxes(x, 1, 2)  # noqa: E731

    def mx(x, power=2):
        x = np.abs(np.asarray(x))
        if x.size == 0:
            return 0.0
        return float(np.max(x.reshape(x.shape[0], -1).max(1) / sc ** power))

    out = {
        "sigma_symmetric": mx(c.sigma - sw(c.sigma)),
        "tau_antisymmetric": mx(c.tau + sw(c.tau)),
        "zeta_antisymmetric": mx(c.zeta + sw(c.zeta), 3),
        "B_antisymmetric": mx(c.B + sw(c.B), 4),
        "sigma_hb_tracefree": mx(np.einsum("sab,sab->s", Hinv, c.sigma_hb)),
        "tau_o_tracefree": mx(np.einsum("sab,sab->s", Hinv, c.tau_o)),
        "Go_tracefree": mx(np.einsum("sba,sabc->sc", Hinv, c.Go), 4),
        "sigma_hb_hermitian": mx(np.conj(c.sigma_hb) - sw(c.sigma_hb)),
        "tau_o_antihermitian": mx(np.conj(c.tau_o) + sw(c.tau_o)),
        "G3_alternating": mx(c.G3 + np.swapaxes(c.G3, 1, 2), 4),
        "Gh_no_alternating_part": mx(c.Gh + np.transpose(c.Gh, (0, 2, 3, 1)) + np.transpose(c.Gh, (0, 3, 1, 2)), 4),
        "G_reconstruction": mx(c.G3 + c.Gh - c.G, 4) if c.G is not None else 0.0,
        "eps_real": mx(c.eps.imag),
        "tau_w_real": mx(c.tau_w.imag),
    }
    if c.Gbar is not None and m >= 2:
        rec = c.Go - (np.einsum("sb,sca->sabc", c.G_a, H) - np.einsum("sc,sba->sabc", c.G_a, H)) / (m - 1)
        out["Gbar_reconstruction"] = mx(rec - c.Gbar, 4)
    if m == 1:
        out["m1_degenerate"] = max(mx(c.tau), mx(c.zeta, 3), mx(c.G, 4) if c.G is not None else 0,
                                   mx(c.G_a, 4), mx(c.Go, 4), mx(c.B, 4), mx(c.tau_o), mx(c.sigma_hb))
    if m == 2:
        out["m2_degenerate"] = max(mx(c.G3, 4), mx(c.Go, 4))
    # real-index form of the optical-level identities: h^{ij} sigma_ij = 0 and tau_ij antisymmetric
    if c.Kf is not None:
        n = 2 * m + 2
        Ks = c.Kf[:, 1:n - 1, 1:n - 1]
        sym = 0.5 * (Ks + sw(Ks))
        M = np.zeros((c.n_samples, 2 * m, 2 * m), dtype=complex)
        M[:, :m, m:] = H
        M[:, m:, :m] = sw(H)
        Minv = np.linalg.inv(M)
        eps = np.einsum("sij,sij->s", Minv, sym)
        out["eps_trace_consistency"] = mx(eps - c.eps)
    return out


# ---------------------------------------------------------------------------
# coframe changes
# ---------------------------------------------------------------------------

def _as_field(cf: CoframeField, x) -> Expr:
    return parse_expr(x, cf.chart) if isinstance(x, str) else as_expr(x)


def null_rotate_coframe(cf: CoframeField, phi_up: Iterable, varphi=0, psi=None) -> CoframeField:
    """Apply kappa -> e^varphi kappa, theta^a -> psi_b^a theta^b + phi^a kappa
    and the matching lambda, keeping g fixed.

    ``phi_up`` holds the complex functions phi^alpha; ``psi`` is an m x m
    matrix (nested sequences of Expr or numbers) with psi[b][a] = psi_b^a that
    must be unitary for h.
    """
    from .expr import add, exp
    m, n = cf.m, cf.n
    h = cf.h_matrix()
    ph = [_as_field(cf, p) for p in phi_up]
    if len(ph) != m:
        raise ValueError(f"need {m} functions phi^alpha")
    if psi is None:
        psi = [[1 if a == b else 0 for a in range(m)] for b in range(m)]
    P = [[_as_field(cf, x) for x in row] for row in psi]
    varphi = _as_field(cf, varphi)
    ev = exp(varphi)
    emv = exp(-varphi)
    phb = [conj(p) for p in ph]
    # phi_alpha = h_{alpha betabar} phi^betabar
    ph_lo = [add(*[h[a][b] * phb[b] for b in range(m)]) for a in range(m)]
    phb_lo = [conj(p) for p in ph_lo]
    norm = add(*[ph_lo[a] * ph[a] for a in range(m)]) if m else as_expr(0)
    th = cf.theta
    thb = [tuple(conj(x) for x in t) for t in th]
    kappa = tuple(ev * k for k in cf.kappa)
    theta = tuple(tuple(add(*[P[b][a] * th[b][c] for b in range(m)], ph[a] * cf.kappa[c]) for c in range(n))
                  for a in range(m))
    # lambda_hat = e^{-varphi}(lambda - psi_a^b phi_b theta^a - c.c. - phi_a phi^a kappa)
    coef = [add(*[P[a][b] * ph_lo[b] for b in range(m)]) for a in range(m)]
    lam = []
    for c in range(n):
        terms = [cf.lam[c], -norm * cf.kappa[c]]
        for a in range(m):
            terms.append(-coef[a] * th[a][c])
            terms.append(-conj(coef[a]) * thb[a][c])
        lam.append(emv * add(*terms))
    return cf.replace(kappa=kappa, theta=theta, lam=tuple(lam), name=(cf.name + "~") if cf.name else "")


def null_rotation_law(c: TorsionComponents, phi_up: np.ndarray) -> TorsionComponents:
    """Predicted components after theta -> theta + phi^alpha kappa (varphi = 0, psi = id).

    ``phi_up[s, alpha]`` are the values of phi^alpha at each sample.  Only the
    algebraic transformation rules are used; no derivatives of phi enter.
    """
    m = c.m
    H = c.H
    Hinv = c.Hinv
    p = phi_up                                            # phi^alpha
    pl = np.einsum("sab,sb->sa", H, np.conj(p))           # phi_alpha = h_{a bbar} phi^bbar
    g = c.gamma                                           # gamma_alpha
    gb = np.conj(g)                                       # gamma_alphabar
    gu = np.einsum("sab,sb->sa", Hinv, gb)                # gamma^alpha = h^{a bbar} gamma_bbar
    phb_lo = np.conj(pl)                                  # phi_alphabar
    pp = np.einsum("sa,sa->s", p, pl)                     # phi^b phi_b
    gp = np.einsum("sa,sa->s", g, p)                      # gamma_a phi^a
    gup = np.einsum("sa,sa->s", gu, pl)                   # gamma^a phi_a
    outer = lambda x, y: np.einsum("sa,sb->sab", x, y)    # noqa: E731
    eps = c.eps + gp + gup
    tau_w = c.tau_w - 1j * (gp - gup)
    tau = c.tau - 0.5 * (outer(g, pl) - outer(pl, g))
    sigma = c.sigma + 0.5 * (outer(g, pl) + outer(pl, g))

    def tracefree(X):
        tr = np.einsum("sab,sab->s", Hinv, X)
        return X - (tr / m)[:, None, None] * H

    # mixed (alpha, betabar) objects: gamma_alpha phi_betabar and gamma_betabar phi_alpha
    g_phb = outer(g, phb_lo)
    gb_ph = outer(pl, gb)
    tau_o = c.tau_o + tracefree(-0.5 * g_phb + 0.5 * gb_ph)
    sigma_hb = c.sigma_hb + tracefree(0.5 * g_phb + 0.5 * gb_ph)
    zeta = c.zeta - 4j * 0.5 * (outer(g, pl) - outer(pl, g))
    # E_alpha
    tau_o_phb = np.einsum("sab,sb->sa", c.tau_o, np.conj(p))     # tau°_{a bbar} phi^bbar
    sig_hb_phb = np.einsum("sab,sb->sa", c.sigma_hb, np.conj(p))
    E = (c.E + np.einsum("sab,sb->sa", c.tau, p) - np.einsum("sab,sb->sa", c.sigma, p)
         + tau_o_phb - sig_hb_phb - (1j / (2 * m)) * c.tau_w[:, None] * pl
         - (1.0 / (2 * m)) * c.eps[:, None] * pl - g * pp[:, None])
    # G_alpha
    if m >= 2:
        Ga = (c.G_a - 2j * tau_o_phb + 2j * sig_hb_phb + ((m - 1) / m) * c.tau_w[:, None] * pl
              - ((m - 1) / m) * 1j * c.eps[:, None] * pl + np.einsum("sb,sba->sa", p, c.zeta)
              - 2j * gp[:, None] * pl + 2j * pp[:, None] * g)
    else:
        Ga = c.G_a
    # G^[3] += (-4 i tau_[ab + zeta_[ab) phi_c]
    X = -4j * c.tau + c.zeta
    T3 = np.einsum("sab,sc->sabc", X, pl)
    alt = lambda T: (T + np.transpose(T, (0, 2, 3, 1)) + np.transpose(T, (0, 3, 1, 2))) / 3.0  # noqa: E731
    G3 = c.G3 + alt(T3)
    # hook part: G^⊓_(ab)c += -(2i tau_c(a + zeta_c(a) phi_b) + 2i sigma_c(a phi_b) - 2i sigma_ab phi_c
    #                         - 2i phi_(a gamma_b) phi_c + 2i phi_a phi_b gamma_c
    Y = 2j * c.tau + c.zeta                                  # Y[c, a]
    S = (-0.5 * (np.einsum("sca,sb->sabc", Y, pl) + np.einsum("scb,sa->sabc", Y, pl))
         + 1j * (np.einsum("sca,sb->sabc", c.sigma, pl) + np.einsum("scb,sa->sabc", c.sigma, pl))
         - 2j * np.einsum("sab,sc->sabc", c.sigma, pl)
         - 1j * (np.einsum("sa,sb,sc->sabc", pl, g, pl) + np.einsum("sb,sa,sc->sabc", pl, g, pl))
         + 2j * np.einsum("sa,sb,sc->sabc", pl, pl, g))
    Gh = c.Gh + _hook_from_sym(S)
    # G°: += (4i tau°_[b|abar phi_|c] - 4i sigma_[b|abar phi_|c] + phi_abar zeta_bc - 4i phi_abar gamma_[b phi_c])°
    if m >= 2:
        # tau°_{b abar} stored tau_o[s, b, a]
        A1 = np.einsum("sba,sc->sabc", c.tau_o, pl)
        A2 = np.einsum("sba,sc->sabc", c.sigma_hb, pl)
        W = (2j * (A1 - np.swapaxes(A1, 2, 3)) - 2j * (A2 - np.swapaxes(A2, 2, 3))
             + np.einsum("sa,sbc->sabc", phb_lo, c.zeta)
             - 2j * np.einsum("sa,sbc->sabc", phb_lo, outer(g, pl) - outer(pl, g)))
        Go = c.Go + _go_tracefree(W, H, Hinv)
    else:
        Go = c.Go
    # B
    if m >= 2:
        Ga0, E0 = c.G_a, c.E
        V = (2.0 / (m - 1)) * Ga0 - 4j * E0
        Bd = 0.5 * (outer(V, pl) - outer(pl, V))
        Bd = Bd - np.einsum("sc,scab->sab", p, c.G3) - np.einsum("sc,scab->sab", p, c.Gh)
        Bd = Bd - np.einsum("sc,scab->sab", np.conj(p), c.Go)
        t1 = np.einsum("sc,sca,sb->sab", p, c.tau, pl)
        Bd = Bd + 2j * (t1 - np.swapaxes(t1, 1, 2))
        Bd = Bd - pp[:, None, None] * c.zeta
        t2 = np.einsum("sc,sca,sb->sab", p, c.sigma, pl)
        Bd = Bd + 2j * (t2 - np.swapaxes(t2, 1, 2))
        t3 = np.einsum("sc,sac,sb->sab", np.conj(p), c.tau_o, pl)
        Bd = Bd - 2j * (t3 - np.swapaxes(t3, 1, 2))
        t4 = np.einsum("sc,sac,sb->sab", np.conj(p), c.sigma_hb, pl)
        Bd = Bd + 2j * (t4 - np.swapaxes(t4, 1, 2))
        t5 = pp[:, None, None] * outer(g, pl)
        Bd = Bd + 2j * (t5 - np.swapaxes(t5, 1, 2))
        B = c.B + Bd
    else:
        B = c.B
    return c.replace(eps=eps, tau_w=tau_w, tau=tau, sigma=sigma, tau_o=tau_o, sigma_hb=sigma_hb, zeta=zeta,
                     E=E, G_a=Ga, G3=G3, Gh=Gh, Go=Go, B=B, G=None, Gbar=None, tau_hb=None, Khb=None,
                     Kf=None, Rf=None)


def _hook_from_sym(S: np.ndarray) -> np.ndarray:
    """Hook-type tensor P_{abc} (antisymmetric in bc, no alternating part) with P_(ab)c = S_abc.

    ``S`` must be symmetric in its first two slots and satisfy S_(abc) = 0.
    The inverse map is P_abc = 2/3 (S_abc - S_acb).
    """
    return (2.0 / 3.0) * (S - np.swapaxes(S, 2, 3))


def _go_tracefree(W: np.ndarray, H: np.ndarray, Hinv: np.ndarray) -> np.ndarray:
    """Trace-free part of W_{abar b c} (antisymmetric in bc) with respect to h."""
    m = W.shape[-1]
    tr = np.einsum("sba,sabc->sc", Hinv, W)          # h^{b abar} W_{abar b c}
    # remove: W° = W - 1/(m-1) (tr_c h_{b abar} - tr_b h_{c abar}) ; check: trace gives tr - (m tr - tr)/(m-1) = 0
    corr = (np.einsum("sc,sba->sabc", tr, H) - np.einsum("sb,sca->sabc", tr, H)) / (m - 1)
    return W - corr


def boost_rotate(c: TorsionComponents, varphi: np.ndarray, P: np.ndarray) -> TorsionComponents:
    """Components after kappa -> e^varphi kappa, theta -> psi theta (tensorial part).

    ``P[s, b, a] = psi_b^a``.  The new frame is khat = e^varphi k,
    ellhat = e^-varphi ell and ehat_a = sum_b e_b Q[b, a] with Q = (P^T)^{-1};
    nabla kappa and nabla rho both pick up an overall factor e^varphi on the
    components used here.
    """
    Q = np.linalg.inv(np.swapaxes(P, 1, 2))
    Qb = np.conj(Q)
    w = np.exp(varphi)
    one = lambda x, pw: x * (w ** pw).reshape((-1,) + (1,) * (x.ndim - 1))  # noqa: E731
    r1 = lambda x: np.einsum("sb,sba->sa", x, Q)  # noqa: E731
    r2 = lambda x, A, B_: np.einsum("sxy,sxa,syb->sab", x, A, B_)  # noqa: E731
    r3 = lambda x, A: np.einsum("sxyz,sxa,syb,szc->sabc", x, A, Q, Q)  # noqa: E731
    H = r2(c.H, Q, Qb)
    return c.replace(
        gamma=one(r1(c.gamma), 2), E=r1(c.E), eps=one(c.eps, 1), tau_w=one(c.tau_w, 1),
        tau=one(r2(c.tau, Q, Q), 1), sigma=one(r2(c.sigma, Q, Q), 1),
        tau_o=one(r2(c.tau_o, Q, Qb), 1), sigma_hb=one(r2(c.sigma_hb, Q, Qb), 1),
        zeta=one(r2(c.zeta, Q, Q), 1), G_a=r1(c.G_a), G3=r3(c.G3, Q), Gh=r3(c.Gh, Q),
        Go=r3(c.Go, Qb), B=one(r2(c.B, Q, Q), -1), H=H,
        G=None, Gbar=None, tau_hb=None, Khb=None, Kf=None, Rf=None)


@dataclass
class CoframeChangeReport:
    """Comparison of predicted and recomputed components after a coframe change."""

    residuals: Dict[str, float]
    tol: float
    predicted: TorsionComponents
    actual: TorsionComponents

    @property
    def ok(self) -> bool:
        return all(v < self.tol for v in self.residuals.values())

    def failures(self) -> Dict[str, float]:
        return {k: v for k, v in self.residuals.items() if not v < self.tol}


def compare_components(a: TorsionComponents, b: TorsionComponents, names=COMPONENT_NAMES) -> Dict[str, float]:
    """Scale-relative maximum difference per component."""
    out = {}
    for nm in names:
        x, y = a.get(nm), b.get(nm)
        d = np.abs(np.asarray(x) - np.asarray(y))
        ref = np.maximum(np.abs(x), np.abs(y))
        N = d.shape[0]
        if d.size == 0:
            out[nm] = 0.0
            continue
        dd = d.reshape(N, -1).max(1)
        rr = ref.reshape(N, -1).max(1)
        out[nm] = float(np.max(dd / (1.0 + rr)))
    return out


def verify_coframe_change(cf: CoframeField, samples: SampleSet, phi_up: Iterable, varphi=0, psi=None,
                          tol: float = 1e-8, unitary_tol: float = 1e-10) -> CoframeChangeReport:
    """Recompute components after a coframe change and compare with the laws.

    The change is split into a null rotation theta -> theta + phi'^alpha kappa
    (with phi' = psi^{-1} phi) followed by a boost/rotation, which acts
    tensorially.
    """
    m = cf.m
    if psi is None:
        psi = [[1 if a == b else 0 for a in range(m)] for b in range(m)]
    psi_e = [[_as_field(cf, x) for x in row] for row in psi]
    phi_up = [_as_field(cf, p) for p in phi_up]
    varphi = _as_field(cf, varphi)
    before = components_of(cf, samples)
    after_cf = null_rotate_coframe(cf, phi_up, varphi, psi_e)
    after = components_of(after_cf, samples)
    cache: dict = {}
    N = len(samples)
    P = np.empty((N, m, m), dtype=complex)
    for b in range(m):
        for a in range(m):
            P[:, b, a] = evaluate(psi_e[b][a], samples, cache=cache)
    # unitarity: h_{a bbar} = h_{c dbar} psi_a^c conj(psi_b^d)
    Hp = np.einsum("scd,sac,sbd->sab", before.H, P, np.conj(P))
    if np.max(np.abs(Hp - before.H)) > unitary_tol * (1 + np.max(np.abs(before.H))):
        raise ValueError("psi is not unitary for h")
    phi = np.stack([evaluate(as_expr(p), samples, cache=cache) for p in phi_up], axis=1) if m else np.zeros((N, 0))
    vp = evaluate(as_expr(varphi), samples, cache=cache).real
    # phi'^b = (psi^{-1})^b_a phi^a: phi^a = sum_b P[b, a] phi'^b
    phi_p = np.linalg.solve(np.swapaxes(P, 1, 2), phi[..., None])[..., 0]
    pred = boost_rotate(null_rotation_law(before, phi_p), vp, P)
    res = compare_components(pred, after)
    return CoframeChangeReport(res, tol, pred, after)
