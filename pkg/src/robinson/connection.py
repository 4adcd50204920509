"""Levi-Civita connection, covariant derivatives of kappa and rho, and
connections adapted to the almost Robinson structure.

Everything here lives in the coordinate basis; frame contractions happen in
:mod:`robinson.torsion`.  Arrays carry the sample index first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import CoframeField, FrameData, MetricField, frame_data
from .expr import SampleSet

__all__ = [
    "Connection", "christoffel", "christoffel_from_metric", "nabla_kappa", "nabla_rho",
    "levi_civita", "metric_compatibility_residual", "CompatibleConnection",
    "build_compatible_connection",
]


def christoffel(dg: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """Gamma[s, c, a, b] = 1/2 g^{cd} (d_a g_bd + d_b g_ad - d_d g_ab).

    ``dg[s, x, y, z]`` is the derivative of g_yz along coordinate x.
    """
    T = dg + np.swapaxes(dg, 1, 2) - np.transpose(dg, (0, 2, 3, 1))
    return 0.5 * np.einsum("scd,sabd->scab", ginv, T)


def christoffel_from_metric(metric: MetricField, samples: SampleSet) -> np.ndarray:
    """Christoffel symbols from the expression-level metric (symbolic derivatives)."""
    g = metric.values(samples)
    return christoffel(metric.derivatives(samples), np.linalg.inv(g))


def nabla_kappa(gamma: np.ndarray, kappa: np.ndarray, dkappa: np.ndarray) -> np.ndarray:
    """(nabla kappa)[s, a, b] = d_a kappa_b - Gamma^c_ab kappa_c."""
    return dkappa - np.einsum("scab,sc->sab", gamma, kappa)


def nabla_rho(gamma: np.ndarray, rho: np.ndarray, drho: np.ndarray) -> np.ndarray:
    """(nabla rho)[s, a, b, c, d] for a 3-form rho; stays antisymmetric in bcd."""
    return (drho - np.einsum("seab,secd->sabcd", gamma, rho)
            - np.einsum("seac,sbed->sabcd", gamma, rho)
            - np.einsum("sead,sbce->sabcd", gamma, rho))


def metric_compatibility_residual(gamma: np.ndarray, g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """d_a g_bc - Gamma^d_ab g_dc - Gamma^d_ac g_bd."""
    return dg - np.einsum("sdab,sdc->sabc", gamma, g) - np.einsum("sdac,sbd->sabc", gamma, g)


@dataclass
class Connection:
    """Levi-Civita data at a batch of samples.

    ``gamma[s, c, a, b]`` is Gamma^c_ab, ``nk[s, a, b]`` is nabla_a kappa_b and
    ``nr[s, a, b, c, d]`` is nabla_a rho_bcd; the first slot is always the
    derivative direction.
    """

    fd: FrameData
    gamma: np.ndarray
    nk: np.ndarray
    nr: np.ndarray

    @property
    def samples(self) -> SampleSet:
        return self.fd.samples

    def at(self, k: int) -> "Connection":
        """Restrict to a single sample (a ConnectionAtPoint in spirit)."""
        return Connection(_take_fd(self.fd, k), self.gamma[k:k + 1], self.nk[k:k + 1], self.nr[k:k + 1])

    def compatibility_residual(self) -> np.ndarray:
        return metric_compatibility_residual(self.gamma, self.fd.g, self.fd.dg)

    def dkappa_residual(self) -> np.ndarray:
        """(d kappa)_ab - 2 nabla_[a kappa_b]; vanishes for a torsion-free connection."""
        dk = self.fd.dkappa
        ext = dk - np.swapaxes(dk, 1, 2)
        return ext - (self.nk - np.swapaxes(self.nk, 1, 2))


def _take_fd(fd: FrameData, k: int) -> FrameData:
    sl = slice(k, k + 1)
    return FrameData(fd.cf, fd.samples.take([k]), fd.C[sl], fd.dC[sl], fd.H[sl], fd.dH[sl], fd.M[sl],
                     fd.dM[sl], fd.g[sl], fd.dg[sl], fd.ginv[sl], fd.F[sl], fd.cond[sl], fd.scale[sl])


def levi_civita(cf_or_fd, samples: Optional[SampleSet] = None) -> Connection:
    """Build the Levi-Civita connection data for a coframe at samples."""
    fd = cf_or_fd if isinstance(cf_or_fd, FrameData) else frame_data(cf_or_fd, samples)
    gamma = christoffel(fd.dg, fd.ginv)
    nk = nabla_kappa(gamma, fd.kappa, fd.dkappa)
    _, _, rho, drho = fd.omega_rho()
    nr = nabla_rho(gamma, rho, drho)
    return Connection(fd, gamma, nk, nr)


# ---------------------------------------------------------------------------
# compatible connections
# ---------------------------------------------------------------------------

@dataclass
class CompatibleConnection:
    """A connection nabla' = nabla - Q preserving K, N and the screen conformal class.

    ``Q[s, a, b, c]`` is Q_ab^c in coordinates, so nabla'_a xi_b =
    nabla_a xi_b - Q_ab^c xi_c.  ``f[s, a]`` is the conformal factor with
    (nabla' g)(u; v, w) = f(u) g(v, w) on K-perp.  ``torsion[s, a, b, c]`` is
    T_ab^c = -2 Q_[ab]^c.
    """

    conn: Connection
    Q: np.ndarray
    f: np.ndarray
    torsion: np.ndarray
    residual: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def frame_torsion(self) -> np.ndarray:
        """Torsion T_AB^C in the Robinson frame (upper index via the coframe)."""
        F, C = self.conn.fd.F, self.conn.fd.C
        return np.einsum("sabc,saA,sbB,sCc->sABC", self.torsion, F, F, C)

    def forced_components(self) -> dict:
        """Torsion pieces fixed by compatibility, in frame components.

        Returns T(k, e_j)^0, T(e_i, e_j)^0 and the symmetric part of T(k, e_b, e_c)
        with the last slot lowered, for comparison with -gamma, -2 tau and -sigma.
        """
        fd = self.conn.fd
        m = fd.m
        n = fd.n
        Tf = self.frame_torsion()  # [s, A, B, C] with C a coframe (upper) index
        # lower the last index with the frame metric M: T_ABD = T_AB^C M_CD
        Tl = np.einsum("sABC,sCD->sABD", Tf, fd.M)
        scr = slice(1, 1 + 2 * m)
        return {
            "T0j0": Tf[:, n - 1, scr, 0],
            "Tij0": Tf[:, scr, scr, 0],
            "T0jk": Tl[:, n - 1, scr, scr],
        }

    def compatibility_residuals(self) -> dict:
        """Residuals of the defining properties at each sample."""
        fd = self.conn.fd
        m, n = fd.m, fd.n
        F = fd.F
        Kp = self.conn.nk - np.einsum("sabc,sc->sab", self.Q, fd.kappa)
        perp = np.concatenate([F[:, :, 1:1 + 2 * m], F[:, :, -1:]], axis=2)
        r1 = np.einsum("sab,sbB->saB", Kp, perp)
        # nabla' g = -Q_ab^d g_dc - Q_ac^d g_bd
        ng = -np.einsum("sabd,sdc->sabc", self.Q, fd.g) - np.einsum("sacd,sbd->sabc", self.Q, fd.g)
        ng = ng - np.einsum("sa,sbc->sabc", self.f, fd.g)
        r2 = np.einsum("sabc,sbB,scC->saBC", ng, perp, perp)
        # N preserved: nabla' theta^alpha (w) = 0 for w in N = span(ebar, k)
        th = fd.C[:, 1:1 + m]
        dth = fd.dC[:, :, 1:1 + m]
        nth = np.transpose(dth, (0, 2, 1, 3)) - np.einsum("scab,sxc->sxab", self.conn.gamma, th)
        nth = nth - np.einsum("sabc,sxc->sxab", self.Q, th)
        Nv = np.concatenate([F[:, :, 1 + m:1 + 2 * m], F[:, :, -1:]], axis=2)
        r3 = np.einsum("sxab,sbB->sxaB", nth, Nv)
        return {"kappa": r1, "metric": r2, "N": r3}


def build_compatible_connection(conn: Connection, minimize: str = "torsion") -> CompatibleConnection:
    """Construct a compatible connection with the smallest possible torsion.

    The unknown real tensor Q_ab^c (and the conformal one-form f) is found
    sample by sample as the minimiser of the coordinate norm of Q_[ab]^c
    subject to the linear compatibility conditions:

    * (nabla'_u kappa)(v) = 0 for v in K-perp,
    * (nabla'_u g)(v, w) = f(u) g(v, w) for v, w in K-perp,
    * (nabla'_u theta^alpha)(w) = 0 for w in N.

    Among the minimisers the one of least norm is returned, so a structure
    with vanishing intrinsic torsion yields Q = 0.
    """
    fd = conn.fd
    n, m = fd.n, fd.m
    N = len(fd.samples)
    nQ = n ** 3
    Qs = np.zeros((N, n, n, n))
    fs = np.zeros((N, n))
    res = np.zeros(N)
    # index helper: Q_ab^c -> a*n*n + b*n + c
    for s in range(N):
        F = fd.F[s]
        kap = fd.kappa[s]
        g = fd.g[s].real
        rows = []
        rhs = []
        perp = np.concatenate([F[:, 1:1 + 2 * m], F[:, -1:]], axis=1)
        Nv = np.concatenate([F[:, 1 + m:1 + 2 * m], F[:, -1:]], axis=1)
        eye = np.eye(n)
        # (1) Q_ab^c kappa_c v^b = K_ab v^b, for all a (coordinate) and v in perp
        for a in range(n):
            for j in range(perp.shape[1]):
                v = perp[:, j]
                row = np.zeros(nQ + n, dtype=complex)
                row[:nQ] = np.einsum("A,b,c->Abc", eye[a], v, kap).ravel()
                rows.append(row)
                rhs.append(conn.nk[s, a] @ v)
        # (2) -Q_ab^d g_dc v^b w^c - Q_ac^d g_bd v^b w^c - f_a g(v, w) = 0
        for a in range(n):
            for j in range(perp.shape[1]):
                for l in range(j, perp.shape[1]):
                    v, w = perp[:, j], perp[:, l]
                    gw = g @ w
                    gv = g @ v
                    row = np.zeros(nQ + n, dtype=complex)
                    row[:nQ] = -(np.einsum("A,b,d->Abd", eye[a], v, gw) + np.einsum("A,c,d->Acd", eye[a], w, gv)).ravel()
                    row[nQ + a] = -(v @ g @ w)
                    rows.append(row)
                    rhs.append(0.0)
        # (3) Q_ab^c theta_c w^b = (nabla theta)_ab w^b
        th = fd.C[s, 1:1 + m]
        dth = fd.dC[s, :, 1:1 + m]  # [a, alpha, b]
        nth = np.transpose(dth, (1, 0, 2)) - np.einsum("cab,xc->xab", conn.gamma[s], th)
        for x in range(m):
            for a in range(n):
                for j in range(Nv.shape[1]):
                    w = Nv[:, j]
                    row = np.zeros(nQ + n, dtype=complex)
                    row[:nQ] = np.einsum("A,b,c->Abc", eye[a], w, th[x]).ravel()
                    rows.append(row)
                    rhs.append(nth[x, a] @ w)
        A = np.array(rows)
        b = np.array(rhs)
        Ar = np.vstack([A.real, A.imag])
        br = np.concatenate([b.real, b.imag])
        # objective: antisymmetric part of Q
        P = np.zeros((n * n * n, nQ + n))
        for a in range(n):
            for bb in range(n):
                for c in range(n):
                    r = a * n * n + bb * n + c
                    P[r, a * n * n + bb * n + c] += 0.5
                    P[r, bb * n * n + a * n + c] -= 0.5
        x0, *_ = np.linalg.lstsq(Ar, br, rcond=None)
        u, sv, vt = np.linalg.svd(Ar)
        rank = int((sv > sv[0] * 1e-11).sum())
        Z = vt[rank:].T  # nullspace basis
        if Z.shape[1]:
            z, *_ = np.linalg.lstsq(P @ Z, -P @ x0, rcond=None)
            x1 = x0 + Z @ z
            # least norm among torsion minimisers
            PZ = P @ Z
            u2, s2, vt2 = np.linalg.svd(PZ)
            r2 = int((s2 > (s2[0] if s2.size else 1) * 1e-11).sum())
            Z2 = Z @ vt2[r2:].T
            if Z2.shape[1]:
                x1 = x1 - Z2 @ (Z2.T @ x1)
        else:
            x1 = x0
        res[s] = np.linalg.norm(Ar @ x1 - br)
        Qs[s] = x1[:nQ].reshape(n, n, n)
        fs[s] = x1[nQ:]
    T = -(Qs - np.swapaxes(Qs, 1, 2))
    return CompatibleConnection(conn, Qs, fs, T, res)
