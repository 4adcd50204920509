"""Robinson coframes, the induced metric, the Robinson 3-form and dual frames.

A Robinson coframe is stored as coordinate-basis components of
``(kappa, theta^1..theta^m, lambda)`` together with a Hermitian screen matrix
``h[a][b] = h_{a bbar}``.  The metric is

    g = 2 kappa (.) lambda + 2 h_{a bbar} theta^a (.) conj(theta^b).

Numerics are organised around :class:`FrameData`, which holds every coframe
derived array at a batch of samples, with the sample index first.  Row order
of the coframe matrix ``C`` is ``[kappa, theta^1..m, thetabar^1..m, lambda]``,
so the columns of ``F = C^{-1}`` are ``[ell, e_1..e_m, ebar_1..ebar_m, k]``.
"""
from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .expr import (
    ONE, ZERO, Chart, Expr, ExprError, Interval, ParseError, SampleSet, as_expr, conj,
    diff, evaluate, parse_expr, sample_points, zero_verdict, ZeroVerdict,
)

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

__all__ = [
    "GeometryError", "CoframeField", "MetricField", "FormCache", "FrameData", "ManifestError",
    "Manifest", "metric_from_coframe", "dual_frame", "frame_data", "robinson_three_form",
    "verify_rho_identity", "rho_identity_residual", "load_manifest", "coframe_to_manifest",
    "COND_MAX",
]

COND_MAX = 1e8


class GeometryError(Exception):
    """Degenerate coframe, wrong signature or failed reality check."""


class ManifestError(ValueError):
    """Manifest could not be read or validated.

    ``line`` and ``column`` (1-based) locate the problem in the manifest text
    when it can be pinned down.
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.message = message


# ---------------------------------------------------------------------------
# coframe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoframeField:
    """A Robinson coframe in coordinate components.

    ``convention`` records how the coframe is normalised; catalog entries
    built from a CR lift use ``"lift"`` (kappa = 2 theta^0) while everything
    else uses ``"standard"``.
    """

    chart: Chart
    kappa: Tuple[Expr, ...]
    lam: Tuple[Expr, ...]
    theta: Tuple[Tuple[Expr, ...], ...]
    h: Optional[Tuple[Tuple[Expr, ...], ...]] = None
    convention: str = "standard"
    name: str = ""

    def __post_init__(self):
        n = self.chart.n
        m = self.chart.m
        object.__setattr__(self, "kappa", tuple(as_expr(x) for x in self.kappa))
        object.__setattr__(self, "lam", tuple(as_expr(x) for x in self.lam))
        object.__setattr__(self, "theta", tuple(tuple(as_expr(x) for x in row) for row in self.theta))
        if self.h is not None:
            object.__setattr__(self, "h", tuple(tuple(as_expr(x) for x in row) for row in self.h))
        if len(self.kappa) != n or len(self.lam) != n:
            raise GeometryError(f"kappa and lambda need {n} components")
        if len(self.theta) != m or any(len(t) != n for t in self.theta):
            raise GeometryError(f"theta needs {m} covectors of {n} components")
        if self.h is not None and (len(self.h) != m or any(len(r) != m for r in self.h)):
            raise GeometryError(f"h must be {m}x{m}")
        declared = set(self.chart.symbol_names)
        from .expr import free_symbols
        for e in self.all_exprs():
            extra = free_symbols(e) - declared
            if extra:
                raise GeometryError(f"undeclared symbols {sorted(extra)}")

    # ------------------------------------------------------------------
    @classmethod
    def from_strings(cls, chart: Chart, kappa: Sequence[str], lam: Sequence[str],
                     theta: Sequence[Sequence[str]], h: Optional[Sequence[Sequence[str]]] = None,
                     defs: Optional[Mapping[str, Expr]] = None, **kw) -> "CoframeField":
        p = lambda s: s if isinstance(s, Expr) else parse_expr(s, chart, defs)  # noqa: E731
        return cls(chart, tuple(p(s) for s in kappa), tuple(p(s) for s in lam),
                   tuple(tuple(p(s) for s in row) for row in theta),
                   None if h is None else tuple(tuple(p(s) for s in row) for row in h), **kw)

    @property
    def m(self) -> int:
        return self.chart.m

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def unitary(self) -> bool:
        return self.h is None

    def h_matrix(self) -> Tuple[Tuple[Expr, ...], ...]:
        if self.h is not None:
            return self.h
        m = self.m
        return tuple(tuple(ONE if a == b else ZERO for b in range(m)) for a in range(m))

    def rows(self) -> List[Tuple[Expr, ...]]:
        """Coframe rows in the order kappa, theta, thetabar, lambda."""
        bars = [tuple(conj(x) for x in t) for t in self.theta]
        return [self.kappa, *self.theta, *bars, self.lam]

    def all_exprs(self):
        yield from self.kappa
        yield from self.lam
        for t in self.theta:
            yield from t
        if self.h is not None:
            for r in self.h:
                yield from r

    def replace(self, **changes) -> "CoframeField":
        data = dict(chart=self.chart, kappa=self.kappa, lam=self.lam, theta=self.theta, h=self.h,
                    convention=self.convention, name=self.name)
        data.update(changes)
        return CoframeField(**data)

    def with_chart(self, chart: Chart) -> "CoframeField":
        return self.replace(chart=chart)

    def sample(self, count: int = 8, seed: int = 0) -> SampleSet:
        return sample_points(self.chart, count, seed)


# ---------------------------------------------------------------------------
# metric
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricField:
    """Symmetric metric components g_ab as expressions in the coordinate basis."""

    chart: Chart
    g: Tuple[Tuple[Expr, ...], ...]

    def values(self, samples: SampleSet) -> np.ndarray:
        n = self.chart.n
        cache: Dict[Expr, np.ndarray] = {}
        out = np.empty((len(samples), n, n), dtype=complex)
        for a in range(n):
            for b in range(a, n):
                out[:, a, b] = out[:, b, a] = evaluate(self.g[a][b], samples, cache=cache)
        return out

    def derivatives(self, samples: SampleSet) -> np.ndarray:
        """Array dg[s, c, a, b] = d_c g_ab computed by symbolic differentiation."""
        n = self.chart.n
        cache: Dict[Expr, np.ndarray] = {}
        out = np.empty((len(samples), n, n, n), dtype=complex)
        for c, x in enumerate(self.chart.coordinate_names):
            for a in range(n):
                for b in range(a, n):
                    out[:, c, a, b] = out[:, c, b, a] = evaluate(diff(self.g[a][b], x), samples, cache=cache)
        return out


def metric_from_coframe(cf: CoframeField) -> MetricField:
    """Expression-level metric g = 2 kappa.lambda + 2 h theta.thetabar."""
    n, m = cf.n, cf.m
    h = cf.h_matrix()
    th = cf.theta
    thb = [tuple(conj(x) for x in t) for t in th]
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            if b < a:
                row.append(rows[b][a])
                continue
            terms = [cf.kappa[a] * cf.lam[b], cf.lam[a] * cf.kappa[b]]
            for al in range(m):
                for be in range(m):
                    if h[al][be] is ZERO:
                        continue
                    terms.append(h[al][be] * (th[al][a] * thb[be][b] + thb[be][a] * th[al][b]))
            from .expr import add
            row.append(add(*terms))
        rows.append(tuple(row))
    return MetricField(cf.chart, tuple(rows))


# ---------------------------------------------------------------------------
# numerics at samples
# ---------------------------------------------------------------------------

@dataclass
class FrameData:
    """Coframe derived arrays at a batch of samples (sample axis first).

    Shapes: ``C``, ``g``, ``ginv``, ``F``: (N, n, n); ``dC[s, a, r, b]`` is the
    derivative along coordinate ``a`` of coframe row ``r``, component ``b``;
    ``H``: (N, m, m) with ``H[s, a, b] = h_{a bbar}``; ``dH``: (N, n, m, m);
    ``dg[s, c, a, b] = d_c g_ab``.
    """

    cf: CoframeField
    samples: SampleSet
    C: np.ndarray
    dC: np.ndarray
    H: np.ndarray
    dH: np.ndarray
    M: np.ndarray
    dM: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    ginv: np.ndarray
    F: np.ndarray
    cond: np.ndarray
    scale: np.ndarray
    _rho: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.cf.m

    @property
    def n(self) -> int:
        return self.cf.n

    @property
    def kappa(self) -> np.ndarray:
        return self.C[:, 0, :]

    @property
    def dkappa(self) -> np.ndarray:
        """d_a kappa_b, shape (N, n, n)."""
        return self.dC[:, :, 0, :]

    @property
    def lam(self) -> np.ndarray:
        return self.C[:, -1, :]

    @property
    def ell(self) -> np.ndarray:
        return self.F[:, :, 0]

    @property
    def k(self) -> np.ndarray:
        return self.F[:, :, -1]

    @property
    def e(self) -> np.ndarray:
        """Screen frame e_alpha as (N, n, m)."""
        return self.F[:, :, 1:1 + self.m]

    @property
    def ebar(self) -> np.ndarray:
        return self.F[:, :, 1 + self.m:1 + 2 * self.m]

    @property
    def Hinv(self) -> np.ndarray:
        """h^{a bbar} arranged so that sum_b Hinv[a, b] H[c, b] = delta_ac."""
        return np.linalg.inv(np.swapaxes(self.H, 1, 2))

    def omega_rho(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (omega, d omega, rho, d rho) as numeric arrays."""
        if self._rho is None:
            self._rho = _omega_rho(self)
        return self._rho  # type: ignore[return-value]


def _eval_grid(exprs, samples, cache) -> np.ndarray:
    return np.stack([evaluate(e, samples, cache=cache) for e in exprs], axis=-1)


def frame_data(cf: CoframeField, samples: SampleSet, check: bool = True) -> FrameData:
    """Evaluate the coframe, its first derivatives and the induced metric."""
    n, m = cf.n, cf.m
    N = len(samples)
    coords = cf.chart.coordinate_names
    cache: Dict[Expr, np.ndarray] = {}
    base_rows = [cf.kappa, *cf.theta, cf.lam]
    base = np.stack([_eval_grid(r, samples, cache) for r in base_rows], axis=1)  # (N, m+2, n)
    dbase = np.stack([
        np.stack([_eval_grid([diff(e, x) for e in r], samples, cache) for r in base_rows], axis=1)
        for x in coords], axis=1)  # (N, n, m+2, n)
    C = np.concatenate([base[:, :1 + m], np.conj(base[:, 1:1 + m]), base[:, -1:]], axis=1)
    dC = np.concatenate([dbase[:, :, :1 + m], np.conj(dbase[:, :, 1:1 + m]), dbase[:, :, -1:]], axis=2)
    hm = cf.h_matrix()
    H = np.empty((N, m, m), dtype=complex)
    dH = np.zeros((N, n, m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            H[:, a, b] = evaluate(hm[a][b], samples, cache=cache)
            if cf.h is not None:
                for c, x in enumerate(coords):
                    dH[:, c, a, b] = evaluate(diff(hm[a][b], x), samples, cache=cache)
    M = np.zeros((N, n, n), dtype=complex)
    M[:, 0, -1] = M[:, -1, 0] = 1.0
    M[:, 1:1 + m, 1 + m:1 + 2 * m] = H
    M[:, 1 + m:1 + 2 * m, 1:1 + m] = np.swapaxes(H, 1, 2)
    dM = np.zeros((N, n, n, n), dtype=complex)
    dM[:, :, 1:1 + m, 1 + m:1 + 2 * m] = dH
    dM[:, :, 1 + m:1 + 2 * m, 1:1 + m] = np.swapaxes(dH, 2, 3)
    g = np.einsum("sra,srt,stb->sab", C, M, C)
    dg = (np.einsum("scra,srt,stb->scab", dC, M, C)
          + np.einsum("sra,scrt,stb->scab", C, dM, C)
          + np.einsum("sra,srt,sctb->scab", C, M, dC))
    cond = np.linalg.cond(C)
    if check:
        if not np.all(np.isfinite(C)) or not np.all(np.isfinite(dC)):
            raise GeometryError("coframe is not finite at some sample")
        bad = np.nonzero(~(cond < COND_MAX))[0]
        if bad.size:
            raise GeometryError(f"coframe matrix singular or ill-conditioned (cond={cond[bad[0]]:.3g}) at sample {int(bad[0])}")
    F = np.linalg.inv(C)
    ginv = np.linalg.inv(g)
    scale = np.maximum.reduce([
        np.abs(C).reshape(N, -1).max(1), np.abs(F).reshape(N, -1).max(1),
        np.abs(dC).reshape(N, -1).max(1), np.abs(H).reshape(N, -1).max(1),
        np.abs(dH).reshape(N, -1).max(1) if m else np.zeros(N),
    ])
    fd = FrameData(cf, samples, C, dC, H, dH, M, dM, g, dg, ginv, F, cond, scale)
    if check:
        check_frame(fd)
    return fd


def check_frame(fd: FrameData, tol: float = 1e-10) -> None:
    """Reality, Hermiticity and signature checks; raises GeometryError."""
    m = fd.m
    sc = 1.0 + fd.scale
    if np.max(np.abs(fd.C[:, 0].imag).max(1) / sc) > tol or np.max(np.abs(fd.C[:, -1].imag).max(1) / sc) > tol:
        raise GeometryError("kappa and lambda must be real")
    H = fd.H
    if m and np.max(np.abs(H - np.conj(np.swapaxes(H, 1, 2)))) > tol * np.max(sc):
        raise GeometryError("h is not Hermitian")
    if m:
        ev = np.linalg.eigvalsh(0.5 * (H + np.conj(np.swapaxes(H, 1, 2))))
        if np.any(ev <= 0):
            raise GeometryError("h is not positive definite")
    if np.max(np.abs(fd.g.imag).reshape(len(sc), -1).max(1) / sc ** 2) > tol:
        raise GeometryError("metric has an imaginary part")
    ev = np.linalg.eigvalsh(fd.g.real)
    neg = (ev < 0).sum(axis=1)
    if np.any(neg != 1) or np.any(np.abs(ev).min(axis=1) < 1e-14):
        raise GeometryError("metric does not have Lorentzian signature")


@dataclass
class Frame:
    """Dual frame at one sample."""

    ell: np.ndarray
    e: np.ndarray
    ebar: np.ndarray
    k: np.ndarray

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.ell, self.e, self.ebar, self.k])


def dual_frame(cf: CoframeField, p) -> Frame:
    """Dual frame (ell, e_alpha, ebar_alpha, k) at a single sample point."""
    if not isinstance(p, SampleSet):
        p = SampleSet.from_points(cf.chart, [p.values if hasattr(p, "values") else p])
    fd = frame_data(cf, p.take([0]) if len(p) > 1 else p)
    F = fd.F[0]
    m = cf.m
    return Frame(F[:, 0], F[:, 1:1 + m], F[:, 1 + m:1 + 2 * m], F[:, -1])


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FormCache:
    """Screen 2-form omega_ab and Robinson 3-form rho_abc as expressions."""

    omega: Tuple[Tuple[Expr, ...], ...]
    rho: Tuple[Tuple[Tuple[Expr, ...], ...], ...]

    def rho_values(self, samples: SampleSet) -> np.ndarray:
        n = len(self.omega)
        cache: Dict[Expr, np.ndarray] = {}
        out = np.zeros((len(samples), n, n, n), dtype=complex)
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    e = self.rho[a][b][c]
                    if e is not ZERO:
                        out[:, a, b, c] = evaluate(e, samples, cache=cache)
        return out


def robinson_three_form(cf: CoframeField) -> FormCache:
    """omega = i h (theta (x) thetabar - thetabar (x) theta), rho = 3 kappa ^ omega."""
    from .expr import I, add
    n, m = cf.n, cf.m
    h = cf.h_matrix()
    th = cf.theta
    thb = [tuple(conj(x) for x in t) for t in th]
    om = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            terms = []
            for al in range(m):
                for be in range(m):
                    if h[al][be] is ZERO:
                        continue
                    terms.append(h[al][be] * (th[al][a] * thb[be][b] - thb[be][a] * th[al][b]))
            v = I * add(*terms) if terms else ZERO
            om[a][b] = v
            om[b][a] = -v
    k = cf.kappa
    rho = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                v = add(k[a] * om[b][c], k[b] * om[c][a], k[c] * om[a][b])
                for (x, y, z), s in (((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                                     ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)):
                    rho[x][y][z] = v if s > 0 else -v
    return FormCache(tuple(tuple(r) for r in om), tuple(tuple(tuple(r) for r in p) for p in rho))


def _omega_rho(fd: FrameData):
    m = fd.m
    th = fd.C[:, 1:1 + m]
    thb = fd.C[:, 1 + m:1 + 2 * m]
    dth = fd.dC[:, :, 1:1 + m]
    dthb = fd.dC[:, :, 1 + m:1 + 2 * m]
    H, dH = fd.H, fd.dH
    A = np.einsum("sxy,sxa,syb->sab", H, th, thb)
    omega = 1j * (A - np.swapaxes(A, 1, 2))
    dA = (np.einsum("scxy,sxa,syb->scab", dH, th, thb)
          + np.einsum("sxy,scxa,syb->scab", H, dth, thb)
          + np.einsum("sxy,sxa,scyb->scab", H, th, dthb))
    domega = 1j * (dA - np.swapaxes(dA, 2, 3))
    k = fd.kappa
    dk = fd.dkappa
    rho = (np.einsum("sa,sbc->sabc", k, omega) + np.einsum("sb,sca->sabc", k, omega)
           + np.einsum("sc,sab->sabc", k, omega))
    drho = (np.einsum("sda,sbc->sdabc", dk, omega) + np.einsum("sa,sdbc->sdabc", k, domega)
            + np.einsum("sdb,sca->sdabc", dk, omega) + np.einsum("sb,sdca->sdabc", k, domega)
            + np.einsum("sdc,sab->sdabc", dk, omega) + np.einsum("sc,sdab->sdabc", k, domega))
    return omega, domega, rho, drho


# ---------------------------------------------------------------------------
# quadratic identity
# ---------------------------------------------------------------------------

def rho_identity_residual(g: np.ndarray, kappa: np.ndarray, rho: np.ndarray,
                          ginv: Optional[np.ndarray] = None) -> np.ndarray:
    """Residual rho_ab^e rho_cde + 4 kappa_[a g_b][c kappa_d] as (N, n, n, n, n)."""
    if ginv is None:
        ginv = np.linalg.inv(g)
    lhs = np.einsum("sabe,sef,scdf->sabcd", rho, ginv, rho)
    t = np.einsum("sa,sbc,sd->sabcd", kappa, g, kappa)
    anti = 0.25 * (t - np.swapaxes(t, 1, 2) - np.swapaxes(t, 3, 4)
                   + np.swapaxes(np.swapaxes(t, 1, 2), 3, 4))
    return lhs + 4.0 * anti


def verify_rho_identity(g: np.ndarray, kappa: np.ndarray, rho: np.ndarray,
                        scale: Optional[np.ndarray] = None, tol: float = 1e-9,
                        ginv: Optional[np.ndarray] = None) -> ZeroVerdict:
    """Check the quadratic identity sample by sample.

    The residual is divided by ``1 + scale`` where ``scale`` defaults to the
    largest magnitude of the inputs at that sample (squared, since the
    identity is quadratic).
    """
    res = rho_identity_residual(g, kappa, rho, ginv)
    N = res.shape[0]
    if scale is None:
        s1 = np.maximum.reduce([np.abs(rho).reshape(N, -1).max(1), np.abs(g).reshape(N, -1).max(1),
                                np.abs(kappa).reshape(N, -1).max(1)])
        scale = s1 ** 2 * (1 + np.abs(ginv if ginv is not None else np.linalg.inv(g)).reshape(N, -1).max(1))
    v = zero_verdict(res, scale, tol)
    if v.witness_index is not None:
        r = np.abs(res[v.witness_index])
        v.extra["witness_component"] = tuple(int(i) for i in np.unravel_index(int(np.argmax(r)), r.shape))
    return v


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

@dataclass
class Manifest:
    coframe: CoframeField
    count: int = 8
    seed: int = 0
    tol: float = 1e-9
    source: str = ""


def _intervals(items, what: str) -> List[Interval]:
    out = []
    for it in items or []:
        if isinstance(it, str):
            out.append(Interval(it))
        elif isinstance(it, Mapping):
            try:
                out.append(Interval(str(it["name"]), float(it.get("min", -1.0)), float(it.get("max", 1.0))))
            except KeyError as exc:
                raise ManifestError(f"[chart] {what} entry needs a name") from exc
        elif isinstance(it, (list, tuple)) and len(it) == 3:
            out.append(Interval(str(it[0]), float(it[1]), float(it[2])))
        else:
            raise ManifestError(f"[chart] bad {what} entry {it!r}")
    return out


def manifest_from_dict(data: Mapping[str, Any], source: str = "") -> Manifest:
    """Validate a parsed manifest table and build the coframe."""
    try:
        chart_t = data["chart"]
        cof_t = data["coframe"]
    except KeyError as exc:
        raise ManifestError(f"missing table [{exc.args[0]}]") from exc
    coords = _intervals(chart_t.get("coordinates"), "coordinates")
    params = _intervals(chart_t.get("parameters"), "parameters")
    if "m" in chart_t and 2 * int(chart_t["m"]) + 2 != len(coords):
        raise ManifestError(f"[chart] m = {chart_t['m']} needs {2 * int(chart_t['m']) + 2} coordinates, got {len(coords)}")
    try:
        chart0 = Chart(tuple(coords), tuple(params))
    except ExprError as exc:
        raise ManifestError(f"[chart] {exc}") from exc
    defs: Dict[str, Expr] = {}
    for name, src in (data.get("definitions") or {}).items():
        try:
            defs[name] = parse_expr(str(src), chart0, defs)
        except ParseError as exc:
            raise ManifestError(f"[definitions] {name}: {exc}") from exc

    def parse(where: str, src) -> Expr:
        try:
            return parse_expr(src if not isinstance(src, (int, float)) else str(src), chart0, defs)
        except ParseError as exc:
            raise ManifestError(f"{where}: {exc}") from exc

    guards = tuple(parse(f"[chart] guards[{j}]", g) for j, g in enumerate(chart_t.get("guards", [])))
    positive = tuple(parse(f"[chart] positive[{j}]", g) for j, g in enumerate(chart_t.get("positive", [])))
    chart = Chart(tuple(coords), tuple(params), guards, positive)
    try:
        kappa = [parse(f"[coframe] kappa[{j}]", s) for j, s in enumerate(cof_t["kappa"])]
        lam = [parse(f"[coframe] lambda[{j}]", s) for j, s in enumerate(cof_t["lambda"])]
        theta = [[parse(f"[coframe] theta[{a}][{j}]", s) for j, s in enumerate(row)]
                 for a, row in enumerate(cof_t["theta"])]
    except KeyError as exc:
        raise ManifestError(f"[coframe] missing key {exc.args[0]!r}") from exc
    h = None
    if "h" in data:
        ht = data["h"]
        rows = ht.get("matrix") if isinstance(ht, Mapping) else ht
        h = [[parse(f"[h] matrix[{a}][{b}]", s) for b, s in enumerate(r)] for a, r in enumerate(rows)]
    try:
        cf = CoframeField(chart, tuple(kappa), tuple(lam), tuple(tuple(r) for r in theta),
                          None if h is None else tuple(tuple(r) for r in h),
                          convention=str(cof_t.get("convention", "standard")), name=str(data.get("name", "")))
    except GeometryError as exc:
        raise ManifestError(f"[coframe] {exc}") from exc
    samp = data.get("sampling", {})
    return Manifest(cf, int(samp.get("count", 8)), int(samp.get("seed", 0)), float(samp.get("tol", 1e-9)), source)


def load_manifest(path_or_text: str, is_text: bool = False) -> Manifest:
    """Read a TOML manifest from a path (or from text when ``is_text``)."""
    if is_text:
        text, src = path_or_text, "<text>"
    else:
        try:
            with open(path_or_text, "r", encoding="utf8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ManifestError(f"cannot read manifest: {exc}") from exc
        src = str(path_or_text)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = str(exc)
        loc = re.search(r"\(at line (\d+), column (\d+)\)", msg)
        base = re.sub(r"\s*\(at line \d+, column \d+\)", "", msg)
        if loc:
            raise ManifestError(f"{src}: {base}", int(loc.group(1)), int(loc.group(2))) from exc
        raise ManifestError(f"{src}: {msg}") from exc
    try:
        return manifest_from_dict(data, src)
    except ManifestError as exc:
        cause = exc.__cause__
        if exc.line is None and isinstance(cause, ParseError) and cause.source:
            line, col = _locate(text, cause.source, max(cause.position, 0))
            if line is not None:
                raise ManifestError(f"{src}: {exc.message}", line, col) from cause
        raise


def _locate(text: str, source: str, offset: int) -> Tuple[Optional[int], Optional[int]]:
    """Line and column of character ``offset`` of a quoted string in the TOML text."""
    for ln, row in enumerate(text.splitlines(), start=1):
        for quote in ('"', "'"):
            j = row.find(quote + source + quote)
            if j >= 0:
                return ln, j + 2 + offset
    return None, None


def _toml_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def coframe_to_manifest(cf: CoframeField, count: int = 8, seed: int = 0, tol: float = 1e-9) -> str:
    """Serialise a coframe to manifest TOML text (round-trips through load_manifest)."""
    from .expr import to_string
    ch = cf.chart
    ivs = lambda xs: "[" + ", ".join(  # noqa: E731
        "{ name = %s, min = %r, max = %r }" % (_toml_str(v.name), v.lo, v.hi) for v in xs) + "]"
    lst = lambda es: "[" + ", ".join(_toml_str(to_string(e)) for e in es) + "]"  # noqa: E731
    lines = []
    if cf.name:
        lines.append(f"name = {_toml_str(cf.name)}")
    lines += ["[chart]", f"m = {cf.m}", f"coordinates = {ivs(ch.coordinates)}",
              f"parameters = {ivs(ch.parameters)}", f"guards = {lst(ch.guards)}",
              f"positive = {lst(ch.positive)}", "", "[coframe]",
              f"convention = {_toml_str(cf.convention)}",
              f"kappa = {lst(cf.kappa)}", f"lambda = {lst(cf.lam)}",
              "theta = [" + ", ".join(lst(t) for t in cf.theta) + "]"]
    if cf.h is not None:
        lines += ["", "[h]", "matrix = [" + ", ".join(lst(r) for r in cf.h) + "]"]
    lines += ["", "[sampling]", f"count = {count}", f"seed = {seed}", f"tol = {tol!r}", ""]
    return "\n".join(lines)
