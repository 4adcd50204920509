"""Membership in the invariant submodules of intrinsic torsion, plus flags.

Every named class is decided from its explicit list of vanishing conditions.
A condition is an array of frame components over samples; it holds when the
scale-relative magnitude stays below ``tol`` at all but a minority of
samples (see :func:`robinson.expr.zero_verdict`).

Class keys are plain strings such as ``"G_{-1}^{1,1}"`` for the fixed
submodules and ``"(G_{-1}^{1x3})[2i:1]"`` for members of the one-parameter
families.  The four families are

* ``0x1_-1``  with ``[x:y]`` real:    x eps + y tau_w = 0, gamma = 0
* ``1x2_-1``  with ``[x:y]`` real:    x sigma_{a bbar} - i y tau°_{a bbar} = 0, gamma = 0
* ``1x3_-1``  with ``[z:w]`` complex: z tau_{ab} + w zeta_{ab} = 0, (z + 4i w) gamma = 0
* ``0x1_0``   with ``[z:w]`` complex: z E + w G_a = 0 and the side conditions
  (z + 2(m-1)i w) eps = (z + 2(m-1)i w) tau_w = 0, (2i w - z) tau° =
  (2i w - z) sigma_{a bbar} = 0, z sigma_{ab} = 0, -z tau + w zeta = 0,
  gamma = 0.

The tau/zeta side condition of the last family uses ``[-z:w]``; this is the
reading under which the inclusion diagrams close (the generic diagram puts
the ``[z:w]`` member inside ``(G_{-1}^{1x3})[-z:w]``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .expr import ZeroVerdict, zero_verdict
from .torsion import COMPONENT_NAMES, TorsionComponents

__all__ = [
    "TorsionClass", "ClassVerdict", "FamilyResult", "classify", "geometric_report",
    "gray_hervella", "annotate_invariance", "class_names", "lattice_edges",
    "family_member", "CONFORMAL_FAMILIES", "FLAG_NAMES", "NotApplicable",
]

DEFAULT_TOL = 1e-8

# boost/scale weight used to normalise each component in relative tests
_POWER = {"gamma": 2, "eps": 2, "tau_w": 2, "tau": 2, "tau_o": 2, "sigma_hb": 2, "sigma": 2,
          "E": 2, "zeta": 3, "G_a": 4, "G3": 4, "Gh": 4, "Go": 4, "B": 4}


class NotApplicable(ValueError):
    """Raised when a report does not apply to the given structure."""


@dataclass
class ClassVerdict:
    member: bool
    witness: Optional[Dict[str, object]] = None

    def to_dict(self) -> dict:
        out = {"member": bool(self.member)}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class FamilyResult:
    """Detected parameter of a one-parameter family.

    ``kind`` is ``"none"`` (no member), ``"unique"`` (one projective point,
    stored in ``param`` normalised so the larger entry is 1) or ``"all"``
    (every parameter is a member, the pair vanishes independently).
    """

    name: str
    kind: str
    param: Optional[Tuple[complex, complex]]
    residual: float
    singular_values: Tuple[float, float]

    def matches(self, z: complex, w: complex, tol: float = 1e-6) -> bool:
        if self.kind == "all":
            return True
        if self.kind == "none" or self.param is None:
            return False
        a, b = self.param
        return abs(a * w - b * z) <= tol * max(abs(a), abs(b)) * max(abs(z), abs(w))

    def same_as(self, other: "FamilyResult", tol: float = 1e-6) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "unique":
            return other.matches(*self.param, tol=tol)
        return True

    def label(self) -> Optional[str]:
        if self.kind != "unique":
            return None
        return "[" + _fmt(self.param[0]) + ":" + _fmt(self.param[1]) + "]"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "residual": self.residual,
             "singular_values": list(self.singular_values)}
        if self.param is not None:
            d["param"] = [[float(p.real), float(p.imag)] for p in self.param]
            d["label"] = self.label()
        return d


def _fmt(z: complex) -> str:
    z = complex(z)
    re, im = round(z.real, 10) + 0.0, round(z.imag, 10) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return f"{im:g}i"
    return f"({re:g}{im:+g}i)"


FLAG_NAMES = (
    "geodesic", "non_expanding", "non_twisting", "non_shearing", "NN_in_Kperp",
    "NNbar_in_Kperp", "nearly_robinson", "rho_preserved_along_K", "N_parallel_along_K",
    "involutive", "twist_induced", "drho_alpha_rho", "kundt", "robinson_trautman", "torsion_free",
)


@dataclass
class TorsionClass:
    m: int
    tol: float
    components: Dict[str, ZeroVerdict]
    classes: Dict[str, ClassVerdict]
    families: Dict[str, FamilyResult]
    flags: Dict[str, bool] = field(default_factory=dict)
    gray_hervella: Optional[str] = None
    invariance: Dict[str, dict] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def member(self, name: str) -> bool:
        return self.classes[name].member

    def members(self) -> List[str]:
        return [k for k, v in self.classes.items() if v.member]

    def is_zero(self, name: str) -> bool:
        return self.components[name].verdict != "nonzero"

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "tol": self.tol,
            "components": {k: {"max_abs": v.max_abs, "max_rel": v.max_rel, "verdict": v.verdict}
                           for k, v in self.components.items()},
            "classes": {k: v.to_dict() for k, v in self.classes.items()},
            "families": {k: v.to_dict() for k, v in self.families.items()},
            "flags": dict(self.flags),
            "gray_hervella": self.gray_hervella,
            "invariance": self.invariance,
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# condition arrays
# ---------------------------------------------------------------------------

def _norm(c: TorsionComponents, name: str, arr: Optional[np.ndarray] = None) -> np.ndarray:
    """Flatten a component per sample and divide by its natural scale."""
    a = c.get(name) if arr is None else arr
    a = np.asarray(a, dtype=complex).reshape(c.n_samples, -1)
    return a / ((1.0 + c.scale) ** _POWER[name])[:, None]


def _block(c: TorsionComponents, name: str) -> np.ndarray:
    return _norm(c, name)


def _family_blocks(c: TorsionComponents, family: str) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Pairs (Z, W): the family condition at [z:w] is z Z + w W = 0 blockwise."""
    m = c.m
    zero = lambda name: np.zeros_like(_block(c, name))  # noqa: E731
    if family == "0x1_-1":
        return [(_block(c, "eps"), _block(c, "tau_w"))]
    if family == "1x2_-1":
        return [(_block(c, "sigma_hb"), -1j * _norm(c, "tau_o"))]
    if family == "1x3_-1":
        g = _block(c, "gamma")
        # tau and zeta are compared at a common weight so the detected ratio is scale free
        return [(_norm(c, "zeta", c.tau), _norm(c, "zeta")), (g, 4j * g)]
    if family == "0x1_0":
        k = 2 * (m - 1) * 1j
        e, tw = _block(c, "eps"), _block(c, "tau_w")
        to, sh = _block(c, "tau_o"), _block(c, "sigma_hb")
        # E and G_a carry different natural weights; compare them on a common footing
        E = _norm(c, "G_a", c.E)
        return [(E, _block(c, "G_a")), (e, k * e), (tw, k * tw), (-to, 2j * to), (-sh, 2j * sh),
                (_block(c, "sigma"), zero("sigma")), (-_norm(c, "zeta", c.tau), _norm(c, "zeta"))]
    raise KeyError(family)


def _family_side(c: TorsionComponents, family: str) -> List[np.ndarray]:
    """Conditions of a family that do not depend on the parameter."""
    if family == "1x3_-1":
        return []
    return [_block(c, "gamma")]


def family_condition(c: TorsionComponents, family: str, z: complex, w: complex) -> np.ndarray:
    blocks = [z * Z + w * W for Z, W in _family_blocks(c, family)] + _family_side(c, family)
    return np.concatenate(blocks, axis=1)


def family_member(c: TorsionComponents, family: str, z: complex, w: complex,
                  tol: float = DEFAULT_TOL) -> ZeroVerdict:
    """Zero verdict of the family's conditions at a fixed parameter."""
    nrm = max(abs(z), abs(w))
    return zero_verdict(family_condition(c, family, z / nrm, w / nrm), None, tol)


def detect_family(c: TorsionComponents, family: str, tol: float = DEFAULT_TOL) -> FamilyResult:
    """Find the projective parameters for which the family condition holds."""
    blocks = _family_blocks(c, family)
    Z = np.concatenate([b[0] for b in blocks], axis=1).reshape(-1)
    W = np.concatenate([b[1] for b in blocks], axis=1).reshape(-1)
    A = np.stack([Z, W], axis=1)
    real = family in ("0x1_-1", "1x2_-1")
    if real:
        A = np.concatenate([A.real, A.imag], axis=0)
    side = _family_side(c, family)
    side_ok = all(zero_verdict(s, None, tol).verdict != "nonzero" for s in side)
    sv = np.linalg.svd(A, compute_uv=False) if A.size else np.zeros(2)
    smax = float(sv[0]) if sv.size else 0.0
    smin = float(sv[-1]) if sv.size > 1 else 0.0
    # an absolute floor keeps rounding noise from defining a direction
    floor = tol
    if not side_ok:
        return FamilyResult(family, "none", None, float("inf"), (smax, smin))
    if smax <= floor:
        return FamilyResult(family, "all", None, smax, (smax, smin))
    _, _, vh = np.linalg.svd(A)
    v = np.conj(vh[-1])
    if real:
        v = v.real.astype(complex)
    k = int(np.argmax(np.abs(v)))
    v = v / v[k]
    param = (complex(v[0]), complex(v[1]))
    # residual of the detected point on the actual (possibly sample-sparse) condition
    ver = family_member(c, family, *param, tol=tol)
    resid = smin / smax
    if ver.verdict == "nonzero" or (smin > tol * smax and smin > floor):
        return FamilyResult(family, "none", None, resid, (smax, smin))
    return FamilyResult(family, "unique", param, resid, (smax, smin))


# ---------------------------------------------------------------------------
# named classes
# ---------------------------------------------------------------------------

def _fam_key(family: str, label: str) -> str:
    base = {"0x1_-1": "(G_{-1}^{0x1})", "1x2_-1": "(G_{-1}^{1x2})", "1x3_-1": "(G_{-1}^{1x3})",
            "0x1_0": "(G_0^{0x1})"}[family]
    return base + label


def _special_params(m: int) -> List[Tuple[str, str, complex, complex]]:
    """Family members named in the theorems and diagrams: (family, label, z, w)."""
    k = 2 * (m - 1)
    return [
        ("1x3_-1", "[-4i:1]", -4j, 1),
        ("1x3_-1", "[2i:1]", 2j, 1),
        ("1x3_-1", "[-2i:1]", -2j, 1),
        ("1x3_-1", "[2(m-1)i:1]", k * 1j, 1),
        ("0x1_0", "[-2(m-1)i:1]", -k * 1j, 1),
        ("0x1_0", "[2i:1]", 2j, 1),
        ("0x1_-1", "[1:0]", 1, 0),
        ("0x1_-1", "[0:1]", 0, 1),
        ("1x2_-1", "[1:0]", 1, 0),
        ("1x2_-1", "[0:1]", 0, 1),
        ("1x3_-1", "[1:0]", 1, 0),
        ("1x3_-1", "[0:1]", 0, 1),
    ]


def _conditions(m: int) -> Dict[str, List[str]]:
    """Named submodules as lists of atoms.

    Atoms are component names or projection tokens: ``P13:z,w`` stands for
    z tau + w zeta and ``P01:z,w`` for z E + w G_a.
    """
    sig = ["sigma_hb", "sigma"]
    tau_all = ["tau_w", "tau", "tau_o"]
    out = {
        "G_{-2}^{0,0}": ["gamma"],
        "G_{-1}^{0,0}": ["eps", "gamma"],
        "G_{-1}^{1,0}": ["tau_w", "gamma"],
        "G_{-1}^{1,1}": ["tau", "gamma"],
        "G_{-1}^{1,2}": ["tau_o", "gamma"],
        "G_{-1}^{2,0}": ["sigma_hb", "gamma"],
        "G_{-1}^{2,1}": ["sigma", "gamma"],
        "G_{-1}^{3,0}": ["zeta", "gamma"],
        "G_0^{0,0}": ["E", "eps", *tau_all, *sig, "gamma"],
        "G_0^{1,0}": ["G_a", "eps", "tau_w", "tau_o", "sigma_hb", "zeta", "gamma"],
        "G_0^{1,1}": ["G3", "P13:-4j,1"],
        "G_0^{1,2}": ["Gh", "P13:2j,1", "sigma", "gamma"],
        "G_0^{1,3}": ["Go", "tau_o", "sigma_hb", "zeta", "gamma"],
    }
    k = 2 * (m - 1)
    if m == 2:
        out["G_1^{0,0}"] = ["B", "P01:2j,-1", "G3", "Gh", "P13:2j,1", "tau_o", *sig, "zeta", "gamma"]
    else:
        out["G_1^{0,0}"] = ["B", f"P01:{k}j,-1", "G3", "Gh", "Go", "tau", "tau_o", *sig, "zeta", "gamma"]
    return out


def class_names(m: int) -> List[str]:
    names = list(_conditions(m))
    names += [_fam_key(f, lab) for f, lab, _, _ in _special_params(m)]
    return names


def _atom_array(c: TorsionComponents, atom: str) -> np.ndarray:
    if atom.startswith("P13:") or atom.startswith("P01:"):
        z, w = (complex(t) for t in atom[4:].split(","))
        if atom.startswith("P13"):
            return z * _norm(c, "zeta", c.tau) + w * _norm(c, "zeta")
        return z * _norm(c, "G_a", c.E) + w * _norm(c, "G_a")
    return _block(c, atom)


def lattice_edges(m: int) -> List[Tuple[str, str]]:
    """Inclusions (larger, smaller): membership of the smaller implies the larger."""
    F13 = lambda lab: _fam_key("1x3_-1", lab)  # noqa: E731
    F01 = lambda lab: _fam_key("0x1_0", lab)  # noqa: E731
    G = "G"
    e: List[Tuple[str, str]] = []
    minus1 = ["G_{-1}^{0,0}", "G_{-1}^{1,0}", "G_{-1}^{1,1}", "G_{-1}^{1,2}", "G_{-1}^{2,0}",
              "G_{-1}^{2,1}", "G_{-1}^{3,0}"]
    e += [("G_{-2}^{0,0}", x) for x in minus1]
    e += [(G, "G_{-2}^{0,0}"), (G, F13("[-4i:1]"))]
    e += [("G_{-2}^{0,0}", F13("[2i:1]")), ("G_{-2}^{0,0}", F13("[2(m-1)i:1]")),
          ("G_{-2}^{0,0}", F13("[-2i:1]"))]
    e += [(x, "G_0^{0,0}") for x in ["G_{-1}^{0,0}", "G_{-1}^{1,0}", "G_{-1}^{1,1}", "G_{-1}^{1,2}",
                                     "G_{-1}^{2,0}", "G_{-1}^{2,1}"]]
    e += [(x, "G_0^{1,0}") for x in ["G_{-1}^{3,0}", "G_{-1}^{2,0}", "G_{-1}^{1,2}",
                                     "G_{-1}^{1,0}", "G_{-1}^{0,0}"]]
    e += [("G_{-1}^{2,1}", "G_0^{1,2}"), (F13("[2i:1]"), "G_0^{1,2}")]
    e += [(x, F01("[-2(m-1)i:1]")) for x in [F13("[2(m-1)i:1]"), "G_{-1}^{2,1}", "G_{-1}^{2,0}",
                                              "G_{-1}^{1,2}"]]
    e += [("G_0^{1,2}", "G_1^{0,0}"), (F01("[-2(m-1)i:1]"), "G_1^{0,0}")]
    if m > 2:
        e += [(F13("[-4i:1]"), "G_0^{1,1}")]
        e += [(x, "G_0^{1,3}") for x in ["G_{-1}^{3,0}", "G_{-1}^{2,0}", "G_{-1}^{1,2}"]]
        e += [("G_0^{1,3}", "G_1^{0,0}"), ("G_0^{1,1}", "G_1^{0,0}")]
    if m > 1:
        e += [(x, F01("[2i:1]")) for x in ["G_{-1}^{2,1}", "G_{-1}^{1,0}", "G_{-1}^{0,0}",
                                            F13("[-2i:1]")]]
    # family specialisations
    e += [("G_{-1}^{1,1}", F13("[1:0]")), (F13("[1:0]"), "G_{-1}^{1,1}"),
          ("G_{-1}^{3,0}", F13("[0:1]")), (F13("[0:1]"), "G_{-1}^{3,0}"),
          ("G_{-1}^{0,0}", _fam_key("0x1_-1", "[1:0]")), (_fam_key("0x1_-1", "[1:0]"), "G_{-1}^{0,0}"),
          ("G_{-1}^{1,0}", _fam_key("0x1_-1", "[0:1]")), (_fam_key("0x1_-1", "[0:1]"), "G_{-1}^{1,0}"),
          ("G_{-1}^{2,0}", _fam_key("1x2_-1", "[1:0]")), (_fam_key("1x2_-1", "[1:0]"), "G_{-1}^{2,0}"),
          ("G_{-1}^{1,2}", _fam_key("1x2_-1", "[0:1]")), (_fam_key("1x2_-1", "[0:1]"), "G_{-1}^{1,2}")]
    return e


# ---------------------------------------------------------------------------
# invariance lists
# ---------------------------------------------------------------------------

CONFORMAL_FAMILIES = ("1x2_-1", "1x3_-1")


def _conformal_list(m: int) -> List[str]:
    return ["G_{-2}^{0,0}", "G_{-1}^{1,0}", "G_{-1}^{1,1}", "G_{-1}^{1,2}", "G_{-1}^{2,0}",
            "G_{-1}^{2,1}", "G_{-1}^{3,0}", "G_0^{1,1}", "G_0^{1,2}", "G_0^{1,3}",
            _fam_key("0x1_0", "[-2(m-1)i:1]"), "G_1^{0,0}"]


def _o_tiers(m: int) -> Dict[str, List[str]]:
    general = ["G_{-2}^{0,0}", "G_{-1}^{1,0}", "G_{-1}^{1,1}", "G_{-1}^{1,2}", "G_{-1}^{2,0}",
               "G_{-1}^{2,1}", "G_{-1}^{1,1} & G_{-1}^{3,0}", _fam_key("1x3_-1", "[-2i:1]"),
               "G_{-1}^{1,1} & G_0^{1,1}", "G_{-1}^{1,1} & G_0^{1,2}", "G_{-1}^{1,1} & G_0^{1,3}"]
    restricted = ["G_{-1}^{3,0}", "G_0^{1,1}"]
    ks = ["G_0^{1,2}", "G_0^{1,3}", _fam_key("0x1_0", "[-2(m-1)i:1]")]
    ks.append("G_1^{0,0}" if m > 2 else "G_{-1}^{1,1} & G_1^{0,0}")
    return {"general": general, "restricted": restricted, "kerr-schild": ks}


O_TIER_FAMILIES = {"general": ("1x2_-1",), "restricted": ("1x3_-1",), "kerr-schild": ()}
TIER_ORDER = ("general", "restricted", "kerr-schild")


def o_invariant_list(m: int, tier: str) -> Tuple[List[str], List[str]]:
    """Classes and whole families preserved by deformations of the given tier."""
    tiers = _o_tiers(m)
    upto = TIER_ORDER[: TIER_ORDER.index(tier) + 1]
    names = [n for t in upto for n in tiers[t]]
    fams = [f for t in upto for f in O_TIER_FAMILIES[t]]
    return names, fams


def conformal_invariant_list(m: int) -> Tuple[List[str], List[str]]:
    return _conformal_list(m), list(CONFORMAL_FAMILIES)


def membership(cls: TorsionClass, name: str) -> bool:
    """Membership of a class key, allowing ``A & B`` intersections and ``G``."""
    if name == "G":
        return True
    if " & " in name:
        return all(membership(cls, p) for p in name.split(" & "))
    return cls.member(name)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def classify(c: TorsionComponents, tol: float = DEFAULT_TOL, annotate: bool = True) -> TorsionClass:
    """Decide membership of every named submodule and detect family parameters."""
    if c.n_samples < 4:
        raise ValueError("classification needs at least 4 samples")
    m = c.m
    comps = {name: zero_verdict(_block(c, name), None, tol) for name in COMPONENT_NAMES}
    warnings = [f"component {k} is nonzero at only {v.n_above}/{v.n_samples} samples"
                for k, v in comps.items() if v.verdict == "mixed"]

    atom_cache: Dict[str, ZeroVerdict] = {}

    def atom_ok(atom: str) -> Tuple[bool, ZeroVerdict]:
        if atom not in atom_cache:
            atom_cache[atom] = comps[atom] if atom in comps else zero_verdict(_atom_array(c, atom), None, tol)
        v = atom_cache[atom]
        return v.verdict != "nonzero", v

    classes: Dict[str, ClassVerdict] = {}
    for name, atoms in _conditions(m).items():
        witness = None
        for atom in atoms:
            ok, v = atom_ok(atom)
            if not ok:
                witness = {"condition": atom, "max_rel": v.max_rel, "sample": v.witness_index}
                break
        classes[name] = ClassVerdict(witness is None, witness)
    for fam, lab, z, w in _special_params(m):
        v = family_member(c, fam, z, w, tol)
        ok = v.verdict != "nonzero"
        classes[_fam_key(fam, lab)] = ClassVerdict(ok, None if ok else {"max_rel": v.max_rel,
                                                                        "sample": v.witness_index})
    families = {f: detect_family(c, f, tol) for f in ("0x1_-1", "1x2_-1", "1x3_-1", "0x1_0")}
    out = TorsionClass(m, tol, comps, classes, families, warnings=warnings)
    out.flags = geometric_report(out, c)
    try:
        out.gray_hervella = gray_hervella(out, out.flags)
    except NotApplicable:
        out.gray_hervella = None
    if annotate:
        annotate_invariance(out)
    for big, small in lattice_edges(m):
        if membership(out, small) and not membership(out, big):
            out.warnings.append(f"lattice inconsistency: member of {small} but not of {big}")
    return out


def geometric_report(cls: TorsionClass, c: Optional[TorsionComponents] = None) -> Dict[str, bool]:
    """Geometric flags of the congruence and the Robinson structure."""
    z = cls.is_zero
    tau_zero = z("tau_w") and z("tau") and z("tau_o")
    sigma_zero = z("sigma_hb") and z("sigma")

    def combo(atom: str) -> bool:
        if c is None:
            raise ValueError("components needed for combined conditions")
        return zero_verdict(_atom_array(c, atom), None, cls.tol).verdict != "nonzero"

    f = {
        "geodesic": z("gamma"),
        "non_expanding": z("eps"),
        "non_twisting": tau_zero,
        "non_shearing": sigma_zero,
        "NN_in_Kperp": z("gamma") and z("tau"),
        "NNbar_in_Kperp": z("gamma") and z("tau_w") and z("tau_o"),
        "nearly_robinson": z("gamma") and z("sigma") and combo("P13:2j,-1"),
        "rho_preserved_along_K": z("gamma") and z("sigma_hb") and combo("P13:2j,1"),
        "N_parallel_along_K": z("gamma") and z("zeta"),
        "involutive": all(z(k) for k in ("gamma", "tau", "sigma", "zeta", "G3", "Gh")),
        "twist_induced": all(z(k) for k in ("gamma", "tau", "tau_o", "zeta", "G3")) and not z("tau_w"),
        "drho_alpha_rho": all(z(k) for k in ("gamma", "tau", "tau_o", "sigma_hb", "zeta", "G3", "Go")),
        "kundt": z("gamma") and z("eps") and tau_zero and sigma_zero,
        "robinson_trautman": z("gamma") and tau_zero and sigma_zero and not z("eps"),
        "torsion_free": all(z(k) for k in COMPONENT_NAMES),
    }
    f["expanding"] = not f["non_expanding"]
    f["twisting"] = not f["non_twisting"]
    f["shearing"] = not f["non_shearing"]
    f["maximally_twisting"] = f["twisting"] and _max_twist(c, cls.tol) if c is not None else False
    return f


def _max_twist(c: TorsionComponents, tol: float) -> bool:
    """Twist tau_{ij} of full rank 2m at every sample (real screen indices)."""
    if c.Kf is None:
        return False
    n = 2 * c.m + 2
    Ks = c.Kf[:, 1:n - 1, 1:n - 1]
    tw = 0.5 * (Ks - np.swapaxes(Ks, 1, 2))
    sv = np.linalg.svd(tw, compute_uv=False)
    ref = np.maximum(sv[:, 0], 1e-300)
    return bool(np.all(sv[:, -1] > 1e3 * tol * ref))


_GH_LABELS = {
    frozenset({1, 2, 3, 4}): "almost Hermitian",
    frozenset({2, 3, 4}): "G2",
    frozenset({1, 3, 4}): "G1",
    frozenset({1, 2, 4}): "W1+W2+W4",
    frozenset({1, 2, 3}): "semi-Kähler",
    frozenset({3, 4}): "Hermitian",
    frozenset({2, 4}): "incl. locally conformally almost Kähler",
    frozenset({2, 3}): "W2+W3",
    frozenset({1, 4}): "W1+W4",
    frozenset({1, 3}): "W1+W3",
    frozenset({1, 2}): "quasi-Kähler",
    frozenset({1}): "nearly Kähler",
    frozenset({2}): "almost Kähler",
    frozenset({3}): "special Hermitian",
    frozenset({4}): "incl. locally conformally Kähler",
    frozenset(): "Kähler",
}


def gray_hervella(cls: TorsionClass, flags: Optional[Dict[str, bool]] = None) -> str:
    """Gray–Hervella label of the leaf-space almost Hermitian structure.

    Applies to nearly Robinson structures of Kundt type; for the
    Robinson–Trautman type the label is returned with a caveat suffix since
    classes involving G_0^{1,0} are excluded there.
    """
    flags = flags if flags is not None else cls.flags
    if not flags.get("nearly_robinson"):
        raise NotApplicable("Gray–Hervella label needs a nearly Robinson structure")
    if not (flags.get("kundt") or flags.get("robinson_trautman")):
        raise NotApplicable("Gray–Hervella label needs Kundt or Robinson–Trautman type")
    present = {i for i, k in ((1, "G3"), (2, "Gh"), (3, "Go"), (4, "G_a")) if not cls.is_zero(k)}
    label = _GH_LABELS[frozenset(present)]
    if flags.get("robinson_trautman"):
        label += " (Robinson–Trautman type: W4 pieces not intrinsic)"
    return label


def annotate_invariance(cls: TorsionClass) -> TorsionClass:
    """Tag each class with conformal and o-invariance status."""
    m = cls.m
    conf = set(_conformal_list(m))
    tiers = _o_tiers(m)
    ann: Dict[str, dict] = {}
    names = list(cls.classes) + [n for t in tiers.values() for n in t if " & " in n]
    for name in names:
        tier = None
        for t in TIER_ORDER:
            if name in tiers[t]:
                tier = t
                break
        fam = next((f for f in ("1x2_-1", "1x3_-1") if name.startswith(_fam_key(f, ""))), None)
        if tier is None and fam is not None:
            tier = "general" if fam == "1x2_-1" else ("general" if name == _fam_key("1x3_-1", "[-2i:1]")
                                                      else "restricted")
        ann[name] = {
            "member": membership(cls, name),
            "conformal": name in conf or fam in CONFORMAL_FAMILIES,
            "o_tier": tier,
        }
    cls.invariance = ann
    return cls
