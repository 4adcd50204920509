"""Command-line front end.

Usage::

    robinson classify TARGET [--samples N] [--seed S] [--tol T] [--json PATH]
    robinson verify TARGET
    robinson transform TARGET (--conformal EXPR | --alpha "a0,a1,..." [--tier TIER])
    robinson catalog list
    robinson catalog run [NAME ...]
    robinson catalog export NAME

TARGET is a path to a TOML manifest or ``catalog:<name>``.  Exit codes: 0
success, 2 validation failure (bad arguments or manifest), 3 numeric failure
(ill-conditioned frame, failed identity), 4 invariance or expectation
violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, TextIO, Tuple

import numpy as np

from . import __version__
from .catalog import CatalogEntry, entry_names, expected_residuals, get_entry
from .classify import TorsionClass, classify
from .expr import ExprError, SampleSet, parse_expr, sample_points
from .geometry import (
    CoframeField, GeometryError, ManifestError, coframe_to_manifest, frame_data, load_manifest,
    verify_rho_identity,
)
from .torsion import COMPONENT_NAMES, components_of, symmetry_residuals
from .transform import (
    ODeform, TierViolation, TIERS, conformal_transform_and_reclassify, o_transform_and_reclassify,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_INVARIANCE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    target: str
    samples: int = 8
    seed: int = 0
    tol: float = 1e-8
    json_path: Optional[str] = None

    def validate(self) -> None:
        if self.samples < 4:
            raise CliError(f"--samples must be at least 4, got {self.samples}", EXIT_VALIDATION)
        if not (0.0 < self.tol < 1e-3):
            raise CliError(f"--tol must lie in (0, 1e-3), got {self.tol}", EXIT_VALIDATION)


def _resolve(cfg: RunConfig) -> Tuple[CoframeField, Optional[CatalogEntry]]:
    if cfg.target.startswith("catalog:"):
        name = cfg.target.split(":", 1)[1]
        try:
            entry = get_entry(name)
        except KeyError:
            raise CliError(f"unknown catalog entry {name!r}; try 'robinson catalog list'", EXIT_VALIDATION)
        return entry.coframe, entry
    try:
        man = load_manifest(cfg.target)
    except ManifestError as exc:
        raise CliError(f"manifest error: {exc}", EXIT_VALIDATION)
    return man.coframe, None


def _samples(cf: CoframeField, cfg: RunConfig) -> SampleSet:
    try:
        return sample_points(cf.chart, cfg.samples, cfg.seed)
    except ExprError as exc:
        raise CliError(f"sampling failed: {exc}", EXIT_NUMERIC)


def _header(cfg: RunConfig, cf: CoframeField) -> dict:
    return {"program": "robinson", "version": __version__, "target": cfg.target,
            "name": cf.name, "m": cf.m, "samples": cfg.samples, "seed": cfg.seed, "tol": cfg.tol}


def _clean(x):
    """Convert numpy scalars and containers to plain JSON types."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def report_dict(cfg: RunConfig, cf: CoframeField, cls: TorsionClass) -> dict:
    d = cls.to_dict()
    comps = {k: {"max_abs": v["max_abs"], "verdict": v["verdict"], "max_rel": v["max_rel"]}
             for k, v in d["components"].items()}
    return _clean({"header": _header(cfg, cf), "components": comps, "classes": d["classes"],
                   "families": d["families"], "flags": d["flags"], "gray_hervella": d["gray_hervella"],
                   "invariance": d["invariance"], "warnings": d["warnings"]})


def dumps(d: dict) -> str:
    return json.dumps(d, indent=2, sort_keys=False) + "\n"


def _write_json(path: Optional[str], d: dict, out: TextIO) -> None:
    if path is None:
        return
    text = dumps(d)
    if path == "-":
        out.write(text)
    else:
        with open(path, "w", encoding="utf8") as fh:
            fh.write(text)


def _mark(ok: bool) -> str:
    return "✓" if ok else "✗"


def summary(cfg: RunConfig, cf: CoframeField, cls: TorsionClass) -> str:
    lines = [f"# robinson {__version__}  target={cfg.target}  m={cf.m}  samples={cfg.samples}  "
             f"seed={cfg.seed}  tol={cfg.tol:g}", "", "components:"]
    for k in COMPONENT_NAMES:
        v = cls.components[k]
        lines.append(f"  {k:9s} {v.verdict:8s} max|.|={v.max_abs:.3e}")
    lines += ["", "classes:"]
    for k, v in cls.classes.items():
        lines.append(f"  {_mark(v.member)} {k}")
    lines += ["", "families:"]
    for k, f in cls.families.items():
        lab = f.label() if f.kind == "unique" else f.kind
        lines.append(f"  {k:8s} {lab}  (residual {f.residual:.2e})")
    lines += ["", "flags:"]
    for k, v in cls.flags.items():
        lines.append(f"  {_mark(v)} {k}")
    lines += ["", f"Gray-Hervella: {cls.gray_hervella if cls.gray_hervella else 'not applicable'}"]
    for w in cls.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _classify(cf: CoframeField, s: SampleSet, tol: float) -> TorsionClass:
    try:
        return classify(components_of(cf, s), tol)
    except GeometryError as exc:
        raise CliError(f"numeric failure: {exc}", EXIT_NUMERIC)
    except (ExprError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise CliError(f"numeric failure: {exc}", EXIT_NUMERIC)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(cfg: RunConfig, out: TextIO) -> int:
    cfg.validate()
    cf, _ = _resolve(cfg)
    s = _samples(cf, cfg)
    cls = _classify(cf, s, cfg.tol)
    if cfg.json_path != "-":
        out.write(summary(cfg, cf, cls))
    _write_json(cfg.json_path, report_dict(cfg, cf, cls), out)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, out: TextIO) -> int:
    cfg.validate()
    cf, _ = _resolve(cfg)
    s = _samples(cf, cfg)
    try:
        fd = frame_data(cf, s)
    except GeometryError as exc:
        raise CliError(f"numeric failure: {exc}", EXIT_NUMERIC)
    _, _, rho, _ = fd.omega_rho()
    v = verify_rho_identity(fd.g, fd.kappa, rho, ginv=fd.ginv, tol=max(cfg.tol, 1e-12))
    sym = symmetry_residuals(components_of(cf, s))
    worst = max(sym.values()) if sym else 0.0
    ok = v.is_zero and worst <= cfg.tol
    out.write(f"# robinson {__version__}  target={cfg.target}  samples={cfg.samples}  seed={cfg.seed}\n")
    out.write(f"  {_mark(True)} coframe invertible, real, Hermitian and Lorentzian "
              f"(max cond {float(np.max(fd.cond)):.3e})\n")
    out.write(f"  {_mark(v.is_zero)} quadratic identity for rho (max rel {v.max_rel:.3e})\n")
    out.write(f"  {_mark(worst <= cfg.tol)} component symmetries (max rel {worst:.3e})\n")
    if cfg.json_path:
        _write_json(cfg.json_path, _clean({"header": _header(cfg, cf), "ok": ok,
                                           "rho_identity": {"verdict": v.verdict, "max_rel": v.max_rel},
                                           "symmetries": sym}), out)
    return EXIT_OK if ok else EXIT_NUMERIC


def _parse_alpha(cf: CoframeField, text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != cf.n:
        raise CliError(f"--alpha needs {cf.n} comma-separated components, got {len(parts)}", EXIT_VALIDATION)
    try:
        return [parse_expr(p, cf.chart) for p in parts]
    except ExprError as exc:
        raise CliError(f"--alpha: {exc}", EXIT_VALIDATION)


def cmd_transform(cfg: RunConfig, out: TextIO, conformal: Optional[str], alpha: Optional[str],
                  tier: str) -> int:
    cfg.validate()
    if (conformal is None) == (alpha is None):
        raise CliError("give exactly one of --conformal or --alpha", EXIT_VALIDATION)
    cf, _ = _resolve(cfg)
    s = _samples(cf, cfg)
    try:
        if conformal is not None:
            try:
                phi = parse_expr(conformal, cf.chart)
            except ExprError as exc:
                raise CliError(f"--conformal: {exc}", EXIT_VALIDATION)
            after, comp = conformal_transform_and_reclassify(cf, phi, s, cfg.tol)
            what = f"conformal rescaling by exp(2*({conformal}))"
        else:
            al = _parse_alpha(cf, alpha)
            try:
                after, comp = o_transform_and_reclassify(cf, ODeform(tuple(al), tier), tier, s, cfg.tol)
            except TierViolation as exc:
                raise CliError(f"tier violated: {exc}", EXIT_VALIDATION)
            what = f"optical deformation (tier {tier})"
    except GeometryError as exc:
        raise CliError(f"numeric failure: {exc}", EXIT_NUMERIC)
    if cfg.json_path != "-":
        out.write(f"# robinson {__version__}  target={cfg.target}  samples={cfg.samples}  "
                  f"seed={cfg.seed}  tol={cfg.tol:g}\n# {what}\n")
        if not comp.changed and not comp.violations:
            out.write("no class membership changed\n")
        for nm in comp.changed:
            tag = "INVARIANCE VIOLATION" if nm in comp.violations else "allowed (not expected invariant)"
            out.write(f"  {nm}: {comp.before[nm]} -> {comp.after[nm]}  [{tag}]\n")
        for fam, (b, a) in comp.families.items():
            flag = "  [INVARIANCE VIOLATION]" if f"family {fam}" in comp.violations else ""
            out.write(f"  family {fam}: {b} -> {a}{flag}\n")
    if cfg.json_path:
        _write_json(cfg.json_path, _clean({"header": _header(cfg, cf), "transform": what,
                                           "comparison": comp.to_dict(),
                                           "after": report_dict(cfg, cf, after)}), out)
    return EXIT_OK if comp.ok else EXIT_INVARIANCE


def check_entry(entry: CatalogEntry, cls: TorsionClass, s: SampleSet, comps=None) -> List[str]:
    """Differences between a classification and the entry's expected record."""
    bad = []
    for k in entry.expected_zero:
        if not cls.is_zero(k):
            bad.append(f"component {k} expected zero")
    for k in entry.expected_nonzero:
        if cls.is_zero(k):
            bad.append(f"component {k} expected nonzero")
    for k in entry.expected_members:
        if not cls.member(k):
            bad.append(f"expected member of {k}")
    for k in entry.expected_nonmembers:
        if cls.member(k):
            bad.append(f"expected non-member of {k}")
    for k, v in entry.expected_flags.items():
        if bool(cls.flags.get(k)) != bool(v):
            bad.append(f"flag {k} expected {v}")
    if comps is not None:
        for key, (r, status) in expected_residuals(entry, comps, s).items():
            if status == "exact" and r > 1e-8:
                bad.append(f"closed form {key} off by {r:.2e}")
    return bad


def cmd_catalog(action: str, names: Sequence[str], cfg: RunConfig, out: TextIO) -> int:
    if action == "list":
        for nm in entry_names():
            e = get_entry(nm)
            out.write(f"{nm:24s} n={e.coframe.n}  {e.description}\n")
        return EXIT_OK
    if action == "export":
        if len(names) != 1:
            raise CliError("catalog export takes exactly one entry name", EXIT_VALIDATION)
        try:
            e = get_entry(names[0])
        except KeyError:
            raise CliError(f"unknown catalog entry {names[0]!r}", EXIT_VALIDATION)
        out.write(coframe_to_manifest(e.coframe, cfg.samples, cfg.seed, cfg.tol))
        return EXIT_OK
    cfg.validate()
    todo = list(names) or entry_names()
    status = EXIT_OK
    report = {}
    for nm in todo:
        try:
            e = get_entry(nm)
        except KeyError:
            raise CliError(f"unknown catalog entry {nm!r}", EXIT_VALIDATION)
        s = sample_points(e.chart, cfg.samples, cfg.seed)
        try:
            comps = components_of(e.coframe, s)
        except GeometryError as exc:
            raise CliError(f"{nm}: numeric failure: {exc}", EXIT_NUMERIC)
        cls = classify(comps, cfg.tol)
        bad = check_entry(e, cls, s, comps)
        report[nm] = {"ok": not bad, "problems": bad, "members": cls.members()}
        if cfg.json_path != "-":
            out.write(f"{_mark(not bad)} {nm}\n")
            for b in bad:
                out.write(f"    {b}\n")
        if bad:
            status = EXIT_INVARIANCE
    if cfg.json_path:
        _write_json(cfg.json_path, _clean({"header": {"program": "robinson", "version": __version__,
                                                      "samples": cfg.samples, "seed": cfg.seed,
                                                      "tol": cfg.tol}, "entries": report}), out)
    return status


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=8, help="number of sample points (at least 4)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (echoed in the report)")
    p.add_argument("--tol", type=float, default=1e-8, help="relative zero tolerance in (0, 1e-3)")
    p.add_argument("--json", dest="json_path", default=None, metavar="PATH",
                   help="write the JSON report to PATH ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robinson", description="Intrinsic torsion of almost Robinson structures.")
    ap.add_argument("--version", action="version", version=f"robinson {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="classify a manifest or catalog entry")
    p.add_argument("target", help="manifest path or catalog:<name>")
    _common(p)
    p = sub.add_parser("verify", help="check the coframe, the quadratic identity and component symmetries")
    p.add_argument("target")
    _common(p)
    p = sub.add_parser("transform", help="conformal rescaling or optical deformation, then reclassify")
    p.add_argument("target")
    _common(p)
    p.add_argument("--conformal", metavar="EXPR", help="phi in g -> exp(2 phi) g")
    p.add_argument("--alpha", metavar="A0,A1,...", help="coordinate components of alpha in g -> g + 2 kappa.alpha")
    p.add_argument("--tier", choices=TIERS, default="general", help="deformation tier for --alpha")
    p = sub.add_parser("catalog", help="list, run or export built-in examples")
    p.add_argument("action", choices=("list", "run", "export"))
    p.add_argument("names", nargs="*")
    _common(p)
    return ap


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = sys.stdout if out is None else out
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2 already
        return int(exc.code) if isinstance(exc.code, int) else EXIT_VALIDATION
    target = getattr(args, "target", "")
    cfg = RunConfig(target, args.samples, args.seed, args.tol, args.json_path)
    try:
        if args.command == "classify":
            return cmd_classify(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out)
        if args.command == "transform":
            return cmd_transform(cfg, out, args.conformal, args.alpha, args.tier)
        return cmd_catalog(args.action, args.names, cfg, out)
    except CliError as exc:
        sys.stderr.write(f"robinson: {exc}\n")
        return exc.code


def entry_point() -> None:  # pragma: no cover - console script wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entry_point()
