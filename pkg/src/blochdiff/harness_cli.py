"""Batch front end: experiment configs, sweeps, reports, and the CLI.

A config names one or more symbol quadruples (or a parametric family with
a sweep variable ``$t``), exponents, grid parameters, schedules, and
thresholds.  ``run_experiment`` evaluates every member, persists
report.json plus quantities.csv and the per-trace files, and never aborts
the sweep on a single member's failure.  ``coherence_audit`` re-reads the
reports and flags members whose finiteness flags disagree or whose
pairwise ratios leave the configured band.

Outputs are deterministic: fixed member order, fixed float formatting,
no wall-clock content in data files.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .analytic_fn import SymbolExpr, expr_from_dict
from .bloch import SamplingGrid
from .criteria import (DEFAULT_R_SCHEDULE, CriterionReport, DetectionThresholds,
                       SymbolQuadruple, default_n_schedule, evaluate_quadruple)
from .errors import BlochDiffError, ConfigError
from .version import __version__

CSV_COLUMNS = ("member_id", "t", "Q_iia", "Q_iib", "Q_iii", "Q_iv",
               "essA", "essB", "essLower", "bounded", "compact")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def _subst_t(node, t: float):
    """Replace the literal "$t" by the sweep value anywhere in a record."""
    if node == "$t":
        return t
    if isinstance(node, list):
        return [_subst_t(x, t) for x in node]
    if isinstance(node, dict):
        return {k: _subst_t(v, t) for k, v in node.items()}
    return node


@dataclass(frozen=True)
class MemberSpec:
    """One resolved sweep member: id, sweep value (if any), and symbols."""

    member_id: str
    t: float | None
    phi: SymbolExpr
    psi: SymbolExpr
    g: SymbolExpr
    h: SymbolExpr
    alpha: float
    beta: float
    declare_self_maps: bool


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    members: list
    grid: SamplingGrid
    n_schedule: list
    r_schedule: list
    thresholds: DetectionThresholds
    a_per_ring: int
    ratio_band: float
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls._parse(d)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def _parse(cls, d: dict) -> "ExperimentConfig":
        alpha = float(d.get("alpha", 1.0))
        beta = float(d.get("beta", 1.0))
        gd = d.get("grid", {})
        grid = SamplingGrid(levels=int(gd.get("levels", 14)),
                            c_ang=int(gd.get("c_ang", 64)),
                            refinement_depth=int(gd.get("refinement_depth", 12)))
        if "n_schedule" in d:
            n_schedule = [int(n) for n in d["n_schedule"]]
        else:
            n_schedule = default_n_schedule(int(d.get("nmax", 4096)))
        if any(b <= a for a, b in zip(n_schedule, n_schedule[1:])):
            raise ConfigError("n_schedule must increase strictly")
        r_schedule = [float(r) for r in d.get("r_schedule", DEFAULT_R_SCHEDULE)]
        if any(b <= a for a, b in zip(r_schedule, r_schedule[1:])) or \
                not r_schedule or r_schedule[-1] >= 1.0:
            raise ConfigError("r_schedule must increase strictly inside (0, 1)")
        td = d.get("thresholds", {})
        thresholds = DetectionThresholds(
            divergence_factor=float(td.get("divergence_factor", 10.0)),
            divergence_window=int(td.get("divergence_window", 4)),
            compact_eps=float(td.get("compact_eps", 1e-3)),
            ess_tail_n0=int(td.get("ess_tail_n0", 64)),
        )
        if thresholds.ess_tail_n0 >= n_schedule[-1]:
            raise ConfigError("thresholds.ess_tail_n0 must sit below max(n_schedule)")
        a_per_ring = int(d.get("a_samples", {}).get("per_ring", 4))
        ratio_band = float(d.get("thresholds", {}).get("ratio_band", 100.0))
        if ratio_band <= 1.0:
            raise ConfigError("ratio_band must exceed 1")

        members: list = []

        def build_member(mid, t, rec):
            try:
                phi = expr_from_dict(rec["phi"])
                psi = expr_from_dict(rec["psi"])
                g = expr_from_dict(rec["g"])
                h = expr_from_dict(rec["h"])
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"member {mid!r}: {exc}") from exc
            members.append(MemberSpec(
                member_id=str(mid), t=t, phi=phi, psi=psi, g=g, h=h,
                alpha=float(rec.get("alpha", alpha)),
                beta=float(rec.get("beta", beta)),
                declare_self_maps=bool(rec.get("declared_self_maps", False)),
            ))

        for rec in d.get("quadruples", []):
            if "id" not in rec:
                raise ConfigError("every quadruple needs an 'id'")
            build_member(rec["id"], None, rec)
        fam = d.get("family")
        if fam is not None:
            prefix = str(fam.get("prefix", "t"))
            ts = [float(t) for t in fam["t_values"]]
            if not ts:
                raise ConfigError("family.t_values must be nonempty")
            for t in ts:
                rec = _subst_t({k: v for k, v in fam.items()
                                if k not in ("prefix", "t_values")}, t)
                build_member(f"{prefix}{_fmt(t)}", t, rec)
        if not members:
            raise ConfigError("config names no quadruples and no family")
        ids = [m.member_id for m in members]
        if len(set(ids)) != len(ids):
            raise ConfigError("member ids must be unique")
        return cls(members=members, grid=grid, n_schedule=n_schedule,
                   r_schedule=r_schedule, thresholds=thresholds,
                   a_per_ring=a_per_ring, ratio_band=ratio_band, raw=d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class SweepResult:
    """Per-member reports plus aggregate ratio statistics and coherence
    counterexamples."""

    reports: dict
    errors: dict
    ratio_stats: dict
    counterexamples: list

    @property
    def ok(self) -> bool:
        return not self.errors and not self.counterexamples


def _evaluate_member(member: MemberSpec, config: ExperimentConfig) -> CriterionReport:
    quad = SymbolQuadruple(member.phi, member.psi, member.g, member.h,
                           member.alpha, member.beta,
                           declare_self_maps=member.declare_self_maps)
    return evaluate_quadruple(quad, config.grid, config.n_schedule,
                              config.r_schedule, config.thresholds,
                              config.a_per_ring, member_id=member.member_id)


def _quantity_cell(qdict: dict) -> str:
    if qdict["diverging"]:
        return "diverging"
    return _fmt(qdict["value"])


def _csv_row(member: MemberSpec, rep: dict | None, err: str | None) -> list:
    if rep is None:
        return [member.member_id, _fmt(member.t), "error", "error", "error",
                "error", "error", "error", "error", "error", "error"]
    return [
        member.member_id,
        _fmt(member.t),
        _quantity_cell(rep["Q_iia"]),
        _quantity_cell(rep["Q_iib"]),
        _quantity_cell(rep["Q_iii"]),
        _quantity_cell(rep["Q_iv"]),
        _fmt(rep["ess_A"]["value"]),
        _quantity_cell(rep["ess_B"]),
        _quantity_cell(rep["ess_lower"]),
        rep["bounded_verdict"],
        rep["compact_verdict"],
    ]


def _write_outputs(out_dir: Path, config: ExperimentConfig,
                   reports: dict, errors: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {
        "provenance": {
            "library_version": __version__,
            "grid": {"levels": config.grid.levels, "c_ang": config.grid.c_ang,
                     "refinement_depth": config.grid.refinement_depth},
            "n_schedule": config.n_schedule,
            "r_schedule": config.r_schedule,
            "thresholds": config.thresholds.to_dict(),
            "a_per_ring": config.a_per_ring,
            "ratio_band": config.ratio_band,
        },
        "members": {},
    }
    for m in config.members:
        mid = m.member_id
        if mid in reports:
            doc["members"][mid] = reports[mid]
        elif mid in errors:
            doc["members"][mid] = {"error": errors[mid]}
    with open(out_dir / "report.json", "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")

    lines = [",".join(CSV_COLUMNS)]
    for m in config.members:
        rep = reports.get(m.member_id)
        lines.append(",".join(_csv_row(m, rep, errors.get(m.member_id))))
    (out_dir / "quantities.csv").write_text("\n".join(lines) + "\n")

    n_lines = ["member_id,n,value"]
    r_lines = ["member_id,r,term_phi,term_psi,term_joint,total"]
    for m in config.members:
        rep = reports.get(m.member_id)
        if rep is None:
            continue
        q_iv = rep["Q_iv"]
        for n, v in zip(q_iv["trace_index"], q_iv["trace"]):
            n_lines.append(f"{m.member_id},{n},{_fmt(v)}")
        for row in rep["ess_A"]["rows"]:
            r_lines.append(",".join([m.member_id, _fmt(row["r"]),
                                     _fmt(row["term_phi"]), _fmt(row["term_psi"]),
                                     _fmt(row["term_joint"]), _fmt(row["total"])]))
    (out_dir / "n_trace.csv").write_text("\n".join(n_lines) + "\n")
    (out_dir / "r_trace.csv").write_text("\n".join(r_lines) + "\n")


def _ratio_stats(reports: dict) -> dict:
    stats: dict = {}
    for rep in reports.values():
        key = f"alpha={_fmt(rep['alpha'])},beta={_fmt(rep['beta'])}"
        bucket = stats.setdefault(key, {})
        for pair, val in rep["cross_ratios"].items():
            if val is None:
                continue
            lo, hi = bucket.get(pair, (val, val))
            bucket[pair] = (min(lo, val), max(hi, val))
    return {k: {p: [v[0], v[1]] for p, v in b.items()} for k, b in stats.items()}


def coherence_audit(reports: dict, ratio_band: float = 100.0) -> list:
    """Findings: members with disagreeing finiteness flags or pairwise
    ratios outside [1/ratio_band, ratio_band].  Empty list means pass."""
    findings = []
    for mid in sorted(reports):
        rep = reports[mid]
        if "error" in rep:
            findings.append({"member_id": mid, "kind": "member_error",
                             "detail": rep["error"]})
            continue
        flags = [rep[q]["diverging"] for q in ("Q_iia", "Q_iib", "Q_iii", "Q_iv")]
        if any(flags) and not all(flags):
            findings.append({
                "member_id": mid, "kind": "finiteness_disagreement",
                "detail": {q: rep[q]["diverging"]
                           for q in ("Q_iia", "Q_iib", "Q_iii", "Q_iv")},
            })
        for pair, val in rep["cross_ratios"].items():
            if val is None:
                continue
            if not (1.0 / ratio_band <= val <= ratio_band):
                findings.append({"member_id": mid, "kind": "ratio_out_of_band",
                                 "detail": {"pair": pair, "ratio": val,
                                            "band": ratio_band}})
    return findings


def run_experiment(config: ExperimentConfig, out_dir, threads: int = 1,
                   resume: bool = True) -> SweepResult:
    """Evaluate every member, persist artifacts, and audit coherence.

    With ``resume`` (default), members already present in an existing
    report.json with no error entry are not recomputed.
    """
    out_dir = Path(out_dir)
    reports: dict = {}
    errors: dict = {}
    if resume and (out_dir / "report.json").exists():
        try:
            with open(out_dir / "report.json") as fh:
                prior = json.load(fh).get("members", {})
        except (OSError, json.JSONDecodeError):
            prior = {}
        for mid, rep in prior.items():
            if "error" not in rep:
                reports[mid] = rep

    todo = [m for m in config.members if m.member_id not in reports]

    def work(member: MemberSpec):
        try:
            return member.member_id, _evaluate_member(member, config).to_dict(), None
        except BlochDiffError as exc:
            return member.member_id, None, f"{type(exc).__name__}: {exc}"

    if threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, todo))
    else:
        results = [work(m) for m in todo]
    for mid, rep, err in results:
        if err is None:
            reports[mid] = rep
        else:
            errors[mid] = err

    _write_outputs(out_dir, config, reports, errors)
    counterexamples = coherence_audit(
        {mid: reports[mid] for mid in reports}, config.ratio_band)
    return SweepResult(reports=reports, errors=errors,
                       ratio_stats=_ratio_stats(reports),
                       counterexamples=counterexamples)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _cmd_run(args) -> int:
    try:
        config = ExperimentConfig.from_file(args.config)
        if args.grid_levels is not None or args.nmax is not None:
            raw = dict(config.raw)
            if args.grid_levels is not None:
                raw.setdefault("grid", {})
                raw["grid"] = dict(raw["grid"], levels=args.grid_levels)
            if args.nmax is not None:
                raw.pop("n_schedule", None)
                raw["nmax"] = args.nmax
            config = ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    result = run_experiment(config, args.out, threads=args.threads)
    n_done = len(result.reports)
    print(f"computed {n_done}/{len(config.members)} members -> {args.out}")
    for mid, err in sorted(result.errors.items()):
        print(f"member {mid} failed: {err}", file=sys.stderr)
    for finding in result.counterexamples:
        print(f"coherence: {finding}", file=sys.stderr)
    if result.counterexamples:
        return 2
    if result.errors:
        return 1
    return 0


def _cmd_audit(args) -> int:
    path = Path(args.in_dir) / "report.json"
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: cannot read {path}: {exc}", file=sys.stderr)
        return 3
    band = doc.get("provenance", {}).get("ratio_band", 100.0)
    findings = coherence_audit(doc.get("members", {}), band)
    if not findings:
        print(f"audit clean: {len(doc.get('members', {}))} members")
        return 0
    for finding in findings:
        print(f"finding: {finding}")
    return 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blochdiff",
        description="criterion sweeps for differences of integral-type "
                    "composition operators on weighted-derivative spaces")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a config and emit reports")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--grid-levels", type=int, default=None, dest="grid_levels")
    run.add_argument("--nmax", type=int, default=None)
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=_cmd_run)

    audit = sub.add_parser("audit", help="re-check coherence of a sweep directory")
    audit.add_argument("--in", required=True, dest="in_dir")
    audit.set_defaults(func=_cmd_audit)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
