"""Command-line front end.

Subcommands: ``analyze``, ``simulate``, ``report``, ``protocol-demo`` and
``delta``. Machine outputs are JSON with sorted keys plus ``bin,count``
CSV histograms written next to the JSON file.

Exit status: 0 on success, 2 for bad input, 3 when an internal
invariant is violated.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from . import cost, trust
from .cost import CostModelError, HandshakeMode
from .domain import DomainError, DomainTree, load_corpus
from .protocol import CodecError, ConfigurationError, HandshakeError
from .protocol.config import build_server_set, load_config, parse_script, run_script
from .simulator import (
    InvariantViolation,
    PathUnlockRule,
    ResumptionPolicy,
    SimulationError,
    pairwise_mean,
    resumption_ratio,
    simulate_corpus,
)
from .trust import TrustError, TrustRelationSet

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3


class ReportError(ValueError):
    pass


@dataclass
class RunConfig:
    corpus_dir: Path | None = None
    relation_files: list[tuple[str, str | None]] = field(default_factory=list)
    policies: list[ResumptionPolicy] = field(default_factory=lambda: list(ResumptionPolicy))
    unlock_rule: PathUnlockRule = PathUnlockRule.ALONG_PATH
    cost_table: Path | None = None
    histogram_cutoff: int = 25
    output: Path | None = None
    rtt_ms: float = 60.0
    seed: int = 0

    def validate(self) -> None:
        if self.corpus_dir is None or not Path(self.corpus_dir).is_dir():
            raise DomainError(f"corpus directory {self.corpus_dir} does not exist")
        if self.histogram_cutoff < 1:
            raise SimulationError("--cutoff must be at least 1")


def _parse_relation_arg(value: str) -> tuple[str, str | None]:
    """``cert`` alone derives relations from the corpus certificates."""
    if "=" in value:
        src, path = value.split("=", 1)
    elif value in ("cert", "certificate"):
        src, path = "cert", None
    else:
        src, path = "auto", value
    if src not in ("cert", "resumption", "auto"):
        raise argparse.ArgumentTypeError(f"relation source must be cert or resumption, got {src!r}")
    return src, path


def _load_relation_sets(cfg: RunConfig, corpus: list[DomainTree]) -> dict[str, TrustRelationSet]:
    """Relation sets by source name ('certificate', 'resumption')."""
    known = {h for t in corpus for h in t.nodes}
    specs = cfg.relation_files or [("cert", None)]
    sets: dict[str, TrustRelationSet] = {}
    for src, path in specs:
        if path is None:
            rel = trust.cert_trust_relations(corpus)
        else:
            if not Path(path).exists():
                raise TrustError(f"relation file {path} does not exist")
            rel = trust.load_relations(path, known)
        name = {"cert": "certificate", "resumption": "resumption"}.get(src, rel.source)
        if name in sets:
            rel = trust.TrustRelationSet(sets[name].source, sets[name].relations | rel.relations)
        sets[name] = rel
    return sets


def _combined(sets: dict[str, TrustRelationSet]) -> TrustRelationSet:
    out = None
    for rel in sets.values():
        out = rel if out is None else trust.union_relations(out, rel)
    return out if out is not None else TrustRelationSet("union", frozenset())


def _table(cfg: RunConfig) -> cost.HandshakeCostTable:
    return cost.read_cost_table(cfg.cost_table) if cfg.cost_table else cost.load_default_table()


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sidecar(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}.csv")


def cmd_analyze(cfg: RunConfig) -> dict:
    cfg.validate()
    corpus = load_corpus(cfg.corpus_dir)
    if not corpus:
        raise DomainError(f"corpus {cfg.corpus_dir} holds no trees")
    sets = _load_relation_sets(cfg, corpus)
    if len(sets) > 1:
        sets["union"] = _combined(sets)
    doc = {"sites": len(corpus), "sources": {}}
    for name, rel in sets.items():
        stats = trust.group_stats(corpus, rel)
        doc["sources"][name] = stats.to_json()
        if cfg.output:
            lines = ["bin,count"] + [f"{k},{v}" for k, v in sorted(stats.root_group_sizes.items())]
            _sidecar(cfg.output, f"root_group_{name}").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if cfg.output:
        _write_json(cfg.output, doc)
    return doc


def _check_dominance(reports: dict[ResumptionPolicy, object]) -> None:
    if len(reports) < 3:
        return
    none = reports[ResumptionPolicy.NO_RESUMPTION].per_site
    same = reports[ResumptionPolicy.SAME_HOSTNAME].per_site
    across = reports[ResumptionPolicy.ACROSS_HOSTNAMES].per_site
    for a, b, c in zip(none, same, across):
        if not (a.full_handshakes == b.full_handshakes >= c.full_handshakes):
            raise InvariantViolation(f"{a.site_root}: policy dominance violated")
        if not c.longest_full_path <= b.longest_full_path == b.longest_total_path:
            raise InvariantViolation(f"{a.site_root}: path dominance violated")


def cmd_simulate(cfg: RunConfig) -> dict:
    cfg.validate()
    corpus = load_corpus(cfg.corpus_dir)
    if not corpus:
        raise DomainError(f"corpus {cfg.corpus_dir} holds no trees")
    sets = _load_relation_sets(cfg, corpus)
    relations = _combined(sets)
    # cross-site pairs need certificate relations between hosts of different trees
    pair_sets = dict(sets)
    if not cfg.relation_files or any(src == "cert" and p is None for src, p in cfg.relation_files):
        pair_sets["certificate"] = trust.TrustRelationSet(
            "certificate",
            trust.cert_trust_relations(corpus, scope="corpus").relations
            | sets.get("certificate", TrustRelationSet("certificate", frozenset())).relations,
        )
    pair_relations = _combined(pair_sets)
    table = _table(cfg)

    reports = {p: simulate_corpus(corpus, relations, p, cfg.unlock_rule, table, cfg.histogram_cutoff, cfg.rtt_ms)
               for p in cfg.policies}
    _check_dominance(reports)
    doc: dict = {
        "config": {
            "sites": len(corpus),
            "relation_sources": sorted(sets),
            "rule": cfg.unlock_rule.value,
            "cutoff": cfg.histogram_cutoff,
            "rtt_ms": cfg.rtt_ms,
        },
        "policies": {p.value: r.to_json() for p, r in reports.items()},
        "delta_ms": _delta_doc(table),
    }
    if len(corpus) >= 2:
        doc["pairwise_mean_full"] = {p.value: pairwise_mean(corpus, pair_relations, p) for p in cfg.policies}
    if ResumptionPolicy.ACROSS_HOSTNAMES in reports:
        doc["resumption_ratio"] = resumption_ratio(corpus, relations, ResumptionPolicy.ACROSS_HOSTNAMES)
    if cfg.output:
        _write_json(cfg.output, doc)
        for p, r in reports.items():
            _sidecar(cfg.output, f"full_{p.value}").write_text(r.full_histogram.to_csv(), encoding="utf-8")
            _sidecar(cfg.output, f"path_{p.value}").write_text(r.path_histogram.to_csv(), encoding="utf-8")
    return doc


def _delta_doc(table: cost.HandshakeCostTable) -> dict:
    out = {}
    for key, mode in (("resumed_1rtt", HandshakeMode.TLS13_RESUMED_1RTT),
                      ("resumed_0rtt", HandshakeMode.TLS13_RESUMED_0RTT)):
        d = cost.derive_delta(table, mode)
        out[key] = {"low": d.low_ms, "high": d.high_ms, "rtt_coefficient": d.rtt_coefficient,
                    "rows": {repr(k): v for k, v in cost.delta_per_row(table, mode).items()}}
    return out


def load_report(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot read report {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno} (char {exc.pos})") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("policies"), dict) or not doc["policies"]:
        raise ReportError(f"{path}: not a simulation report (missing 'policies')")
    return doc


_COLUMN_TITLES = {"none": "no resumption", "same": "same hostname", "across": "across hostnames"}


def cmd_report(report_path: str | Path, out: TextIO | None = None) -> str:
    out = out or sys.stdout
    doc = load_report(report_path)
    cols = [p for p in ("none", "same", "across") if p in doc["policies"]]

    def fmt(v) -> str:
        return "-" if v is None else f"{v:.2f}"

    rows = []
    try:
        for label, getter in [
            ("full handshakes", lambda r: r["means"]["full_handshakes"]),
            ("resumed handshakes", lambda r: r["means"]["resumed_handshakes"]),
            ("longest full path", lambda r: r["means"]["longest_full_path"]),
            ("longest total path", lambda r: r["means"]["longest_total_path"]),
            ("CPU savings ms", lambda r: r["savings"]["cpu_saved_ms"] if r["savings"] else None),
            ("CPU savings %", lambda r: r["savings"]["cpu_saved_percent"] if r["savings"] else None),
        ]:
            rows.append([label] + [fmt(getter(doc["policies"][c])) for c in cols])
    except (KeyError, TypeError) as exc:
        raise ReportError(f"{report_path}: report lacks field {exc}") from exc
    if "pairwise_mean_full" in doc:
        rows.append(["two-site full handshakes"] + [fmt(doc["pairwise_mean_full"].get(c)) for c in cols])
    header = ["metric"] + [_COLUMN_TITLES[c] for c in cols]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = []
    for r in [header] + rows:
        lines.append("  ".join(cell.ljust(widths[0]) if i == 0 else cell.rjust(widths[i])
                               for i, cell in enumerate(r)))
    text = "\n".join(lines) + "\n"
    out.write(text)
    return text


def cmd_delta(table: cost.HandshakeCostTable, hops: float, rtt_ms: float, out: TextIO | None = None) -> dict:
    one = cost.derive_delta(table, HandshakeMode.TLS13_RESUMED_1RTT)
    zero = cost.derive_delta(table, HandshakeMode.TLS13_RESUMED_0RTT)
    w = (out or sys.stdout).write
    w("delay saved by TLS 1.3 resumption over a full handshake\n")
    for name, mode in (("1-RTT", HandshakeMode.TLS13_RESUMED_1RTT), ("0-RTT", HandshakeMode.TLS13_RESUMED_0RTT)):
        for lat, d in cost.delta_per_row(table, mode).items():
            w(f"  {name} @ {lat:g} ms: {d:.2f} ms\n")
    w(f"Delta_1RTT = [{one.low_ms:.2f}, {one.high_ms:.2f}] ms\n")
    w(f"Delta_0RTT = [{zero.low_ms:.2f}, {zero.high_ms:.2f}] ms + RTT\n")
    for lat in table.latencies:
        w(f"overlap gap @ {lat:g} ms: {cost.overlap_gap(table, lat):.2f} ms\n")
    c1 = cost.delta_connect(hops, one)
    c0 = cost.delta_connect(hops, zero, rtt_ms)
    w(f"Delta_connect (1-RTT, {hops:g} resumed hops) = [{c1[0]:.2f}, {c1[1]:.2f}] ms\n")
    w(f"Delta_connect (0-RTT, {hops:g} resumed hops, RTT {rtt_ms:g} ms) = [{c0[0]:.2f}, {c0[1]:.2f}] ms\n")
    return {"delta_1rtt": (one.low_ms, one.high_ms), "delta_0rtt": (zero.low_ms, zero.high_ms),
            "delta_connect_1rtt": c1, "delta_connect_0rtt": c0}


def cmd_protocol_demo(config_path: str | Path, script_path: str | Path, seed: int = 0,
                      support_extension: bool = True, strict: bool = True,
                      out: TextIO | None = None) -> list[str]:
    out = out or sys.stdout
    rng = random.Random(seed)
    servers = build_server_set(load_config(config_path), rng)
    try:
        steps = parse_script(Path(script_path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read script {script_path}: {exc}") from exc
    lines = [t.log_line() for t in run_script(servers, steps, rng, support_extension, strict)]
    for line in lines:
        out.write(line + "\n")
    return lines


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", type=Path, help="directory of domain-tree JSON files")
    common.add_argument("--relations", action="append", type=_parse_relation_arg, default=[],
                        metavar="SRC=FILE", help="relation source (cert|resumption); repeatable")
    common.add_argument("--policy", choices=[p.value for p in ResumptionPolicy],
                        help="simulate one policy instead of all three")
    common.add_argument("--rule", choices=[r.value for r in PathUnlockRule], default="path")
    common.add_argument("--cost-table", type=Path)
    common.add_argument("--cutoff", type=int, default=25)
    common.add_argument("--rtt", type=float, default=60.0, help="RTT in ms for 0-RTT savings")
    common.add_argument("--out", type=Path)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="sniresume", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="trust-group statistics")
    sub.add_parser("simulate", parents=[common], help="page-load simulation report")
    rp = sub.add_parser("report", parents=[common], help="print a report as a table")
    rp.add_argument("report_path", nargs="?", type=Path)
    dp = sub.add_parser("delta", parents=[common], help="latency savings from the cost table")
    dp.add_argument("--hops", type=float, default=1.58, help="resumed hops on the deepest chain")
    pp = sub.add_parser("protocol-demo", parents=[common], help="run a scripted client")
    pp.add_argument("--config", type=Path, required=True)
    pp.add_argument("--script", type=Path, required=True)
    pp.add_argument("--no-extension", action="store_true")
    pp.add_argument("--lenient", action="store_true")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        corpus_dir=args.corpus,
        relation_files=list(args.relations),
        policies=[ResumptionPolicy(args.policy)] if args.policy else list(ResumptionPolicy),
        unlock_rule=PathUnlockRule(args.rule),
        cost_table=args.cost_table,
        histogram_cutoff=args.cutoff,
        output=args.out,
        rtt_ms=args.rtt,
        seed=args.seed,
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            doc = cmd_analyze(_run_config(args))
            if not args.out:
                print(json.dumps(doc, indent=2, sort_keys=True))
        elif args.command == "simulate":
            doc = cmd_simulate(_run_config(args))
            if not args.out:
                print(json.dumps(doc, indent=2, sort_keys=True))
        elif args.command == "report":
            path = args.report_path or args.out
            if path is None:
                raise ReportError("report needs a report path")
            cmd_report(path)
        elif args.command == "delta":
            table = cost.read_cost_table(args.cost_table) if args.cost_table else cost.load_default_table()
            cmd_delta(table, args.hops, args.rtt)
        elif args.command == "protocol-demo":
            cmd_protocol_demo(args.config, args.script, args.seed,
                              support_extension=not args.no_extension, strict=not args.lenient)
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DomainError, TrustError, CostModelError, SimulationError, ConfigurationError,
            CodecError, HandshakeError, ReportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
