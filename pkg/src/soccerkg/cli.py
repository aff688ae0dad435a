"""Command-line front end.

Exit codes: 0 ok, 1 I/O, 2 validation, 64 usage, 70 backend/transport.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .builder import CAPTIONS, LABELS, build_all, read_build, write_build
from .cypher import LexError, ParseError, SemanticError
from .cypher.printer import literal_text, quote_name
from .evaluation import (
    BankFormatError,
    BaselineFormatError,
    default_subset,
    load_bank,
    load_baseline,
    render_density_text,
    report_density,
    run_accuracy,
    run_timing,
)
from .graph import render_stats_text
from .ingest import SchemaError, load_dataset, validate_dataset
from .nl import AskConfig, Engine
from .nl.llm import BudgetError, ExtractionError, LLMConfig, TransportError
from .snapshot import FormatError, VersionError

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_USAGE, EXIT_BACKEND = 0, 1, 2, 64, 70

log = logging.getLogger("soccerkg")


class CliError(Exception):
    def __init__(self, code: int, message: str, kind: str = "error", details=None):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.details = details


# -- configuration -----------------------------------------------------------


@dataclass
class Config:
    data_dir: str | None = None
    snapshot_dir: str = "snapshots"
    backend: str = "rule"
    output_format: str = "text"
    llm: dict = field(default_factory=dict)  # base_url, model, temperature, retry_cap

    LLM_KEYS = ("base_url", "model", "temperature", "retry_cap")

    def llm_config(self) -> LLMConfig | None:
        if self.backend != "llm":
            return None
        missing = [k for k in ("base_url", "model") if not self.llm.get(k)]
        if missing:
            raise CliError(EXIT_USAGE, f"the llm backend needs llm.{' and llm.'.join(missing)}", "usage")
        try:
            return LLMConfig(
                base_url=self.llm["base_url"],
                model=self.llm["model"],
                temperature=float(self.llm.get("temperature", 0.0)),
                retry_cap=int(self.llm.get("retry_cap", 1)),
            )
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"bad llm setting: {exc}", "usage") from None


CONFIG_KEYS = {"data_dir", "snapshot_dir", "backend", "output_format"} | {f"llm.{k}" for k in Config.LLM_KEYS}


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read config file: {exc}", "io") from None
    values = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise CliError(EXIT_USAGE, f"{path}:{n}: expected 'key = value'", "usage")
        if key not in CONFIG_KEYS:
            raise CliError(EXIT_USAGE, f"{path}:{n}: unknown key {key!r}", "usage")
        values[key] = value
    return values


def resolve_config(args: argparse.Namespace) -> Config:
    """Defaults, then the config file, then command-line flags."""
    cfg = Config()
    settings = read_config_file(args.config) if getattr(args, "config", None) else {}
    for flag, key in (
        ("snapshot_dir", "snapshot_dir"),
        ("backend", "backend"),
        ("format", "output_format"),
        ("llm_base_url", "llm.base_url"),
        ("llm_model", "llm.model"),
        ("llm_temperature", "llm.temperature"),
        ("llm_retry_cap", "llm.retry_cap"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            settings[key] = str(value)
    for key, value in settings.items():
        if key.startswith("llm."):
            cfg.llm[key[4:]] = value
        else:
            setattr(cfg, key, value)
    if cfg.backend not in ("rule", "llm"):
        raise CliError(EXIT_USAGE, f"unknown backend {cfg.backend!r}", "usage")
    if cfg.output_format not in ("text", "json"):
        raise CliError(EXIT_USAGE, f"unknown output format {cfg.output_format!r}", "usage")
    return cfg


# -- helpers -----------------------------------------------------------------


def emit(cfg: Config, text: str, obj) -> None:
    if cfg.output_format == "json":
        print(json.dumps(obj, ensure_ascii=False, indent=1))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def load_snapshots(cfg: Config):
    try:
        return read_build(cfg.snapshot_dir)
    except FileNotFoundError as exc:
        raise CliError(EXIT_IO, f"snapshot missing ({exc.filename}); run 'soccerkg build' first", "io") from None
    except (FormatError, VersionError) as exc:
        raise CliError(EXIT_IO, f"unreadable snapshot: {exc}", "io") from None
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc), "io") from None


def make_engine(cfg: Config, graphs=None, kg: str = "auto") -> Engine:
    graphs = graphs or load_snapshots(cfg)
    return Engine(graphs, AskConfig(backend=cfg.backend, kg=kg, llm=cfg.llm_config()))


_BACKEND_ERRORS = {e.__name__ for e in (TransportError, BudgetError, ExtractionError)}


def outcome_exit_code(outcome) -> int:
    if outcome.error is None:
        return EXIT_OK
    if outcome.error["type"] in _BACKEND_ERRORS or (outcome.backend == "llm" and outcome.error["phase"] == "translate"):
        return EXIT_BACKEND
    return EXIT_VALIDATION


def pick_bank(args):
    try:
        bank = load_bank(args.bank)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read question bank: {exc}", "io") from None
    except BankFormatError as exc:
        raise CliError(EXIT_VALIDATION, str(exc), "validation") from None
    return bank if args.all else default_subset(bank)


# -- verbs -------------------------------------------------------------------


def cmd_build(args, cfg: Config) -> int:
    data_dir = args.data_dir or cfg.data_dir
    if not data_dir:
        raise CliError(EXIT_USAGE, "build needs a data directory", "usage")
    if not Path(data_dir).is_dir():
        raise CliError(EXIT_IO, f"data directory {data_dir!r} does not exist", "io")
    try:
        ds = load_dataset(data_dir)
    except (SchemaError, ValueError) as exc:
        raise CliError(EXIT_VALIDATION, str(exc), "validation") from None
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc), "io") from None
    if not ds.games:
        raise CliError(EXIT_VALIDATION, "no games found", "validation")
    report = validate_dataset(ds.games, ds.events, ds.players)
    if not report.ok:
        raise CliError(EXIT_VALIDATION, report.render_text().rstrip("\n"), "validation", report.to_dict())
    out = build_all(ds)
    try:
        paths = write_build(out, cfg.snapshot_dir)
    except OSError as exc:
        raise CliError(EXIT_IO, str(exc), "io") from None
    text = f"built {len(ds.games)} games into {cfg.snapshot_dir}\n" + render_stats_text(out.build_stats)
    emit(cfg, text, {"games": len(ds.games), "files": [str(p) for p in paths], "stats": out.build_stats})
    return EXIT_OK


def cmd_stats(args, cfg: Config) -> int:
    graphs = load_snapshots(cfg)
    dens = report_density(graphs)
    emit(cfg, render_stats_text(graphs.build_stats) + render_density_text(dens), {"graphs": graphs.build_stats, "density": dens})
    return EXIT_OK


def cmd_query(args, cfg: Config) -> int:
    engine = make_engine(cfg)
    try:
        table, kg = engine.run(args.query, args.kg)
    except (LexError, ParseError, SemanticError) as exc:
        raise CliError(EXIT_VALIDATION, str(exc), type(exc).__name__) from None
    emit(cfg, table.render_text(), {"kg": kg, **table.to_dict()})
    return EXIT_OK


def cmd_ask(args, cfg: Config) -> int:
    engine = make_engine(cfg, kg=args.kg)
    out = engine.ask(args.question)
    log.debug("query: %s", out.query_text)
    log.debug("timings: %s", out.timings)
    emit(cfg, out.render_text(), out.to_dict())
    return outcome_exit_code(out)


REPL_HELP = "commands: :quit | :backend rule|llm | :trace on|off"


def cmd_repl(args, cfg: Config) -> int:
    engine = make_engine(cfg, kg=args.kg)
    backend = cfg.backend
    stream = sys.stdin
    interactive = stream.isatty()
    while True:
        if interactive:
            sys.stdout.write("soccerkg> ")
            sys.stdout.flush()
        line = stream.readline()
        if not line:
            return EXIT_OK
        line = line.strip()
        if not line:
            continue
        if line.startswith(":"):
            parts = line.split()
            if parts == [":quit"] or parts == [":q"]:
                return EXIT_OK
            if len(parts) == 2 and parts[0] == ":backend" and parts[1] in ("rule", "llm"):
                if parts[1] == "llm" and engine.llm is None:
                    print("no LLM endpoint is configured")
                else:
                    backend = parts[1]
                    print(f"backend: {backend}")
                continue
            if len(parts) == 2 and parts[0] == ":trace" and parts[1] in ("on", "off"):
                setup_logging(parts[1] == "on")
                print(f"trace: {parts[1]}")
                continue
            print(REPL_HELP)
            continue
        out = engine.ask(line, backend=backend)
        if cfg.output_format == "json":
            print(json.dumps(out.to_dict(), ensure_ascii=False))
        else:
            print(out.render_text())
        sys.stdout.flush()


def cmd_bench(args, cfg: Config) -> int:
    bank = pick_bank(args)
    baseline = None
    if args.baseline:
        try:
            baseline = load_baseline(None if args.baseline == "bundled" else args.baseline)
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot read baseline: {exc}", "io") from None
        except BaselineFormatError as exc:
            raise CliError(EXIT_VALIDATION, str(exc), "BaselineFormatError") from None
    if args.reps < 3:
        raise CliError(EXIT_USAGE, "--reps must be at least 3", "usage")
    engine = make_engine(cfg)
    report = run_timing(bank, args.reps, engine.ask, baseline, notes={"backend": cfg.backend})
    emit(cfg, report.render_text(), report.to_dict())
    return EXIT_OK


def cmd_accuracy(args, cfg: Config) -> int:
    bank = pick_bank(args)
    if args.iterations < 1:
        raise CliError(EXIT_USAGE, "--iterations must be at least 1", "usage")
    engine = make_engine(cfg)
    report = run_accuracy(bank, args.iterations, lambda q: engine.ask(q).answer, engine.graphs.entity_dict, cfg.backend)
    emit(cfg, report.render_text(), report.to_dict())
    return EXIT_OK


def cypher_lines(graph, prefix: str) -> list[str]:
    """One CREATE statement per node and per edge; nodes carry a ``_uid`` to join on."""

    def props(items: dict, extra: dict) -> str:
        merged = {**extra, **items}
        return "{" + ", ".join(f"{quote_name(k)}: {literal_text(v)}" for k, v in merged.items()) + "}"

    lines = []
    for n in graph.nodes:
        uid = {"_uid": f"{prefix}:{n.id}"}
        lines.append(f"CREATE (:{quote_name(n.label)} {props(n.props, uid)});")
    for e in graph.edges:
        a, b = f"{prefix}:{e.src}", f"{prefix}:{e.dst}"
        rel = f"[:{quote_name(e.etype)}{' ' + props(e.props, {}) if e.props else ''}]"
        lines.append(
            f"MATCH (a {{_uid: {literal_text(a)}}}), (b {{_uid: {literal_text(b)}}}) CREATE (a)-{rel}->(b);"
        )
    return lines


def cmd_export_cypher(args, cfg: Config) -> int:
    graphs = load_snapshots(cfg)
    lines = cypher_lines(graphs.labels_kg, LABELS) + cypher_lines(graphs.captions_kg, CAPTIONS)
    text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(text, "utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, str(exc), "io") from None
        emit(cfg, f"wrote {len(lines)} statements to {args.out}\n", {"statements": len(lines), "path": args.out})
    elif cfg.output_format == "json":
        emit(cfg, "", {"statements": len(lines), "lines": lines})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ------------------------------------------------------------------


class UsageParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; usage problems here exit 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--config", help="key = value settings file (flags override it)")
    g.add_argument("--snapshot-dir", help="directory holding the built snapshots (default: snapshots)")
    g.add_argument("--format", choices=("text", "json"), help="output format (default: text)")
    g.add_argument("--trace", action="store_true", help="log prompts, queries and timings to stderr")

    backend = argparse.ArgumentParser(add_help=False)
    b = backend.add_argument_group("translation backend")
    b.add_argument("--backend", choices=("rule", "llm"), help="question translator (default: rule)")
    b.add_argument("--llm-base-url", help="chat-completions endpoint base URL")
    b.add_argument("--llm-model", help="model name sent to the endpoint")
    b.add_argument("--llm-temperature", type=float)
    b.add_argument("--llm-retry-cap", type=int)

    kg = argparse.ArgumentParser(add_help=False)
    kg.add_argument("--kg", choices=("auto", LABELS, CAPTIONS), default="auto", help="graph to query (default: auto)")

    bank = argparse.ArgumentParser(add_help=False)
    bank.add_argument("--bank", help="question bank (JSON lines); defaults to the bundled fixture bank")
    bank.add_argument("--all", action="store_true", help="use every bank entry, not just the default subset")

    p = UsageParser(prog="soccerkg", description="Soccer knowledge graphs with question answering.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=UsageParser)

    s = sub.add_parser("build", parents=[common], help="build both graphs from a dataset directory")
    s.add_argument("data_dir", nargs="?", help="league/season/game tree")
    s.set_defaults(fn=cmd_build)

    s = sub.add_parser("stats", parents=[common], help="node, edge and density statistics")
    s.set_defaults(fn=cmd_stats)

    s = sub.add_parser("query", parents=[common, kg], help="run a query against a graph")
    s.add_argument("query")
    s.set_defaults(fn=cmd_query)

    s = sub.add_parser("ask", parents=[common, backend, kg], help="answer a natural-language question")
    s.add_argument("question")
    s.set_defaults(fn=cmd_ask)

    s = sub.add_parser("repl", parents=[common, backend, kg], help="interactive question loop")
    s.set_defaults(fn=cmd_repl)

    s = sub.add_parser("bench", parents=[common, backend, bank], help="time the question bank")
    s.add_argument("--reps", type=int, default=5, help="timed repetitions per question, at least 3 (default: 5)")
    s.add_argument(
        "--baseline",
        nargs="?",
        const="bundled",
        help="baseline timings file; without a value the bundled literature values are used",
    )
    s.set_defaults(fn=cmd_bench)

    s = sub.add_parser("accuracy", parents=[common, backend, bank], help="repeated-question accuracy")
    s.add_argument("--iterations", type=int, default=5, help="times each question is asked (default: 5)")
    s.set_defaults(fn=cmd_accuracy)

    s = sub.add_parser("export-cypher", parents=[common], help="write both graphs as Cypher CREATE statements")
    s.add_argument("--out", help="output file (default: stdout)")
    s.set_defaults(fn=cmd_export_cypher)
    return p


def setup_logging(on: bool) -> None:
    root = logging.getLogger("soccerkg")
    if on and not root.handlers:
        h = logging.StreamHandler(sys.stderr)
        h.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s %(message)s"))
        root.addHandler(h)
    root.setLevel(logging.DEBUG if on else logging.WARNING)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or "text"
    try:
        cfg = resolve_config(args)
        fmt = cfg.output_format
        setup_logging(args.trace)
        return args.fn(args, cfg)
    except CliError as exc:
        if fmt == "json":
            err = {"error": {"code": exc.code, "kind": exc.kind, "message": str(exc)}}
            if exc.details is not None:
                err["error"]["details"] = exc.details
            print(json.dumps(err, ensure_ascii=False))
        else:
            print(f"soccerkg: {exc}", file=sys.stderr)
        return exc.code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
