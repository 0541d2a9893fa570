"""Command line entry point: ``lamsum summarize | evaluate | ablate``.

Every flag can also be given in an INI-style config file (``--config``)
under a ``[lamsum]`` section, using the flag name with underscores;
command-line flags win over the file.

Exit codes: 0 success, 1 configuration error, 2 backend error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import itertools
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import replace
from pathlib import Path

from .backends import BackendError, make_backend
from .calibration import CalibrationConfig, load_stopwords
from .config import MODES, ConfigError, PipelineConfig
from .corpus import CorpusError, load_corpus, load_references, unit_record
from .evaluation import evaluate
from .pipeline import ConvergenceError, PipelineError, summarize
from .prompts import ContextOverflowError
from .voting import VOTING_RULES

logger = logging.getLogger("lamsum")

EXIT_OK, EXIT_CONFIG, EXIT_BACKEND, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with a [lamsum] section mirroring these flags")
    p.add_argument("--input", help="corpus file (.jsonl or .csv)")
    p.add_argument("--format", choices=("jsonl", "csv"), help="corpus format (default: by extension)")
    p.add_argument("--references", help="reference summaries (.jsonl), optional")
    p.add_argument("--k", type=int, default=50, help="final summary size")
    p.add_argument("--s", type=int, default=100, help="chunk size in units")
    p.add_argument("--q", type=int, default=None, help="per-chunk summary size (default: k)")
    p.add_argument("--m", type=int, default=3, help="number of shuffles per chunk")
    p.add_argument("--mode", choices=MODES, default="lamsum")
    p.add_argument("--voting", choices=VOTING_RULES, default="pav_sequential")
    p.add_argument("--backend", default="mock:first-q", help="mock:<strategy> or http:<model>")
    p.add_argument("--endpoint", help="base URL of an OpenAI-compatible API for http backends")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=float, default=0.5, help="normalized edit-distance threshold")
    p.add_argument("--stopwords", help="stopword file, one word per line")
    p.add_argument("--context-budget", type=int, default=8192, dest="context_budget")
    p.add_argument("--max-workers", type=int, default=1, dest="max_workers")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lamsum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("summarize", help="produce an extractive summary")
    _add_pipeline_flags(p)

    p = sub.add_parser("evaluate", help="score a summary against references")
    p.add_argument("--config")
    p.add_argument("--summary", help="summary.jsonl written by summarize")
    p.add_argument("--references", help="reference summaries (.jsonl)")
    p.add_argument("--input", help="corpus file")
    p.add_argument("--format", choices=("jsonl", "csv"))
    p.add_argument("--out", help="output directory (default: next to the summary)")
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("ablate", help="sweep m, s, q (and voting rules) over one corpus")
    _add_pipeline_flags(p)
    p.add_argument("--m-values", dest="m_values", help="comma list, e.g. 3,5,7")
    p.add_argument("--s-values", dest="s_values", help="comma list, e.g. 100,120")
    p.add_argument("--q-values", dest="q_values", help="comma list, e.g. 50,60,70,80,90")
    p.add_argument("--voting-values", dest="voting_values", help="comma list of voting rules")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cp = configparser.ConfigParser()
    try:
        with open(args.config, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    if not cp.has_section("lamsum"):
        raise UsageError(f"{args.config}: missing [lamsum] section")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in cp.items("lamsum"):
        dest = key.replace("-", "_")
        if dest not in actions or dest == "config":
            raise UsageError(f"{args.config}: unknown key {key!r}")
        action = actions[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cp.getboolean("lamsum", key)
            continue
        value = action.type(raw) if action.type else raw
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{args.config}: {key} must be one of {list(action.choices)}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _pipeline_config(args) -> PipelineConfig:
    stop = load_stopwords(args.stopwords) if args.stopwords else None
    cal = CalibrationConfig(epsilon=args.epsilon, **({"stopwords": stop} if stop is not None else {}))
    return PipelineConfig(
        k=args.k,
        s=args.s,
        q=args.q,
        m=args.m,
        mode=args.mode,
        voting_rule=args.voting,
        seed=args.seed,
        backend=args.backend,
        calibration=cal,
        context_budget_tokens=args.context_budget,
        max_workers=args.max_workers,
    )


def _file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def cmd_summarize(args) -> int:
    if not args.input:
        raise UsageError("--input is required")
    config = _pipeline_config(args)
    backend = make_backend(config.backend, endpoint=args.endpoint, seed=config.seed)
    corpus = load_corpus(args.input, args.format)
    refs = load_references(args.references, corpus) if args.references else None
    if corpus.N < config.k:
        raise ConfigError(f"k: corpus has only {corpus.N} units (k={config.k})")

    started = time.time()
    selection = summarize(corpus, config, backend)
    out = Path(args.out)
    write_atomic(
        out / "summary.jsonl",
        "".join(json.dumps(unit_record(corpus[i]), ensure_ascii=False) + "\n" for i in selection.unit_ids),
    )
    manifest = selection.manifest(include_timing=False)
    manifest["mode"] = config.mode
    manifest["input"] = {"path": str(args.input), "sha256": _file_sha256(args.input), "n_units": corpus.N}
    manifest["timing"] = {"started_at": started, "wall_clock_seconds": selection.counters["wall_clock_seconds"]}
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, ensure_ascii=False, default=str) + "\n")
    if refs:
        report = evaluate(selection, corpus, refs)
        write_atomic(out / "eval.json", json.dumps(report.to_dict(), indent=2) + "\n")
        print(report.to_table())
    print(f"{len(selection.unit_ids)} units in {selection.n_levels} levels -> {out / 'summary.jsonl'}")
    return EXIT_OK


def _read_summary_ids(path) -> list[int]:
    ids = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                ids.append(int(json.loads(line)["id"]))
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: summary rows need an integer 'id'") from exc
    return ids


def cmd_evaluate(args) -> int:
    for flag in ("summary", "references", "input"):
        if not getattr(args, flag):
            raise UsageError(f"--{flag} is required")
    corpus = load_corpus(args.input, args.format)
    refs = load_references(args.references, corpus)
    ids = _read_summary_ids(args.summary)
    for i in ids:
        if not 0 <= i < corpus.N:
            raise CorpusError(f"{args.summary}: unit id {i} not in corpus")
    report = evaluate(ids, corpus, refs)
    out = Path(args.out) if args.out else Path(args.summary).parent
    write_atomic(out / "eval.json", json.dumps(report.to_dict(), indent=2) + "\n")
    print(report.to_table())
    return EXIT_OK


ABLATION_FIELDS = [
    "m", "s", "q", "voting_rule", "mode", "levels", "level_sizes", "api_calls",
    "rouge1_f", "rouge2_f", "rougeLsum_f", "entropy_bits",
]


def cmd_ablate(args) -> int:
    if not args.input:
        raise UsageError("--input is required")
    base = _pipeline_config(args)
    axes = {
        "m": _int_list(args.m_values) if args.m_values is not None else [base.m],
        "s": _int_list(args.s_values) if args.s_values is not None else [base.s],
        "q": _int_list(args.q_values) if args.q_values is not None else [base.q],
        "voting_rule": (
            [v.strip() for v in args.voting_values.split(",") if v.strip()]
            if args.voting_values is not None
            else [base.voting_rule]
        ),
    }
    empty = [name for name, values in axes.items() if not values]
    if empty:
        raise ConfigError(f"empty ablation grid along {', '.join(empty)}")
    cells = [
        replace(base, m=m, s=s, q=q, voting_rule=v)
        for m, s, q, v in itertools.product(axes["m"], axes["s"], axes["q"], axes["voting_rule"])
    ]
    corpus = load_corpus(args.input, args.format)
    refs = load_references(args.references, corpus) if args.references else None

    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ABLATION_FIELDS, lineterminator="\n")
    writer.writeheader()
    for cell in cells:
        backend = make_backend(cell.backend, endpoint=args.endpoint, seed=cell.seed)
        selection = summarize(corpus, cell, backend)
        row = {
            "m": cell.m, "s": cell.s, "q": cell.q, "voting_rule": cell.voting_rule, "mode": cell.mode,
            "levels": selection.n_levels,
            "level_sizes": " ".join(str(len(lv.input_ids)) for lv in selection.levels),
            "api_calls": selection.counters["api_calls"],
        }
        report = evaluate(selection, corpus, refs)
        row["entropy_bits"] = f"{report.entropy_bits:.6f}"
        if report.rouge is not None:
            row.update({key: f"{getattr(report.rouge, key):.6f}" for key in ("rouge1_f", "rouge2_f", "rougeLsum_f")})
        writer.writerow(row)
        logger.info("m=%d s=%d q=%d %s: %d levels", cell.m, cell.s, cell.q, cell.voting_rule, selection.n_levels)
    out = Path(args.out)
    write_atomic(out / "ablation.csv", buf.getvalue())
    print(buf.getvalue(), end="")
    return EXIT_OK


COMMANDS = {"summarize": cmd_summarize, "evaluate": cmd_evaluate, "ablate": cmd_ablate}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"lamsum: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContextOverflowError as exc:
        print(f"lamsum: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # backend spec / voting / config values rejected before any call
        if isinstance(exc, CorpusError):
            print(f"lamsum: I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"lamsum: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BackendError, PipelineError, ConvergenceError) as exc:
        print(f"lamsum: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"lamsum: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
