"""
Command-line pipeline: score, predict, compare, report.

Exit codes: 0 ok, 2 configuration error, 3 data error, 4 provider error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import report
from .dsl import ProgramError
from .fixtures import FIXTURES, TASK_FIXTURES, builtin_task_path
from .grid import AccuracyPolicy, Connectivity, GridError
from .provider import (FileSource, ProviderError, RemoteSource, ResponseCache, ScriptedSource,
                       pool_hash, resolve_pool)
from .scoring import DEFAULT_EPSILON, DEFAULT_FLOOR, ScoringError
from .tasks import EvalConfig, EvaluationResult, TaskError, evaluate_all, load_task

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger("occamix")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_PROVIDER = 4


class ConfigError(Exception):
    pass


def source_label(source) -> str:
    if isinstance(source, FileSource):
        return f"pool:{source.path}"
    if isinstance(source, ScriptedSource):
        return f"fixture:{source.fixture_id}"
    return f"remote:{source.endpoint_url} model={source.model_name} n={source.n}"


@dataclass
class RunConfig:
    command: str
    tasks: list[str]
    sources: list
    evaluation: EvalConfig
    out: Path
    seed: int = 0
    cache_dir: Path | None = None
    profile: str = "general"

    def source_label(self) -> str:
        return ", ".join(source_label(s) for s in self.sources)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "tasks": list(self.tasks),
            "source": self.source_label(),
            "evaluation": self.evaluation.to_json(),
            "profile": self.profile,
            "out": str(self.out),
            "seed": self.seed,
        }


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML file of defaults; flags override it")
    p.add_argument("--task", action="append", dest="tasks", metavar="PATH",
                   help="task JSON file, or builtin:<name> (repeatable)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--pool", action="append", dest="pools", metavar="PATH",
                     help="hypothesis pool JSON (once for all tasks, or once per task)")
    src.add_argument("--fixture", action="append", dest="fixtures", metavar="ID",
                     help="built-in pool id, or 'auto' for each built-in task's own pool")
    src.add_argument("--remote", metavar="URL", help="chat-completion endpoint")
    p.add_argument("--model", help="model name for --remote")
    p.add_argument("--n", type=int, help="hypotheses to request from --remote (default 6)")
    p.add_argument("--cache-dir", help="response cache directory (default <out>/cache)")
    p.add_argument("--policy", choices=["all", "nonbg"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, help="simplicity floor")
    p.add_argument("--connectivity", type=int, choices=[4, 8])
    p.add_argument("--split", choices=["paper", "full"])
    p.add_argument("--profile", choices=["general", "mini"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="occamix", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("score", "rank a hypothesis pool on each task's training pairs"),
                        ("predict", "predict held-out outputs and write matrices and heatmaps"),
                        ("compare", "evaluate a batch of tasks and summarise both methods")):
        _common(sub.add_parser(name, help=help_))
    rp = sub.add_parser("report", help="re-render markdown from JSON artifacts in --out")
    rp.add_argument("--out", required=True)
    return parser


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as f:
            return tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def _as_list(v) -> list | None:
    if v is None:
        return None
    return list(v) if isinstance(v, (list, tuple)) else [v]


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg = _load_toml(args.config) if args.config else {}
    known = {"tasks", "pool", "fixture", "remote", "model", "n", "cache_dir", "policy", "epsilon",
             "delta", "connectivity", "split", "profile", "seed", "out"}
    unknown = set(file_cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def pick(flag, key, default=None):
        return flag if flag is not None else file_cfg.get(key, default)

    tasks = args.tasks or _as_list(file_cfg.get("tasks")) or []
    if not tasks:
        raise ConfigError("no tasks given (use --task)")

    pools = args.pools
    fixtures = args.fixtures
    remote = args.remote
    if pools is None and fixtures is None and remote is None:
        pools = _as_list(file_cfg.get("pool"))
        fixtures = _as_list(file_cfg.get("fixture"))
        remote = file_cfg.get("remote")
    given = [x for x in (pools, fixtures, remote) if x]
    if len(given) != 1:
        raise ConfigError("give exactly one of --pool, --fixture, --remote")

    if remote:
        model = pick(args.model, "model")
        if not model:
            raise ConfigError("--remote needs --model")
        n = pick(args.n, "n", 6)
        if n < 1:
            raise ConfigError("--n must be at least 1")
        sources = [RemoteSource(remote, model, n)] * len(tasks)
    else:
        items = pools or fixtures
        if len(items) == 1:
            items = items * len(tasks)
        if len(items) != len(tasks):
            raise ConfigError(f"{len(items)} pools for {len(tasks)} tasks; give one or one per task")
        if pools:
            sources = [FileSource(p) for p in items]
        else:
            sources = []
            for t, f in zip(tasks, items):
                if f == "auto":
                    name = t.split(":", 1)[1] if t.startswith("builtin:") else None
                    if name not in TASK_FIXTURES:
                        raise ConfigError(f"--fixture auto needs a builtin task, got {t!r}")
                    f = TASK_FIXTURES[name]
                if f not in FIXTURES:
                    raise ConfigError(f"unknown fixture {f!r}; known: {', '.join(sorted(FIXTURES))}")
                sources.append(ScriptedSource(f))

    policy = pick(args.policy, "policy", "all")
    try:
        evaluation = EvalConfig(
            policy=AccuracyPolicy(policy),
            epsilon=float(pick(args.epsilon, "epsilon", DEFAULT_EPSILON)),
            floor=float(pick(args.delta, "delta", DEFAULT_FLOOR)),
            connectivity=Connectivity(int(pick(args.connectivity, "connectivity", 4))),
            split=pick(args.split, "split", "paper"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not 0.0 < evaluation.epsilon < 1.0:
        raise ConfigError("epsilon must lie in (0, 1)")
    if not 0.0 <= evaluation.floor <= 1.0:
        raise ConfigError("delta must lie in [0, 1]")
    if evaluation.split not in ("paper", "full"):
        raise ConfigError(f"unknown split {evaluation.split!r}")
    profile = pick(args.profile, "profile", "general")
    if profile not in ("general", "mini"):
        raise ConfigError(f"unknown profile {profile!r}")

    out = Path(pick(args.out, "out", "occamix-out"))
    cache_dir = pick(args.cache_dir, "cache_dir")
    return RunConfig(args.command, list(tasks), sources, evaluation, out,
                     int(pick(args.seed, "seed", 0)),
                     Path(cache_dir) if cache_dir else None, profile)


def _task_path(spec: str) -> Path:
    if spec.startswith("builtin:"):
        return builtin_task_path(spec.split(":", 1)[1])
    return Path(spec)


class EventLog:
    """Line-delimited JSON events appended to ``run.log.jsonl``."""

    def __init__(self, path: Path):
        self.path = path

    def emit(self, **event) -> None:
        with self.path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")


@dataclass
class TaskOutcome:
    task: str
    source: str
    results: list[EvaluationResult] = field(default_factory=list)
    pool_hash: str = ""
    error: str | None = None
    exit_code: int = EXIT_OK


def run_task(cfg: RunConfig, spec: str, source, log: EventLog) -> TaskOutcome:
    outcome = TaskOutcome(spec, source=source_label(source))
    t0 = time.perf_counter()
    try:
        bundle = load_task(_task_path(spec), cfg.profile)
        if isinstance(source, RemoteSource):
            cache = ResponseCache(cfg.cache_dir or cfg.out / "cache")
            pool = resolve_pool(source, bundle, cache, connectivity=cfg.evaluation.connectivity)
        else:
            pool = resolve_pool(source)
        outcome.pool_hash = pool_hash(pool)
        log.emit(event="stage", stage="hypotheses", task=bundle.task_id, n=len(pool),
                 duration_ms=round((time.perf_counter() - t0) * 1000, 3))
        t1 = time.perf_counter()
        outcome.results = evaluate_all(bundle, pool, cfg.evaluation)
        warnings = sorted({w for r in outcome.results for w in r.scores.warnings})
        log.emit(event="stage", stage="evaluate", task=bundle.task_id, warnings=warnings,
                 duration_ms=round((time.perf_counter() - t1) * 1000, 3))
    except (TaskError, GridError, ScoringError, ProgramError) as exc:
        outcome.error, outcome.exit_code = f"{type(exc).__name__}: {exc}", EXIT_DATA
    except ProviderError as exc:
        outcome.error, outcome.exit_code = f"{type(exc).__name__}: {exc}", EXIT_PROVIDER
    if outcome.error:
        log.emit(event="error", task=spec, error=outcome.error, exit_code=outcome.exit_code)
    return outcome


def _stem(result: EvaluationResult, cfg: RunConfig) -> str:
    if cfg.evaluation.split == "full":
        return f"{result.task_id}.fold{result.held_out_index}"
    return result.task_id


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def execute(cfg: RunConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    log = EventLog(cfg.out / "run.log.jsonl")
    log.emit(event="start", command=cfg.command, config=cfg.to_json())
    run_cfg = cfg.to_json()
    outcomes = [run_task(cfg, spec, src, log) for spec, src in zip(cfg.tasks, cfg.sources)]

    task_docs = []
    for o in outcomes:
        if o.error:
            print(f"FAIL {o.task}: {o.error}", flush=True)
            continue
        for r in o.results:
            stem = _stem(r, cfg)
            if cfg.command == "score":
                doc = report.scores_json(r, run_cfg, o.source, o.pool_hash)
                _write(cfg.out / f"{stem}.scores.json", report.dumps(doc))
                _write(cfg.out / f"{stem}.scores.md", report.scores_md(doc))
                print(f"ok {stem}: {len(doc['hypotheses'])} hypotheses ranked", flush=True)
                continue
            doc = report.result_json(r, run_cfg, o.source, o.pool_hash)
            task_docs.append(doc)
            _write(cfg.out / f"{stem}.prediction.json", report.dumps(doc))
            _write(cfg.out / f"{stem}.prediction.md", report.result_md(doc))
            for name, m in doc["methods"].items():
                acc = m["top1_accuracy"]
                title = f"{stem} {name} top-1 {'n/a' if acc is None else f'{acc:.2f}'}"
                _write(cfg.out / f"{stem}.{name}.svg", report.heatmap_svg(m, title))
            accs = " ".join(f"{k}={report._fmt(v['top1_accuracy'])}" for k, v in doc["methods"].items())
            print(f"ok {stem}: {accs}", flush=True)

    failures = [{"task": o.task, "error": o.error, "exit_code": o.exit_code} for o in outcomes if o.error]
    if cfg.command == "compare":
        doc = report.comparison_json(task_docs, failures, run_cfg)
        _write(cfg.out / "compare.json", report.dumps(doc))
        _write(cfg.out / "compare.md", report.comparison_md(doc))
    log.emit(event="end", command=cfg.command, failures=len(failures))
    return max((f["exit_code"] for f in failures), default=EXIT_OK)


def rerender(out: Path) -> int:
    """Regenerate markdown from the JSON artifacts already in ``out``."""
    if not out.is_dir():
        print(f"no such directory: {out}", file=sys.stderr)
        return EXIT_CONFIG
    count = 0
    for path in sorted(out.glob("*.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        if path.name == "compare.json":
            _write(out / "compare.md", report.comparison_md(doc))
        elif path.name.endswith(".prediction.json"):
            _write(path.with_suffix(".md"), report.result_md(doc))
        elif path.name.endswith(".scores.json"):
            _write(path.with_suffix(".md"), report.scores_md(doc))
        else:
            continue
        count += 1
    if count == 0:
        print(f"no result JSON found in {out}", file=sys.stderr)
        return EXIT_DATA
    print(f"ok rendered {count} report(s)")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "report":
        return rerender(Path(args.out))
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
