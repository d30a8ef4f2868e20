"""Command line interface.

Subcommands: forge (build cases), list (templates/cases), run (external
agents over stdio or HTTP), demo (scripted agents), score, report, verify.
``OPSBENCH_CASES_DIR`` supplies the default case root; flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
from pathlib import Path

from ..canonical import read_json
from ..cases import load_case, load_episode, save_episode
from ..errors import OpsBenchError
from ..forge import BaseClusterConfig, build_all, build_case, load_shipped_templates
from ..metrics import SuiteReport, render_report_md, save_report, score_suite
from ..verify import case_dirs, verify_all
from .agents import AGENT_KINDS, make_scripted_agent
from .channels import HttpChannel, InProcessChannel, SubprocessChannel
from .runner import RunConfig, run_suite

DEFAULT_SEED = 7


def _cases_root(value) -> Path:
    if value:
        return Path(value)
    env = os.environ.get("OPSBENCH_CASES_DIR")
    if env:
        return Path(env)
    raise OpsBenchError("no case directory given (use --cases or OPSBENCH_CASES_DIR)")


def _load_bundles(cases_root: Path):
    dirs = case_dirs(cases_root)
    if not dirs:
        raise OpsBenchError(f"no cases found under {cases_root}")
    return [load_case(d / "case.json", check_answerability=False) for d in dirs]


def _cmd_forge(args) -> int:
    templates = load_shipped_templates()
    if not args.all:
        templates = [t for t in templates if t.template_id == args.template]
        if not templates:
            print(f"error: unknown template {args.template!r}", file=sys.stderr)
            return 1
    config = BaseClusterConfig()
    for template in templates:
        bundle = build_case(template, config, args.seed, args.out)
        print(f"built {bundle.case_id}")
    return 0


def _cmd_list(args) -> int:
    if args.templates:
        for template in load_shipped_templates():
            print(
                f"{template.template_id}\t{template.category.value}\t"
                f"{template.root_cause_type.value}\t{template.difficulty.value}"
            )
        return 0
    root = _cases_root(args.cases)
    for directory in case_dirs(root):
        bundle = load_case(directory / "case.json", check_answerability=False)
        print(f"{bundle.case_id}\t{bundle.alert.title}")
    return 0


def _run_config(args, default_label: str) -> RunConfig:
    return RunConfig(
        max_steps=args.max_steps,
        call_timeout=args.timeout,
        clock=args.clock,
        step_seconds=args.step_seconds,
        agent_label=args.label or default_label,
        parallel=args.parallel,
    )


def _write_records(records, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for record in records:
        save_episode(record, out_dir / f"{record.case_id}.episode.json")
    completed = sum(1 for r in records if r.completed)
    print(f"ran {len(records)} episodes ({completed} completed) -> {out_dir}")


def _cmd_run(args) -> int:
    bundles = _load_bundles(_cases_root(args.cases))
    cfg = _run_config(args, default_label="external")
    if args.agent_cmd:
        def channel_factory(bundle):
            command = args.agent_cmd.replace("{case_dir}", str(bundle.base_dir))
            return SubprocessChannel(shlex.split(command))
    else:
        def channel_factory(bundle):
            return HttpChannel(args.agent_url, timeout=args.timeout)
    records = run_suite(bundles, channel_factory, cfg)
    _write_records(records, Path(args.out))
    return 0


def _cmd_demo(args) -> int:
    bundles = _load_bundles(_cases_root(args.cases))
    cfg = _run_config(args, default_label=args.agent)

    def channel_factory(bundle):
        return InProcessChannel(make_scripted_agent(args.agent, bundle))

    records = run_suite(bundles, channel_factory, cfg)
    _write_records(records, Path(args.out))
    return 0


def _cmd_score(args) -> int:
    episodes_dir = Path(args.episodes)
    episodes = [load_episode(p) for p in sorted(episodes_dir.glob("*.episode.json"))]
    if not episodes:
        print(f"error: no episode files under {episodes_dir}", file=sys.stderr)
        return 1
    bundles = _load_bundles(_cases_root(args.cases))
    truths = {b.case_id: b.ground_truth for b in bundles}
    orphans = [e.case_id for e in episodes if e.case_id not in truths]
    if orphans:
        print(f"error: episode without matching case: {orphans[0]}", file=sys.stderr)
        return 1
    report = score_suite(episodes, truths)
    md_path = args.md or str(Path(args.out).with_suffix(".md"))
    save_report(report, args.out, md_path)
    print(f"scored {len(episodes)} episodes -> {args.out}, {md_path}")
    return 0


def _cmd_report(args) -> int:
    data = read_json(args.report)
    from ..metrics import EpisodeScore

    scores = tuple(
        EpisodeScore(**{k: v for k, v in entry.items()}) for entry in data.get("cases", [])
    )
    report = SuiteReport(
        agent_label=data.get("agent_label", ""),
        scores=scores,
        aggregates=data.get("aggregates", {}),
        by_category=data.get("by_category", {}),
    )
    rendered = render_report_md(report)
    if args.md:
        Path(args.md).write_text(rendered, encoding="utf-8")
        print(f"wrote {args.md}")
    else:
        print(rendered)
    return 0


def _cmd_verify(args) -> int:
    root = _cases_root(args.cases)
    audits = verify_all(root, probe_count=args.probes)
    if not audits:
        print(f"error: no cases found under {root}", file=sys.stderr)
        return 1
    failed = 0
    for audit in audits:
        status = "ok" if audit.ok else "FAIL"
        print(f"{audit.case_id}: {status} ({audit.cache_entries} cache entries)")
        for problem in audit.problems:
            failed += 1
            print(f"  - {problem}")
    if failed:
        print(f"verification failed: {failed} problem(s)", file=sys.stderr)
        return 1
    print(f"verified {len(audits)} case(s): all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opsbench",
        description="Deterministic replay benchmark for agentic cloud fault diagnosis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("forge", help="build fault cases from templates")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--template", help="template id to build")
    group.add_argument("--all", action="store_true", help="build every shipped template")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True, help="output case root")
    p.set_defaults(func=_cmd_forge)

    p = sub.add_parser("list", help="list templates or built cases")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--templates", action="store_true")
    group.add_argument("--cases", nargs="?", const="", default=None)
    p.set_defaults(func=_cmd_list)

    def add_run_options(p):
        p.add_argument("--cases", default=None)
        p.add_argument("--out", required=True)
        p.add_argument("--max-steps", type=int, default=25)
        p.add_argument("--timeout", type=float, default=60.0)
        p.add_argument("--clock", choices=("wall", "virtual"), default="wall")
        p.add_argument("--step-seconds", type=int, default=1)
        p.add_argument("--label", default=None)
        p.add_argument("--parallel", type=int, default=1)

    p = sub.add_parser("run", help="evaluate an external agent")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--agent-cmd", help="agent subprocess command ({case_dir} substituted)")
    group.add_argument("--agent-url", help="agent HTTP endpoint")
    add_run_options(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("demo", help="run a built-in scripted agent")
    p.add_argument("--agent", choices=sorted(AGENT_KINDS), required=True)
    add_run_options(p)
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("score", help="score recorded episodes")
    p.add_argument("--episodes", required=True)
    p.add_argument("--cases", default=None)
    p.add_argument("--out", default="report.json")
    p.add_argument("--md", default=None)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("report", help="render a report.json as markdown")
    p.add_argument("--report", required=True)
    p.add_argument("--md", default=None)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("verify", help="audit built cases")
    p.add_argument("--cases", default=None)
    p.add_argument("--probes", type=int, default=200)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OpsBenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
