"""Console entry point: a diagnostic agent speaking the episode protocol.

By default runs the rule-based triage policy; with ``--replay-case`` it
replays that case file's gold trajectory instead (calibration mode).
"""

from __future__ import annotations

import argparse
import json
import sys

from .rule_agent import default_policy, replay_policy, run_rule_agent


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="opsbench-demo-agent")
    parser.add_argument(
        "--replay-case",
        metavar="CASE_JSON",
        default=None,
        help="replay the gold trajectory of this case file instead of diagnosing",
    )
    args = parser.parse_args(argv)

    if args.replay_case:
        try:
            with open(args.replay_case, encoding="utf-8") as handle:
                case_data = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"cannot load case file: {exc}", file=sys.stderr)
            return 1
        policy = replay_policy(case_data)
    else:
        policy = default_policy()
    return run_rule_agent(policy)


if __name__ == "__main__":
    sys.exit(main())
