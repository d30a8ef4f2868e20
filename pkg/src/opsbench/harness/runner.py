"""The episode control loop and suite runner.

One episode: send init, answer tool calls against the frozen snapshot,
stop on final / budget / timeout / protocol violation, emit the record.
The harness never crashes on agent misbehavior; failures are encoded in
the record.  Ground truth never enters any outbound message.
"""

from __future__ import annotations

import concurrent.futures
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..cases import CaseBundle, Diagnosis, EpisodeRecord, Step, Trajectory
from ..errors import ProtocolViolation
from ..model import Snapshot
from ..tools import dispatch
from .channels import AgentChannel, ChannelError
from .protocol import (
    diagnoses_from_final,
    end_message,
    init_message,
    invocation_from_call,
    parse_agent_message,
    tool_result_message,
)


@dataclass(frozen=True)
class RunConfig:
    max_steps: int = 25
    call_timeout: float = 60.0
    clock: str = "wall"  # wall | virtual
    step_seconds: int = 1
    agent_label: str = "agent"
    parallel: int = 1

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class _WallClock:
    def __init__(self, start: Optional[int] = None):
        self._now = int(time.time())

    def now(self) -> int:
        self._now = int(time.time())
        return self._now

    def advance(self, seconds: int) -> None:
        pass


class _VirtualClock:
    def __init__(self, start: int):
        self._now = start

    def now(self) -> int:
        return self._now

    def advance(self, seconds: int) -> None:
        self._now += seconds


Observer = Callable[[str, dict], None]


def run_episode(
    bundle: CaseBundle,
    channel: AgentChannel,
    cfg: RunConfig,
    snapshot: Optional[Snapshot] = None,
    observer: Optional[Observer] = None,
) -> EpisodeRecord:
    if snapshot is None:
        snapshot = bundle.load_snapshot()
    clock = (
        _VirtualClock(bundle.alert.timestamp) if cfg.clock == "virtual" else _WallClock()
    )
    started_at = clock.now()

    steps: list[Step] = []
    final: tuple[Diagnosis, ...] = ()
    final_thought: Optional[str] = None
    completed = False
    error: Optional[str] = None

    def transmit(message: dict) -> None:
        if observer is not None:
            observer("harness", message)
        channel.send(message)

    try:
        transmit(init_message(bundle.case_id, bundle.alert, cfg.max_steps))
        while True:
            raw = channel.recv(timeout=cfg.call_timeout)
            if observer is not None:
                observer("agent", raw)
            message = parse_agent_message(raw)
            if message["type"] == "final":
                final = diagnoses_from_final(message)
                final_thought = message.get("thought")
                completed = True
                break
            if len(steps) >= cfg.max_steps:
                error = f"step budget exhausted ({cfg.max_steps})"
                break
            invocation = invocation_from_call(message)
            observation = dispatch(snapshot, invocation)
            clock.advance(cfg.step_seconds)
            steps.append(
                Step(
                    index=len(steps) + 1,
                    action=invocation,
                    observation=observation,
                    issued_at=clock.now(),
                    thought=message.get("thought"),
                )
            )
            transmit(tool_result_message(message["id"], observation))
    except ProtocolViolation as exc:
        error = f"protocol violation: {exc}"
    except ChannelError as exc:
        error = f"transport failure: {exc}"

    try:
        transmit(end_message())
    except (ChannelError, ProtocolViolation):
        pass
    finally:
        channel.close()

    clock.advance(cfg.step_seconds)
    ended_at = clock.now()
    return EpisodeRecord(
        case_id=bundle.case_id,
        alert=bundle.alert,
        trajectory=Trajectory(steps=tuple(steps)),
        final=final,
        completed=completed and error is None,
        started_at=started_at,
        ended_at=ended_at,
        agent_label=cfg.agent_label,
        final_thought=final_thought,
        error=error,
    )


def run_suite(
    bundles: Sequence[CaseBundle],
    channel_factory: Callable[[CaseBundle], AgentChannel],
    cfg: RunConfig,
) -> list[EpisodeRecord]:
    """Run every case in isolation (fresh agent session each); sorted output.

    Per-case transport failures are contained in their records; the suite
    itself always completes.
    """
    ordered = sorted(bundles, key=lambda b: b.case_id)

    def run_one(bundle: CaseBundle) -> EpisodeRecord:
        try:
            channel = channel_factory(bundle)
        except ChannelError as exc:
            return EpisodeRecord(
                case_id=bundle.case_id,
                alert=bundle.alert,
                trajectory=Trajectory(),
                final=(),
                completed=False,
                started_at=bundle.alert.timestamp,
                ended_at=bundle.alert.timestamp,
                agent_label=cfg.agent_label,
                error=f"transport failure: {exc}",
            )
        return run_episode(bundle, channel, cfg)

    if cfg.parallel > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.parallel) as pool:
            records = list(pool.map(run_one, ordered))
    else:
        records = [run_one(bundle) for bundle in ordered]
    return sorted(records, key=lambda r: r.case_id)
