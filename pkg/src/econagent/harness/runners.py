"""Suite execution over pluggable runners: in-process agent or subprocess."""

from __future__ import annotations

import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from ..errors import NoResultFoundError
from .extract import extract_result
from .prompts import build_prompt
from .tasks import TaskSpec


@dataclass(frozen=True)
class RunRecord:
    """What one task run produced, success or not."""

    task_id: str
    completed: bool
    extracted: Optional[tuple[float, float, float]] = None
    elapsed_ms: int = 0
    failure_reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.completed != (self.extracted is not None):
            raise ValueError("extracted must be present exactly when completed")


#: runner contract: (prompt text, data path) -> RunRecord
Runner = Callable[[str, str], RunRecord]


class AgentRunner:
    """Runs each prompt through a fresh in-process session.

    ``backend_factory`` is called once per task, in task order, so scripted
    suites can hand out one fixture per task.
    """

    def __init__(self, backend_factory, registry=None, data_dir: Optional[str] = None):
        self.backend_factory = backend_factory
        self.registry = registry
        self.data_dir = data_dir

    def __call__(self, prompt: str, data_path: str) -> RunRecord:
        from ..agent import FinalReport, SessionConfig, create_session, run_request

        data_dir = self.data_dir or (str(Path(data_path).parent) if data_path else None)
        session = create_session(
            self.backend_factory(),
            registry=self.registry,
            config=SessionConfig(data_dir=data_dir),
        )
        result = run_request(session, prompt)
        if not isinstance(result, FinalReport):
            return RunRecord("", False, None, 0, result.render_text())
        for name, content, _ in session.artifacts:
            if name == "result.json":
                return RunRecord("", True, extract_result(content), 0, None)
        return RunRecord("", False, None, 0, "run finished without a result artifact")


class SubprocessRunner:
    """Runs an external command per task; the baseline-tool contract.

    The command is a template list; the placeholders ``{prompt_file}``,
    ``{data_path}`` and ``{output_file}`` are substituted per task.  The
    command must write its result JSON to the output file.
    """

    def __init__(self, command: list[str], timeout_s: float = 300.0):
        self.command = list(command)
        self.timeout_s = timeout_s

    def __call__(self, prompt: str, data_path: str) -> RunRecord:
        with tempfile.TemporaryDirectory() as tmp:
            prompt_file = Path(tmp) / "prompt.txt"
            output_file = Path(tmp) / "result.json"
            prompt_file.write_text(prompt, encoding="utf-8")
            argv = [
                arg.format(
                    prompt_file=prompt_file, data_path=data_path, output_file=output_file
                )
                for arg in self.command
            ]
            try:
                proc = subprocess.run(
                    argv, capture_output=True, text=True, timeout=self.timeout_s
                )
            except (OSError, subprocess.TimeoutExpired) as exc:
                return RunRecord("", False, None, 0, f"{type(exc).__name__}: {exc}")
            if not output_file.is_file():
                reason = f"no output file (exit {proc.returncode}): {proc.stderr[-500:]}"
                return RunRecord("", False, None, 0, reason)
            try:
                return RunRecord("", True, extract_result(output_file), 0, None)
            except NoResultFoundError as exc:
                return RunRecord("", False, None, 0, str(exc))


def _run_one(task: TaskSpec, runner: Runner, budget_s: float) -> RunRecord:
    started = time.perf_counter()
    try:
        record = runner(build_prompt(task), task.data_path)
    except Exception as exc:  # runner contract breach still yields a record
        record = RunRecord("", False, None, 0, f"{type(exc).__name__}: {exc}")
    elapsed_ms = int((time.perf_counter() - started) * 1000)
    record = replace(record, task_id=task.id, elapsed_ms=elapsed_ms)
    if elapsed_ms > budget_s * 1000:
        record = replace(
            record,
            completed=False,
            extracted=None,
            failure_reason=f"exceeded the {budget_s:.0f} s task budget",
        )
    return record


def run_suite(
    tasks: list[TaskSpec],
    runner: Runner,
    budget_s: float = 300.0,
    workers: int = 1,
) -> list[RunRecord]:
    """Run every task; records stay index-aligned with the task list."""
    if workers <= 1:
        return [_run_one(task, runner, budget_s) for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_one, task, runner, budget_s) for task in tasks]
        return [f.result() for f in futures]
