"""Command-line entry points: one-shot runs, chat, evaluation, serving."""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from pathlib import Path

from .agent import (
    FinalReport,
    create_session,
    export_result_json,
    handle_followup,
    resolve_backend,
    run_request,
)
from .agent.session import SessionConfig
from .errors import EconAgentError
from .harness import (
    AgentRunner,
    SubprocessRunner,
    aggregate_metrics,
    load_tasks,
    render_report,
    run_suite,
)
from .tools.builtins import default_registry


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        default="scripted",
        help="backend identity: scripted, scripted:<path>, live, live:<endpoint>",
    )
    parser.add_argument("--fixtures", default=None, help="fixture file for the scripted backend")
    parser.add_argument("--data-dir", default=None, help="directory searched for datasets")
    parser.add_argument("--max-retries", type=int, default=3, help="attempts per step")


def _session_from_args(args: argparse.Namespace):
    backend = resolve_backend(args.backend, args.fixtures)
    config = SessionConfig(max_retries=args.max_retries, data_dir=args.data_dir)
    return create_session(backend, config=config)


def _read_prompt(value: str) -> str:
    path = Path(value)
    if path.is_file():
        return path.read_text(encoding="utf-8")
    return value


def _echo_events(session, last_seq: int, out) -> int:
    for event in session.events_after(last_seq):
        payload = event.payload
        if event.kind == "plan":
            print("plan:", file=out)
            for step in payload.get("subtasks", []):
                print(f"  {step['id']}. [{step['action']}] {step['description']}", file=out)
        elif event.kind == "step_started":
            print(f"step {payload['id']} started ({payload['action']})", file=out)
        elif event.kind == "step_attempt" and payload.get("error"):
            print(f"step {payload['id']} attempt {payload['attempt']}: {payload['error']}", file=out)
        elif event.kind == "step_finished":
            print(
                f"step {payload['id']} {payload['status']} (attempts {payload['attempts']})",
                file=out,
            )
        elif event.kind == "report":
            print(f"result: {payload['json_text']}", file=out)
        last_seq = event.seq
    return last_seq


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_run(args: argparse.Namespace) -> int:
    if args.data is not None and not Path(args.data).is_file():
        print(f"error: dataset file not found: {args.data}", file=sys.stderr)
        return 1
    try:
        session = _session_from_args(args)
    except (EconAgentError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    prompt = _read_prompt(args.prompt)
    if args.data is not None:
        prompt = f"{prompt}\nYou could load the corresponding data from {args.data}."
    result = run_request(session, prompt)
    if isinstance(result, FinalReport):
        export_result_json(result, args.output)
        print(result.json_text)
        return 0
    print(result.render_text(), file=sys.stderr)
    return 2


def cmd_chat(args: argparse.Namespace) -> int:
    try:
        session = _session_from_args(args)
    except (EconAgentError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = sys.stdout
    print("econagent chat (:quit to exit, :tools to list tools)", file=out)
    last_seq = 0
    for raw in sys.stdin:
        line = raw.strip()
        if not line:
            continue
        if line == ":quit":
            break
        if line == ":tools":
            for descriptor in session.registry.descriptors():
                scenario = descriptor.summary.target_scenario if descriptor.summary else ""
                print(f"  {descriptor.name}: {scenario}", file=out)
            continue
        try:
            if not session.request_text:
                result = run_request(session, line)
            else:
                result = handle_followup(session, line)
        except Exception as exc:  # keep the loop alive on anything
            print(f"error: {exc}", file=out)
            continue
        last_seq = _echo_events(session, last_seq, out)
        if isinstance(result, FinalReport):
            print(result.json_text, file=out)
        else:
            print(result.render_text(), file=out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        tasks = load_tasks(args.corpus)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load task corpus: {exc}", file=sys.stderr)
        return 1
    if args.runner == "agent":
        runner = AgentRunner(
            backend_factory=lambda: resolve_backend(args.backend, args.fixtures),
            data_dir=args.data_dir,
        )
    else:
        if not args.command:
            print("error: --command is required for the subprocess runner", file=sys.stderr)
            return 1
        runner = SubprocessRunner(shlex.split(args.command), timeout_s=args.budget)
    records = run_suite(tasks, runner, budget_s=args.budget, workers=args.workers)
    report = aggregate_metrics(records, tasks)
    document = render_report(report, args.format)
    print(document, end="")
    if args.output:
        Path(args.output).write_text(document, encoding="utf-8")
    return 0


def cmd_tools(args: argparse.Namespace) -> int:
    registry = default_registry()
    if args.json:
        print(json.dumps([d.to_json_obj() for d in registry.descriptors()], indent=2))
        return 0
    for descriptor in registry.descriptors():
        scenario = descriptor.summary.target_scenario if descriptor.summary else ""
        print(f"{descriptor.name} (v{descriptor.version}): {scenario}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import ServerConfig, serve

    try:
        config = ServerConfig(
            host=args.host,
            port=args.port,
            data_dir=args.data_dir or "./data",
            max_sessions=args.max_sessions,
            backend=args.backend,
            fixtures=args.fixtures,
            max_retries=args.max_retries,
        )
        serve(config)
    except (OSError, ValueError, EconAgentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="econagent", description="agentic econometrics workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one analysis request")
    p_run.add_argument("prompt", help="request text, or a file containing it")
    p_run.add_argument("--data", default=None, help="dataset file the request refers to")
    p_run.add_argument("--output", default="result.json", help="where to write the result JSON")
    _add_backend_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_chat = sub.add_parser("chat", help="interactive multi-round session")
    _add_backend_flags(p_chat)
    p_chat.set_defaults(func=cmd_chat)

    p_eval = sub.add_parser("eval", help="run a benchmark task corpus")
    p_eval.add_argument("corpus", help="JSON array of task specs")
    p_eval.add_argument("--runner", choices=("agent", "subprocess"), default="agent")
    p_eval.add_argument("--command", default=None, help="subprocess runner command template")
    p_eval.add_argument(
        "--format", choices=("text_table", "csv", "json"), default="text_table"
    )
    p_eval.add_argument("--output", default=None, help="also write the report here")
    p_eval.add_argument("--budget", type=float, default=300.0, help="seconds per task")
    p_eval.add_argument("--workers", type=int, default=1)
    _add_backend_flags(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_tools = sub.add_parser("tools", help="list registered tools")
    p_tools.add_argument("--json", action="store_true", help="full descriptor JSON")
    p_tools.set_defaults(func=cmd_tools)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--max-sessions", type=int, default=64)
    _add_backend_flags(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # no tracebacks on the operator surface
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
