"""Command-line interface.

Subcommands cover the whole pipeline headlessly:

    simulate   generate an event log from a process model
    train      bootstrap a session (encode, train, distill) into a bundle
    distill    write the session's decision tree as canonical JSON
    edit       preview edit actions against the session tree
    iterate    apply edits, relabel, fine-tune, re-distill; update the bundle
    metrics    print the session's metrics history
    export     write the single-document session export
    serve      run the HTTP API

State between commands lives in a session bundle directory (``--session``).
Engine defaults may come from a JSON config file via ``--config`` or the
``FAIRSTEER_CONFIG`` environment variable, keyed by subcommand name.

Errors print one structured JSON line to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bundle import export_document, load_session, save_session
from .errors import FairsteerError
from .eventlog import parse_xes_with_report, serialize_xes
from .loop import ParityProbe, bootstrap, run_iteration
from .mlp import TrainConfig, finetune_config
from .simulate import SimConfig, builtin_cancer_screening, load_model, simulate
from .surgery import apply_edits, load_edits
from .tree import TreeParams, dump_tree, fidelity, induce_tree

DEFAULT_HOST = os.environ.get("FAIRSTEER_HOST", "127.0.0.1")
DEFAULT_PORT = int(os.environ.get("FAIRSTEER_PORT", "8765"))


def _comma_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.model is not None:
        model = load_model(args.model)
    else:
        model = builtin_cancer_screening(
            female_refusal=args.female_refusal, male_refusal=args.male_refusal
        )
    log = simulate(model, SimConfig(num_cases=args.cases, seed=args.seed))
    Path(args.output).write_bytes(serialize_xes(log))
    events = sum(len(trace.events) for trace in log.traces)
    print(f"wrote {args.output}: {len(log.traces)} traces, {events} events")
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    log, report = parse_xes_with_report(Path(args.log).read_bytes())
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    probes = tuple(
        ParityProbe(attribute=a, groups=(g0, g1), target_class=target)
        for a, g0, g1, target in args.probe
    )
    state = bootstrap(
        log,
        window=args.window,
        attributes=tuple(args.attribute),
        hidden_layers=_comma_ints(args.hidden),
        train_config=TrainConfig(
            epochs=args.epochs,
            batch_size=args.batch_size,
            learning_rate=args.learning_rate,
            seed=args.seed,
            class_weighting=args.class_weighting,
        ),
        tree_params=TreeParams(
            max_depth=args.max_depth,
            min_samples_leaf=args.min_samples_leaf,
            criterion=args.criterion,
        ),
        probes=probes,
    )
    save_session(state, log, args.session)
    report = state.metrics_history[-1]
    print(
        f"trained session {args.session}: {state.dataset.num_samples} samples, "
        f"accuracy {report.accuracy:.4f}, fidelity {report.fidelity:.4f}"
    )
    return 0


def _cmd_distill(args: argparse.Namespace) -> int:
    state, _ = load_session(args.session)
    params = state.tree.params
    if args.max_depth is not None or args.min_samples_leaf is not None:
        params = TreeParams(
            max_depth=args.max_depth if args.max_depth is not None else params.max_depth,
            min_samples_leaf=args.min_samples_leaf
            if args.min_samples_leaf is not None
            else params.min_samples_leaf,
            criterion=params.criterion,
        )
    tree = induce_tree(state.distillation, params)
    dump_tree(tree, args.output)
    fid = fidelity(tree, state.model, state.dataset.features)
    print(f"wrote {args.output}: {tree.num_nodes} nodes, fidelity {fid:.4f}")
    return 0


def _cmd_edit(args: argparse.Namespace) -> int:
    state, _ = load_session(args.session)
    edits = load_edits(args.edits)
    tree, records = apply_edits(
        state.tree, edits, state.distillation, state.tree.params
    )
    dump_tree(tree, args.output)
    for record in records:
        print(record.summary)
    print(f"wrote {args.output}: {tree.num_nodes} nodes after {len(records)} edits")
    return 0


def _cmd_iterate(args: argparse.Namespace) -> int:
    state, log = load_session(args.session)
    edits = load_edits(args.edits)
    finetune = finetune_config(
        TrainConfig(seed=state.model.seed), epochs=args.epochs
    )
    next_state, relabel = run_iteration(
        state, edits, finetune=finetune, changed_only=args.changed_only
    )
    save_session(next_state, log, args.session)
    report = next_state.metrics_history[-1]
    print(
        f"iteration {next_state.iteration}: {relabel.changed}/{relabel.total} "
        f"labels changed, accuracy {report.accuracy:.4f}, "
        f"fidelity {report.fidelity:.4f}"
    )
    for parity in report.parity:
        print(
            f"  parity[{parity.probe.attribute} -> {parity.probe.target_class}]: "
            f"gap {parity.gap:.4f}"
        )
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    state, _ = load_session(args.session)
    document = {
        "iteration": state.iteration,
        "history": [
            {"iteration": i, **report.to_json()}
            for i, report in enumerate(state.metrics_history)
        ],
    }
    text = json.dumps(document, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        print(text)
    return 0


def _cmd_export(args: argparse.Namespace) -> int:
    state, _ = load_session(args.session)
    Path(args.output).write_text(
        json.dumps(export_document(state), indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {args.output}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    defaults = defaults or {}
    parser = argparse.ArgumentParser(
        prog="fairsteer",
        description="Train, distill, edit, and fine-tune next-activity models.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--config",
        default=None,
        help="JSON file with per-subcommand option defaults "
        "(also via FAIRSTEER_CONFIG)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="generate an event log")
    sim.add_argument("--cases", type=int, default=1000)
    sim.add_argument("--seed", type=int, default=42)
    sim.add_argument("--model", default=None, help="process model JSON file")
    sim.add_argument("--female-refusal", type=float, default=0.5)
    sim.add_argument("--male-refusal", type=float, default=0.0)
    sim.add_argument("-o", "--output", required=True, help="XES output path")
    sim.set_defaults(func=_cmd_simulate)

    tr = commands.add_parser("train", help="bootstrap a session bundle")
    tr.add_argument("--log", required=True, help="XES input path")
    tr.add_argument("--session", required=True, help="bundle directory to write")
    tr.add_argument("--window", type=int, default=3)
    tr.add_argument(
        "--attribute",
        action="append",
        default=[],
        help="case attribute to encode (repeatable)",
    )
    tr.add_argument("--hidden", default="64,64", help="hidden layer sizes")
    tr.add_argument("--epochs", type=int, default=30)
    tr.add_argument("--batch-size", type=int, default=32)
    tr.add_argument("--learning-rate", type=float, default=1e-3)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--class-weighting", action="store_true")
    tr.add_argument("--max-depth", type=int, default=8)
    tr.add_argument("--min-samples-leaf", type=int, default=5)
    tr.add_argument("--criterion", choices=("gini", "entropy"), default="gini")
    tr.add_argument(
        "--probe",
        action="append",
        nargs=4,
        metavar=("ATTRIBUTE", "GROUP_A", "GROUP_B", "TARGET"),
        default=[],
        help="track a demographic parity gap (repeatable)",
    )
    tr.set_defaults(func=_cmd_train)

    di = commands.add_parser("distill", help="write the session tree as JSON")
    di.add_argument("--session", required=True)
    di.add_argument("--max-depth", type=int, default=None)
    di.add_argument("--min-samples-leaf", type=int, default=None)
    di.add_argument("-o", "--output", required=True)
    di.set_defaults(func=_cmd_distill)

    ed = commands.add_parser("edit", help="preview edits against the session tree")
    ed.add_argument("--session", required=True)
    ed.add_argument("--edits", required=True, help="edit actions JSON file")
    ed.add_argument("-o", "--output", required=True, help="edited tree JSON path")
    ed.set_defaults(func=_cmd_edit)

    it = commands.add_parser("iterate", help="apply edits and fine-tune")
    it.add_argument("--session", required=True)
    it.add_argument("--edits", required=True, help="edit actions JSON file")
    it.add_argument("--epochs", type=int, default=10)
    it.add_argument("--changed-only", action="store_true")
    it.set_defaults(func=_cmd_iterate)

    me = commands.add_parser("metrics", help="print metrics history")
    me.add_argument("--session", required=True)
    me.add_argument("-o", "--output", default=None)
    me.set_defaults(func=_cmd_metrics)

    ex = commands.add_parser("export", help="write a single-document export")
    ex.add_argument("--session", required=True)
    ex.add_argument("-o", "--output", required=True)
    ex.set_defaults(func=_cmd_export)

    sv = commands.add_parser("serve", help="run the HTTP API")
    sv.add_argument("--host", default=DEFAULT_HOST)
    sv.add_argument("--port", type=int, default=DEFAULT_PORT)
    sv.set_defaults(func=_cmd_serve)

    for name, sub in commands.choices.items():
        overrides = defaults.get(name)
        if isinstance(overrides, dict):
            sub.set_defaults(
                **{key.replace("-", "_"): value for key, value in overrides.items()}
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=os.environ.get("FAIRSTEER_CONFIG"))
    known, _ = pre.parse_known_args(argv)
    config_defaults: dict = {}
    if known.config:
        try:
            config_defaults = json.loads(Path(known.config).read_text("utf-8"))
        except (OSError, ValueError) as exc:
            print(
                json.dumps({"error": "bad_config", "detail": str(exc)}),
                file=sys.stderr,
            )
            return 2

    parser = build_parser(config_defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FairsteerError as exc:
        print(
            json.dumps({"error": exc.code, "detail": str(exc)}), file=sys.stderr
        )
        return 2
    except OSError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
