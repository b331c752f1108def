"""Session persistence: a bundle directory holds one loop's full state.

Layout::

    manifest.json   iteration, probes, format version
    log.xes         the event log the session was built from
    dataset.json    encoded prefixes (columnar, current + original labels)
    model.json      network checkpoint (bit-exact weights)
    tree.json       canonical tree document
    edit_log.json   append-only list of applied edits
    metrics.json    metrics history, one report per iteration

Loading restores a LoopState equivalent to the saved one: same weights,
same tree (ids included), same labels. The distillation dataset is
recomputed from the model, which is deterministic and therefore identical.
"""

from __future__ import annotations

import json
import os

from .encoding import dataset_from_json, dataset_to_json
from .errors import CorruptBundle
from .eventlog import EventLog, parse_xes, serialize_xes
from .loop import LoopState, MetricsReport, ParityProbe
from .mlp import model_from_checkpoint, model_to_checkpoint
from .surgery import edit_log_from_json, edit_log_to_json
from .tree import label_with_model, tree_from_canonical, tree_to_canonical

BUNDLE_VERSION = 1


def save_session(state: LoopState, log: EventLog, directory: str) -> None:
    """Write a complete bundle; overwrites existing components."""
    os.makedirs(directory, exist_ok=True)

    def write_json(name: str, doc) -> None:
        with open(os.path.join(directory, name), "w", encoding="utf-8") as handle:
            json.dump(doc, handle)

    with open(os.path.join(directory, "log.xes"), "wb") as handle:
        handle.write(serialize_xes(log))
    write_json(
        "manifest.json",
        {
            "version": BUNDLE_VERSION,
            "iteration": state.iteration,
            "probes": [p.to_json() for p in state.probes],
        },
    )
    write_json("dataset.json", dataset_to_json(state.dataset))
    write_json("model.json", model_to_checkpoint(state.model))
    write_json("tree.json", tree_to_canonical(state.tree))
    write_json("edit_log.json", edit_log_to_json(state.edit_log))
    write_json("metrics.json", [m.to_json() for m in state.metrics_history])


def load_session(directory: str) -> tuple[LoopState, EventLog]:
    """Load a bundle back into a LoopState.

    Raises:
        CorruptBundle: a component is missing or unreadable; the message
            names the component.
    """

    def read_json(name: str):
        path = os.path.join(directory, name)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                return json.load(handle)
        except FileNotFoundError as exc:
            raise CorruptBundle(name, "missing") from exc
        except (OSError, json.JSONDecodeError) as exc:
            raise CorruptBundle(name, str(exc)) from exc

    manifest = read_json("manifest.json")
    if manifest.get("version") != BUNDLE_VERSION:
        raise CorruptBundle(
            "manifest.json", f"unsupported version {manifest.get('version')!r}"
        )

    try:
        with open(os.path.join(directory, "log.xes"), "rb") as handle:
            log = parse_xes(handle.read())
    except FileNotFoundError as exc:
        raise CorruptBundle("log.xes", "missing") from exc
    except Exception as exc:
        raise CorruptBundle("log.xes", str(exc)) from exc

    def component(name: str, builder):
        doc = read_json(name)
        try:
            return builder(doc)
        except Exception as exc:
            raise CorruptBundle(name, str(exc)) from exc

    dataset = component("dataset.json", dataset_from_json)
    model, _ = component("model.json", model_from_checkpoint)
    tree = component("tree.json", tree_from_canonical)
    edit_log = component("edit_log.json", edit_log_from_json)
    metrics = component(
        "metrics.json", lambda docs: [MetricsReport.from_json(d) for d in docs]
    )

    state = LoopState(
        iteration=int(manifest["iteration"]),
        model=model,
        tree=tree,
        dataset=dataset,
        distillation=label_with_model(dataset, model),
        edit_log=tuple(edit_log),
        metrics_history=tuple(metrics),
        probes=tuple(ParityProbe.from_json(p) for p in manifest.get("probes", [])),
    )
    return state, log


def export_document(state: LoopState) -> dict:
    """Single-document export: checkpoint + tree + edit log + metrics."""
    return {
        "version": BUNDLE_VERSION,
        "iteration": state.iteration,
        "model": model_to_checkpoint(state.model),
        "tree": tree_to_canonical(state.tree),
        "edit_log": edit_log_to_json(state.edit_log),
        "metrics": [m.to_json() for m in state.metrics_history],
        "probes": [p.to_json() for p in state.probes],
    }
