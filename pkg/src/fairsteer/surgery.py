"""Human edits to a distilled tree.

Two edit kinds exist:

* RemoveNode: an internal node is replaced by its majority-traffic child;
  samples that used to flow through the removed test are rerouted and all
  affected histograms are recomputed.
* RetrainSubtreeExcluding: the subtree under a node is re-grown on the
  samples routed to that node, with every feature column of the excluded
  case attributes taken out of the candidate set.

Edits are pure: they return a new tree and never touch the input. Batch
application is all-or-nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import EditFailed, NotInternal, UnknownAttribute, UnknownNode
from .tree import (
    DecisionTree,
    DistillationDataset,
    TreeNode,
    TreeParams,
    _argmax_lowest,
    grow_subtree,
)


@dataclass(frozen=True)
class RemoveNode:
    node_id: int


@dataclass(frozen=True)
class RetrainSubtreeExcluding:
    node_id: int
    excluded_attributes: tuple[str, ...]


EditAction = Union[RemoveNode, RetrainSubtreeExcluding]


@dataclass(frozen=True)
class EditRecord:
    """What one applied edit did, for the append-only edit log."""

    action: EditAction
    summary: str

    def to_json(self) -> dict:
        return {"action": action_to_json(self.action), "summary": self.summary}

    @classmethod
    def from_json(cls, doc: dict) -> "EditRecord":
        return cls(action=action_from_json(doc["action"]), summary=doc["summary"])


def action_to_json(action: EditAction) -> dict:
    """Serialize an edit to its wire format.

    RemoveNode: {"type": "remove", "node_id": n}
    RetrainSubtreeExcluding: {"type": "retrain_excluding", "node_id": n,
    "excluded_attributes": [...]}
    """
    if isinstance(action, RemoveNode):
        return {"type": "remove", "node_id": action.node_id}
    return {
        "type": "retrain_excluding",
        "node_id": action.node_id,
        "excluded_attributes": list(action.excluded_attributes),
    }


def action_from_json(doc: dict) -> EditAction:
    kind = doc.get("type")
    if kind == "remove":
        return RemoveNode(node_id=int(doc["node_id"]))
    if kind == "retrain_excluding":
        return RetrainSubtreeExcluding(
            node_id=int(doc["node_id"]),
            excluded_attributes=tuple(doc.get("excluded_attributes", ())),
        )
    raise ValueError(f"unknown edit type {kind!r}")


def actions_from_json(docs: Iterable[dict]) -> list[EditAction]:
    return [action_from_json(doc) for doc in docs]


def routed_samples(
    tree: DecisionTree, node_id: int, dataset: DistillationDataset
) -> np.ndarray:
    """Indices of the dataset samples whose path reaches the node.

    The root routes every sample; a left child routes the subset of its
    parent with feature <= threshold.

    Raises:
        UnknownNode: the id does not exist.
    """
    path = tree.path_to(node_id)
    mask = np.ones(dataset.num_samples, dtype=bool)
    for parent, child in zip(path[:-1], path[1:]):
        goes_left = dataset.features[:, parent.feature] <= parent.threshold
        mask &= goes_left if child is parent.left else ~goes_left
    return np.flatnonzero(mask)


def reroute(tree: DecisionTree, dataset: DistillationDataset) -> DecisionTree:
    """Recompute every histogram / count by sending the dataset through.

    Structure, node ids, and split definitions stay untouched. Leaf
    predictions follow the recomputed histograms; a leaf that no longer
    receives any samples keeps its previous prediction.
    """
    out = tree.copy()

    def fill(node: TreeNode, indices: np.ndarray) -> None:
        labels = dataset.labels[indices]
        node.histogram = np.bincount(
            labels, minlength=dataset.num_classes
        ).astype(np.int64)
        node.n = int(indices.shape[0])
        if node.n > 0:
            node.predicted = _argmax_lowest(node.histogram)
        if node.is_leaf:
            return
        goes_left = dataset.features[indices, node.feature] <= node.threshold
        fill(node.left, indices[goes_left])
        fill(node.right, indices[~goes_left])

    fill(out.root, np.arange(dataset.num_samples))
    return out


def remove_node(
    tree: DecisionTree, node_id: int, dataset: DistillationDataset
) -> DecisionTree:
    """Replace an internal node with its majority-traffic child.

    The child subtree with the larger sample count is promoted (ties go
    left); the whole tree is then rerouted over the distillation dataset so
    every surviving histogram reflects the new sample flow. Surviving node
    ids are unchanged.

    Raises:
        UnknownNode: the id does not exist.
        NotInternal: the node is a leaf.
    """
    target = tree.find(node_id)
    if target.is_leaf:
        raise NotInternal(node_id)
    out = tree.copy()
    target = out.find(node_id)
    promoted = target.left if target.left.n >= target.right.n else target.right
    parent = out.parent_of(node_id)
    if parent is None:
        out.root = promoted
    elif parent.left is target:
        parent.left = promoted
    else:
        parent.right = promoted
    return reroute(out, dataset)


def _columns_for_attribute(
    dataset: DistillationDataset, attribute: str
) -> list[int]:
    """All feature columns that encode one case attribute."""
    if dataset.spec is not None:
        return dataset.spec.columns_for_attribute(attribute)
    columns = [
        i
        for i, name in enumerate(dataset.feature_names)
        if name == attribute or name.startswith(f"{attribute} = ")
    ]
    if not columns:
        raise UnknownAttribute(f"attribute {attribute!r} is not encoded")
    return columns


def retrain_subtree_excluding(
    tree: DecisionTree,
    node_id: int,
    excluded_attributes: Sequence[str],
    dataset: DistillationDataset,
    params: TreeParams | None = None,
) -> tuple[DecisionTree, str]:
    """Re-grow the subtree under a node without the excluded attributes.

    The replacement is induced on the samples routed to the node, with the
    same algorithm and impurity criterion as distillation, every feature
    column of each excluded attribute removed from the candidates, and a
    depth budget of max_depth minus the node's depth. New nodes take fresh
    ids. If no samples are routed the node becomes a leaf predicting the
    parent's majority class (noted in the returned summary).

    Returns the edited tree and a human-readable summary line.

    Raises:
        UnknownNode, UnknownAttribute.
    """
    if params is None:
        params = tree.params
    target = tree.find(node_id)  # raises UnknownNode
    excluded_columns: set[int] = set()
    for attribute in excluded_attributes:
        excluded_columns.update(_columns_for_attribute(dataset, attribute))
    allowed = [
        c for c in range(dataset.features.shape[1]) if c not in excluded_columns
    ]
    indices = routed_samples(tree, node_id, dataset)
    depth = tree.depth_of(node_id)
    out = tree.copy()
    target = out.find(node_id)
    parent = out.parent_of(node_id)
    excluded_label = ", ".join(excluded_attributes)

    if indices.shape[0] == 0:
        fallback = parent if parent is not None else target
        replacement = TreeNode(
            node_id=out.next_node_id,
            histogram=np.zeros(dataset.num_classes, dtype=np.int64),
            n=0,
            predicted=_argmax_lowest(fallback.histogram),
        )
        out.next_node_id += 1
        summary = (
            f"retrain at node {node_id} excluding [{excluded_label}]: no samples "
            f"routed, replaced with a leaf predicting "
            f"{out.class_names[replacement.predicted]!r} (parent majority)"
        )
    else:
        replacement, out.next_node_id = grow_subtree(
            dataset.features[indices],
            np.asarray(dataset.labels, dtype=np.int64)[indices],
            dataset.num_classes,
            params,
            dataset.feature_names,
            dataset.onehot_columns(),
            depth_budget=params.max_depth - depth,
            next_id=out.next_node_id,
            allowed_columns=allowed,
        )
        summary = (
            f"retrained subtree at node {node_id} excluding [{excluded_label}] "
            f"on {indices.shape[0]} samples"
        )

    if parent is None:
        out.root = replacement
    elif parent.left is target:
        parent.left = replacement
    else:
        parent.right = replacement
    return out, summary


def apply_edits(
    tree: DecisionTree,
    edits: Sequence[EditAction],
    dataset: DistillationDataset,
    params: TreeParams | None = None,
) -> tuple[DecisionTree, list[EditRecord]]:
    """Apply a batch of edits in order; all-or-nothing.

    On failure the original tree is untouched and EditFailed names the
    offending edit's position.
    """
    current = tree
    records: list[EditRecord] = []
    for index, action in enumerate(edits):
        try:
            if isinstance(action, RemoveNode):
                before = current.find(action.node_id)
                if before.is_leaf:
                    raise NotInternal(action.node_id)
                promoted = (
                    before.left if before.left.n >= before.right.n else before.right
                )
                current = remove_node(current, action.node_id, dataset)
                summary = (
                    f"removed node {action.node_id} ({before.display}), "
                    f"promoted child {promoted.node_id}"
                )
            elif isinstance(action, RetrainSubtreeExcluding):
                current, summary = retrain_subtree_excluding(
                    current,
                    action.node_id,
                    action.excluded_attributes,
                    dataset,
                    params,
                )
            else:
                raise ValueError(f"unknown edit action {action!r}")
            records.append(EditRecord(action=action, summary=summary))
        except Exception as exc:
            raise EditFailed(index, exc) from exc
    return current, records


def nodes_testing_attribute(
    tree: DecisionTree, dataset: DistillationDataset, attribute: str
) -> list[TreeNode]:
    """Internal nodes whose split tests any column of a case attribute."""
    columns = set(_columns_for_attribute(dataset, attribute))
    return [
        node
        for node in tree.nodes()
        if not node.is_leaf and node.feature in columns
    ]


def leaves_predicting(tree: DecisionTree, class_index: int) -> list[TreeNode]:
    """All leaves predicting one class, in preorder."""
    return [
        node
        for node in tree.nodes()
        if node.is_leaf and node.predicted == class_index
    ]


def edit_log_to_json(records: Sequence[EditRecord]) -> list[dict]:
    return [record.to_json() for record in records]


def edit_log_from_json(docs: Sequence[dict]) -> list[EditRecord]:
    return [EditRecord.from_json(doc) for doc in docs]


def load_edits(path: str) -> list[EditAction]:
    """Read an edit list from a JSON file (a list of action objects)."""
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    if not isinstance(doc, list):
        raise ValueError("edit file must contain a JSON list of edit objects")
    return actions_from_json(doc)
