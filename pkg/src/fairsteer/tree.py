"""Surrogate decision trees distilled from the neural model.

The distillation dataset pairs every encoded prefix with the class the
network predicts for it; the tree is then grown with classic greedy
recursive partitioning (Gini impurity by default). The resulting tree is
the editable, human-readable interface to the model.

Determinism contract: splits consider every feature with thresholds at the
midpoints of consecutive distinct observed values. A split is taken only if
both sides keep at least ``min_samples_leaf`` samples and the weighted child
impurity is strictly below the node's impurity; ties are broken by lowest
feature index, then lowest threshold. Node ids are assigned in preorder.
Impurity scores are accumulated scalar-wise so two runs over the same data
choose bit-identical splits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .encoding import EncodingSpec, PrefixDataset, spec_from_json, spec_to_json
from .errors import DimensionMismatch, EmptyDataset, UnknownNode
from .mlp import MlpModel, predict

CANONICAL_VERSION = 1


@dataclass
class TreeParams:
    """Growth limits and impurity criterion ("gini" or "entropy")."""

    max_depth: int = 8
    min_samples_leaf: int = 5
    criterion: str = "gini"

    def to_json(self) -> dict:
        return {
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "criterion": self.criterion,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "TreeParams":
        return cls(**doc)


@dataclass
class DistillationDataset:
    """Feature matrix plus the model's predictions as training targets.

    ground_truth carries the original next-activity labels so that metrics
    after relabeling can still refer to what really happened.
    """

    features: np.ndarray
    labels: np.ndarray
    ground_truth: np.ndarray
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...]
    provenance: tuple[tuple[str, int], ...] = ()
    spec: EncodingSpec | None = None

    @property
    def num_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def onehot_columns(self) -> set[int]:
        if self.spec is not None:
            return self.spec.onehot_columns()
        cols = set()
        for column in range(self.features.shape[1]):
            values = np.unique(self.features[:, column])
            if np.isin(values, (0.0, 1.0)).all():
                cols.add(column)
        return cols


def label_with_model(dataset: PrefixDataset, model: MlpModel) -> DistillationDataset:
    """Predict a class for every prefix in the dataset.

    The distillation targets come from the model; the dataset's original
    labels ride along as ground truth.
    """
    predictions = predict(model, dataset.features)
    return DistillationDataset(
        features=dataset.features,
        labels=np.asarray(predictions, dtype=np.int64),
        ground_truth=dataset.original_labels.copy(),
        class_names=dataset.class_names,
        feature_names=dataset.spec.feature_names,
        provenance=dataset.provenance,
        spec=dataset.spec,
    )


@dataclass
class TreeNode:
    """One node; internal nodes test ``feature <= threshold`` (left = true).

    histogram counts the distillation labels routed here; predicted is the
    histogram argmax (lowest class index on ties) and is what the tree
    predicts when the node is a leaf.
    """

    node_id: int
    histogram: np.ndarray
    n: int
    predicted: int
    feature: int | None = None
    threshold: float | None = None
    display: str | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def copy(self) -> "TreeNode":
        return TreeNode(
            node_id=self.node_id,
            histogram=self.histogram.copy(),
            n=self.n,
            predicted=self.predicted,
            feature=self.feature,
            threshold=self.threshold,
            display=self.display,
            left=self.left.copy() if self.left else None,
            right=self.right.copy() if self.right else None,
        )


@dataclass
class DecisionTree:
    """A distilled surrogate tree.

    next_node_id is the id the next newly created node will take; edits
    never reuse the id of a removed node.
    """

    root: TreeNode
    class_names: tuple[str, ...]
    feature_names: tuple[str, ...]
    params: TreeParams
    next_node_id: int

    def nodes(self) -> Iterator[TreeNode]:
        """All nodes in preorder."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def find(self, node_id: int) -> TreeNode:
        for node in self.nodes():
            if node.node_id == node_id:
                return node
        raise UnknownNode(node_id)

    def parent_of(self, node_id: int) -> TreeNode | None:
        """Parent of a node; None for the root. Raises UnknownNode."""
        if self.root.node_id == node_id:
            return None
        for node in self.nodes():
            if not node.is_leaf and node_id in (
                node.left.node_id,
                node.right.node_id,
            ):
                return node
        raise UnknownNode(node_id)

    def path_to(self, node_id: int) -> list[TreeNode]:
        """Nodes from the root down to (and including) the target."""

        def walk(node: TreeNode, trail: list[TreeNode]) -> list[TreeNode] | None:
            trail = trail + [node]
            if node.node_id == node_id:
                return trail
            if node.is_leaf:
                return None
            return walk(node.left, trail) or walk(node.right, trail)

        path = walk(self.root, [])
        if path is None:
            raise UnknownNode(node_id)
        return path

    def depth_of(self, node_id: int) -> int:
        return len(self.path_to(node_id)) - 1

    def depth(self) -> int:
        def deepest(node: TreeNode) -> int:
            if node.is_leaf:
                return 0
            return 1 + max(deepest(node.left), deepest(node.right))

        return deepest(self.root)

    @property
    def num_nodes(self) -> int:
        return sum(1 for _ in self.nodes())

    def predict(self, features: np.ndarray) -> np.ndarray | int:
        """Route vectors to leaves; returns leaf predicted classes."""
        x = np.asarray(features, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != len(self.feature_names):
            raise DimensionMismatch(
                f"tree expects {len(self.feature_names)} features, got {x.shape[1]}"
            )
        out = np.zeros(x.shape[0], dtype=np.int64)

        def assign(node: TreeNode, mask: np.ndarray) -> None:
            if node.is_leaf:
                out[mask] = node.predicted
                return
            goes_left = x[:, node.feature] <= node.threshold
            assign(node.left, mask & goes_left)
            assign(node.right, mask & ~goes_left)

        assign(self.root, np.ones(x.shape[0], dtype=bool))
        return int(out[0]) if single else out

    def copy(self) -> "DecisionTree":
        return DecisionTree(
            root=self.root.copy(),
            class_names=self.class_names,
            feature_names=self.feature_names,
            params=TreeParams(**self.params.to_json()),
            next_node_id=self.next_node_id,
        )


def _argmax_lowest(histogram: np.ndarray) -> int:
    return int(np.argmax(histogram))


def _impurity(counts: Sequence[int], total: int, criterion: str) -> float:
    """Impurity from integer class counts, accumulated scalar-wise."""
    if total == 0:
        return 0.0
    if criterion == "entropy":
        acc = 0.0
        for count in counts:
            if count:
                p = count / total
                acc -= p * math.log2(p)
        return acc
    acc = 0.0
    for count in counts:
        p = count / total
        acc += p * p
    return 1.0 - acc


def best_split(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    min_samples_leaf: int,
    criterion: str = "gini",
    allowed_columns: Sequence[int] | None = None,
) -> tuple[int, float] | None:
    """The (feature, threshold) minimizing weighted child impurity.

    Candidate thresholds are midpoints of consecutive distinct observed
    values per feature. A candidate is valid only when both sides keep at
    least min_samples_leaf samples and impurity strictly decreases. Ties
    prefer the lowest feature index, then the lowest threshold. Returns
    None when no valid candidate exists.
    """
    n = features.shape[0]
    parent_counts = np.bincount(labels, minlength=num_classes)
    # all comparisons use impurity sums scaled by n (one fewer division, so
    # a mathematically zero gain cannot round into a false improvement)
    parent_sum = n * _impurity(parent_counts.tolist(), n, criterion)
    columns = (
        range(features.shape[1]) if allowed_columns is None else allowed_columns
    )
    best: tuple[float, int, float] | None = None
    for feature in columns:
        column = features[:, feature]
        distinct = np.unique(column)
        if distinct.shape[0] < 2:
            continue
        for lo, hi in zip(distinct[:-1], distinct[1:]):
            threshold = float((lo + hi) / 2.0)
            left_mask = column <= threshold
            n_left = int(left_mask.sum())
            n_right = n - n_left
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            left_counts = np.bincount(labels[left_mask], minlength=num_classes)
            right_counts = parent_counts - left_counts
            weighted_sum = n_left * _impurity(
                left_counts.tolist(), n_left, criterion
            ) + n_right * _impurity(right_counts.tolist(), n_right, criterion)
            if weighted_sum >= parent_sum:
                continue  # no strict impurity decrease
            if best is None or weighted_sum < best[0]:
                best = (weighted_sum, feature, threshold)
    if best is None:
        return None
    return best[1], best[2]


def _display_for(
    feature_names: Sequence[str], onehot: set[int], feature: int, threshold: float
) -> str:
    name = feature_names[feature]
    if feature in onehot:
        return name
    return f"{name} <= {threshold:.6g}"


def grow_subtree(
    features: np.ndarray,
    labels: np.ndarray,
    num_classes: int,
    params: TreeParams,
    feature_names: Sequence[str],
    onehot: set[int],
    depth_budget: int,
    next_id: int,
    allowed_columns: Sequence[int] | None = None,
) -> tuple[TreeNode, int]:
    """Grow one subtree; returns (root, next free node id). Ids are preorder."""
    histogram = np.bincount(labels, minlength=num_classes).astype(np.int64)
    node = TreeNode(
        node_id=next_id,
        histogram=histogram,
        n=int(labels.shape[0]),
        predicted=_argmax_lowest(histogram),
    )
    next_id += 1
    pure = int((histogram > 0).sum()) <= 1
    if (
        pure
        or depth_budget <= 0
        or labels.shape[0] < 2 * params.min_samples_leaf
    ):
        return node, next_id
    split = best_split(
        features,
        labels,
        num_classes,
        params.min_samples_leaf,
        params.criterion,
        allowed_columns,
    )
    if split is None:
        return node, next_id
    feature, threshold = split
    node.feature = feature
    node.threshold = threshold
    node.display = _display_for(feature_names, onehot, feature, threshold)
    left_mask = features[:, feature] <= threshold
    node.left, next_id = grow_subtree(
        features[left_mask],
        labels[left_mask],
        num_classes,
        params,
        feature_names,
        onehot,
        depth_budget - 1,
        next_id,
        allowed_columns,
    )
    node.right, next_id = grow_subtree(
        features[~left_mask],
        labels[~left_mask],
        num_classes,
        params,
        feature_names,
        onehot,
        depth_budget - 1,
        next_id,
        allowed_columns,
    )
    return node, next_id


def induce_tree(
    dataset: DistillationDataset, params: TreeParams | None = None
) -> DecisionTree:
    """Grow a surrogate tree over a distillation dataset.

    Raises:
        EmptyDataset: the dataset has no samples.
    """
    if params is None:
        params = TreeParams()
    if dataset.num_samples == 0:
        raise EmptyDataset("cannot induce a tree from an empty dataset")
    root, next_id = grow_subtree(
        dataset.features,
        np.asarray(dataset.labels, dtype=np.int64),
        dataset.num_classes,
        params,
        dataset.feature_names,
        dataset.onehot_columns(),
        depth_budget=params.max_depth,
        next_id=0,
    )
    return DecisionTree(
        root=root,
        class_names=dataset.class_names,
        feature_names=dataset.feature_names,
        params=params,
        next_node_id=next_id,
    )


def fidelity(tree: DecisionTree, model: MlpModel, features: np.ndarray) -> float:
    """Fraction of samples where tree and model predict the same class."""
    tree_predictions = tree.predict(features)
    model_predictions = predict(model, features)
    return float(np.mean(tree_predictions == model_predictions))


def validate_tree(tree: DecisionTree) -> None:
    """Assert structural invariants; raises AssertionError on violation.

    Checked: unique node ids below next_node_id, child histograms summing
    to the parent's, child counts summing to the parent's, leaf prediction
    being the histogram argmax whenever the leaf has samples, and depth
    within params.max_depth.
    """
    seen: set[int] = set()

    def check(node: TreeNode, depth: int) -> None:
        assert node.node_id not in seen, f"duplicate node id {node.node_id}"
        seen.add(node.node_id)
        assert node.node_id < tree.next_node_id, "node id >= next_node_id"
        assert depth <= tree.params.max_depth, "tree deeper than max_depth"
        assert node.n == int(node.histogram.sum()), "n != histogram total"
        if node.is_leaf:
            if node.n > 0:
                assert node.predicted == _argmax_lowest(node.histogram), (
                    f"leaf {node.node_id} predicted class is not the "
                    "histogram argmax"
                )
        else:
            assert node.right is not None, "internal node missing right child"
            assert node.feature is not None and node.threshold is not None
            combined = node.left.histogram + node.right.histogram
            assert (combined == node.histogram).all(), (
                f"node {node.node_id} histogram != sum of children"
            )
            check(node.left, depth + 1)
            check(node.right, depth + 1)

    check(tree.root, 0)


# -- canonical JSON -----------------------------------------------------------


def tree_to_canonical(tree: DecisionTree) -> dict:
    """Canonical JSON document: params, names, preorder node array."""
    nodes = []
    for node in tree.nodes():
        entry: dict = {
            "id": node.node_id,
            "kind": "leaf" if node.is_leaf else "internal",
            "histogram": [int(c) for c in node.histogram],
            "n": node.n,
            "predicted": node.predicted,
        }
        if not node.is_leaf:
            entry["feature"] = node.feature
            entry["display"] = node.display
            entry["threshold"] = node.threshold
            entry["left"] = node.left.node_id
            entry["right"] = node.right.node_id
        nodes.append(entry)
    return {
        "version": CANONICAL_VERSION,
        "params": tree.params.to_json(),
        "class_names": list(tree.class_names),
        "feature_names": list(tree.feature_names),
        "next_node_id": tree.next_node_id,
        "nodes": nodes,
    }


def tree_from_canonical(doc: dict) -> DecisionTree:
    """Rebuild a tree from its canonical document (exact round-trip)."""
    by_id: dict[int, dict] = {entry["id"]: entry for entry in doc["nodes"]}

    def build(node_id: int) -> TreeNode:
        entry = by_id[node_id]
        node = TreeNode(
            node_id=entry["id"],
            histogram=np.asarray(entry["histogram"], dtype=np.int64),
            n=int(entry["n"]),
            predicted=int(entry["predicted"]),
        )
        if entry["kind"] == "internal":
            node.feature = int(entry["feature"])
            node.threshold = float(entry["threshold"])
            node.display = entry["display"]
            node.left = build(entry["left"])
            node.right = build(entry["right"])
        return node

    return DecisionTree(
        root=build(doc["nodes"][0]["id"]),
        class_names=tuple(doc["class_names"]),
        feature_names=tuple(doc["feature_names"]),
        params=TreeParams.from_json(doc["params"]),
        next_node_id=int(doc["next_node_id"]),
    )


def dump_tree(tree: DecisionTree, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(tree_to_canonical(tree), handle, indent=2)


def load_tree(path: str) -> DecisionTree:
    with open(path, "r", encoding="utf-8") as handle:
        return tree_from_canonical(json.load(handle))
