/**
 * Locally staged edit actions.
 *
 * Edits accumulate here before submission and are inert until the user
 * submits them — abandoning the list never touches server state. The
 * serialized form is exactly the engine's documented edit-action JSON:
 *
 *   {"type": "remove", "node_id": 9}
 *   {"type": "retrain_excluding", "node_id": 0, "excluded_attributes": ["gender"]}
 */

import type { CanonicalNode, CanonicalTree, EditAction } from "./types";
import { isInternal } from "./layout";

function findNode(doc: CanonicalTree, id: number): CanonicalNode {
  const node = doc.nodes.find((n) => n.id === id);
  if (node === undefined) throw new Error(`unknown node ${id}`);
  return node;
}

function requireInternal(doc: CanonicalTree, id: number): void {
  if (!isInternal(findNode(doc, id))) {
    throw new Error(`node ${id} is a leaf; edits target internal nodes`);
  }
}

export class PendingEdits {
  private actions: EditAction[] = [];
  private listeners: Array<() => void> = [];

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get length(): number {
    return this.actions.length;
  }

  list(): readonly EditAction[] {
    return this.actions;
  }

  /** Stage removal of an internal node (its majority child is promoted). */
  stageRemove(doc: CanonicalTree, nodeId: number): void {
    requireInternal(doc, nodeId);
    this.actions.push({ type: "remove", node_id: nodeId });
    this.notify();
  }

  /** Stage re-growing the subtree at `nodeId` without the given attributes. */
  stageRetrainExcluding(
    doc: CanonicalTree,
    nodeId: number,
    excludedAttributes: string[],
  ): void {
    requireInternal(doc, nodeId);
    if (excludedAttributes.length === 0) {
      throw new Error("retrain_excluding needs at least one excluded attribute");
    }
    this.actions.push({
      type: "retrain_excluding",
      node_id: nodeId,
      excluded_attributes: [...excludedAttributes],
    });
    this.notify();
  }

  removeAt(index: number): void {
    if (index < 0 || index >= this.actions.length) {
      throw new Error(`no staged edit at index ${index}`);
    }
    this.actions.splice(index, 1);
    this.notify();
  }

  clear(): void {
    this.actions = [];
    this.notify();
  }

  /** The exact JSON array the iterate endpoint receives. */
  toJSON(): EditAction[] {
    return this.actions.map((action) =>
      action.type === "remove"
        ? { type: "remove", node_id: action.node_id }
        : {
            type: "retrain_excluding",
            node_id: action.node_id,
            excluded_attributes: [...action.excluded_attributes],
          },
    );
  }

  serialize(): string {
    return JSON.stringify(this.toJSON());
  }

  /** One human-readable line per staged action, for the edits panel. */
  summaries(doc: CanonicalTree): string[] {
    return this.actions.map((action) => {
      const node = doc.nodes.find((n) => n.id === action.node_id);
      const what =
        node !== undefined && isInternal(node)
          ? `"${node.display}" (node ${node.id}, n = ${node.n})`
          : `node ${action.node_id}`;
      return action.type === "remove"
        ? `remove ${what}`
        : `retrain ${what} without ${action.excluded_attributes.join(", ")}`;
    });
  }
}
