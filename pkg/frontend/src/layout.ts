/**
 * Deterministic layered layout for canonical trees.
 *
 * Leaves are placed left-to-right in traversal order; each internal node
 * sits centered above its children; depth maps to the vertical axis. The
 * result is a pure function of the document, so the same tree always lays
 * out identically.
 */

import type { CanonicalNode, CanonicalTree, InternalNode } from "./types";

export const NODE_WIDTH = 156;
export const NODE_HEIGHT = 64;
export const H_GAP = 20;
export const V_GAP = 48;
export const MARGIN = 16;

export interface LayoutNode {
  node: CanonicalNode;
  depth: number;
  /** Top-left corner in SVG pixels. */
  x: number;
  y: number;
}

export interface LayoutEdge {
  parent: number;
  child: number;
  side: "left" | "right";
  /** Whether this branch means the displayed condition holds. */
  label: "yes" | "no";
}

export interface TreeLayout {
  rootId: number;
  nodes: LayoutNode[];
  edges: LayoutEdge[];
  byId: Map<number, LayoutNode>;
  width: number;
  height: number;
}

export function isInternal(node: CanonicalNode): node is InternalNode {
  return node.kind === "internal";
}

/** The root is the only node never referenced as a child. */
export function findRootId(doc: CanonicalTree): number {
  const children = new Set<number>();
  for (const node of doc.nodes) {
    if (isInternal(node)) {
      children.add(node.left);
      children.add(node.right);
    }
  }
  for (const node of doc.nodes) {
    if (!children.has(node.id)) return node.id;
  }
  throw new Error("tree document has no root (every node is a child)");
}

/**
 * Branch meaning for an internal node's children.
 *
 * The engine routes `feature <= threshold` to the left. Numeric displays
 * ("age <= 42") therefore put "yes" on the left, while one-hot indicator
 * displays ("gender = female") put "yes" on the right — indicator value 1
 * fails the `<= 0.5` test.
 */
export function branchLabels(display: string): { left: "yes" | "no"; right: "yes" | "no" } {
  return display.includes(" <= ")
    ? { left: "yes", right: "no" }
    : { left: "no", right: "yes" };
}

export function layoutTree(doc: CanonicalTree): TreeLayout {
  const byIdRaw = new Map<number, CanonicalNode>();
  for (const node of doc.nodes) byIdRaw.set(node.id, node);

  const rootId = findRootId(doc);
  const slots = new Map<number, number>(); // abstract x slot per node id
  const depths = new Map<number, number>();
  const edges: LayoutEdge[] = [];
  let nextLeafSlot = 0;
  let maxDepth = 0;

  const place = (id: number, depth: number): number => {
    const node = byIdRaw.get(id);
    if (node === undefined) throw new Error(`node ${id} referenced but missing`);
    depths.set(id, depth);
    maxDepth = Math.max(maxDepth, depth);
    let slot: number;
    if (isInternal(node)) {
      const labels = branchLabels(node.display);
      edges.push({ parent: id, child: node.left, side: "left", label: labels.left });
      edges.push({ parent: id, child: node.right, side: "right", label: labels.right });
      const leftSlot = place(node.left, depth + 1);
      const rightSlot = place(node.right, depth + 1);
      slot = (leftSlot + rightSlot) / 2;
    } else {
      slot = nextLeafSlot++;
    }
    slots.set(id, slot);
    return slot;
  };
  place(rootId, 0);

  if (slots.size !== doc.nodes.length) {
    throw new Error(
      `tree walk visited ${slots.size} nodes but the document lists ${doc.nodes.length}`,
    );
  }

  const nodes: LayoutNode[] = [];
  const byId = new Map<number, LayoutNode>();
  for (const node of doc.nodes) {
    const placed: LayoutNode = {
      node,
      depth: depths.get(node.id)!,
      x: MARGIN + slots.get(node.id)! * (NODE_WIDTH + H_GAP),
      y: MARGIN + depths.get(node.id)! * (NODE_HEIGHT + V_GAP),
    };
    nodes.push(placed);
    byId.set(node.id, placed);
  }

  const leafCount = Math.max(nextLeafSlot, 1);
  return {
    rootId,
    nodes,
    edges,
    byId,
    width: 2 * MARGIN + leafCount * NODE_WIDTH + (leafCount - 1) * H_GAP,
    height: 2 * MARGIN + (maxDepth + 1) * NODE_HEIGHT + maxDepth * V_GAP,
  };
}

/** Ids of `id` and every node below it (the subtree an edit would replace). */
export function subtreeIds(doc: CanonicalTree, id: number): Set<number> {
  const byId = new Map<number, CanonicalNode>();
  for (const node of doc.nodes) byId.set(node.id, node);
  const out = new Set<number>();
  const stack = [id];
  while (stack.length > 0) {
    const current = stack.pop()!;
    const node = byId.get(current);
    if (node === undefined || out.has(current)) continue;
    out.add(current);
    if (isInternal(node)) stack.push(node.left, node.right);
  }
  return out;
}

/** Root-to-node decision path as readable text lines. */
export function pathToNode(doc: CanonicalTree, id: number): string[] {
  const byId = new Map<number, CanonicalNode>();
  const parentOf = new Map<number, { parent: InternalNode; side: "left" | "right" }>();
  for (const node of doc.nodes) byId.set(node.id, node);
  for (const node of doc.nodes) {
    if (isInternal(node)) {
      parentOf.set(node.left, { parent: node, side: "left" });
      parentOf.set(node.right, { parent: node, side: "right" });
    }
  }
  if (!byId.has(id)) throw new Error(`unknown node ${id}`);
  const lines: string[] = [];
  let current = id;
  while (parentOf.has(current)) {
    const { parent, side } = parentOf.get(current)!;
    const labels = branchLabels(parent.display);
    lines.unshift(`${parent.display}? ${labels[side]}`);
    current = parent.id;
  }
  return lines;
}
