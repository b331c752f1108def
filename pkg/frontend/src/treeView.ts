/**
 * SVG rendering of a canonical tree.
 *
 * Every canonical node becomes exactly one `<g data-node-id=…>` element, so
 * the rendered view is lossless: node count and ids map one-to-one to the
 * engine's. Internal nodes show their split test, leaves the predicted
 * class; both carry a class-histogram strip and the routed-sample count.
 */

import {
  NODE_HEIGHT,
  NODE_WIDTH,
  isInternal,
  layoutTree,
} from "./layout";
import type { CanonicalNode, CanonicalTree } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

/** Color cycle for class histogram segments (index = class index). */
export const CLASS_COLORS = [
  "#4e79a7",
  "#f28e2b",
  "#59a14f",
  "#e15759",
  "#b07aa1",
  "#76b7b2",
  "#edc948",
  "#9c755f",
];

export function classColor(index: number): string {
  return CLASS_COLORS[index % CLASS_COLORS.length]!;
}

/**
 * Attribute a split display string tests: "gender = female" → "gender",
 * "age <= 42" → "age". Used to flag nodes touching sensitive attributes.
 */
export function displayAttribute(display: string): string {
  return display.split(" <= ")[0]!.split(" = ")[0]!.trim();
}

/**
 * Structural validation of an incoming tree document. Returns problem
 * descriptions; an empty list means the document is renderable.
 */
export function validateTree(doc: unknown): string[] {
  const problems: string[] = [];
  if (typeof doc !== "object" || doc === null) {
    return ["document is not a JSON object"];
  }
  const d = doc as Record<string, unknown>;
  if (!Array.isArray(d.nodes)) problems.push("missing nodes array");
  if (!Array.isArray(d.class_names)) problems.push("missing class_names");
  if (!Array.isArray(d.feature_names)) problems.push("missing feature_names");
  if (problems.length > 0) return problems;

  const ids = new Set<number>();
  for (const raw of d.nodes as unknown[]) {
    const node = raw as Partial<CanonicalNode> & Record<string, unknown>;
    if (typeof node.id !== "number") {
      problems.push("node without numeric id");
      continue;
    }
    if (ids.has(node.id)) problems.push(`duplicate node id ${node.id}`);
    ids.add(node.id);
    if (node.kind !== "leaf" && node.kind !== "internal") {
      problems.push(`node ${node.id}: kind must be "leaf" or "internal"`);
    }
    if (!Array.isArray(node.histogram)) {
      problems.push(`node ${node.id}: missing histogram`);
    }
    if (typeof node.n !== "number" || typeof node.predicted !== "number") {
      problems.push(`node ${node.id}: missing n/predicted`);
    }
    if (node.kind === "internal") {
      if (typeof node.display !== "string") {
        problems.push(`node ${node.id}: internal node without display`);
      }
      for (const side of ["left", "right"] as const) {
        if (typeof node[side] !== "number") {
          problems.push(`node ${node.id}: internal node without ${side} child`);
        }
      }
    }
  }
  for (const raw of d.nodes as unknown[]) {
    const node = raw as CanonicalNode;
    if (node.kind === "internal") {
      for (const side of ["left", "right"] as const) {
        const child = (node as { left: number; right: number })[side];
        if (typeof child === "number" && !ids.has(child)) {
          problems.push(`node ${node.id}: ${side} child ${child} does not exist`);
        }
      }
    }
  }
  return problems;
}

export interface TreeViewOptions {
  /** Case attributes the user flagged as sensitive at upload time. */
  sensitiveAttributes?: readonly string[];
  /** Called with the node id on click, or null when selection is cleared. */
  onSelect?: (id: number | null) => void;
}

export interface TreeViewModel {
  svg: SVGSVGElement;
  nodeCount: number;
  ids: number[];
  selectedId(): number | null;
  select(id: number | null): void;
  /** Mark `id` and all its descendants as the subtree an edit would replace. */
  highlightSubtree(id: number | null): void;
  nodeElement(id: number): SVGGElement | null;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, String(value));
  }
  return el;
}

function nodeTitle(node: CanonicalNode, doc: CanonicalTree): string {
  return isInternal(node)
    ? `${node.display}?`
    : doc.class_names[node.predicted] ?? `class ${node.predicted}`;
}

function histogramStrip(node: CanonicalNode, width: number): SVGGElement {
  const strip = svgEl("g", { class: "histogram" });
  const total = node.histogram.reduce((a, b) => a + b, 0);
  if (total === 0) return strip;
  let xOffset = 0;
  node.histogram.forEach((count, classIndex) => {
    if (count === 0) return;
    const w = (count / total) * width;
    strip.appendChild(
      svgEl("rect", {
        class: "hist-segment",
        "data-class": classIndex,
        x: xOffset,
        y: 0,
        width: w,
        height: 7,
        fill: classColor(classIndex),
      }),
    );
    xOffset += w;
  });
  return strip;
}

export function renderTree(
  container: HTMLElement,
  doc: CanonicalTree,
  options: TreeViewOptions = {},
): TreeViewModel {
  const layout = layoutTree(doc);
  const sensitive = new Set(options.sensitiveAttributes ?? []);

  const svg = svgEl("svg", {
    class: "tree-svg",
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    width: layout.width,
    height: layout.height,
    role: "tree",
  });

  const edgeGroup = svgEl("g", { class: "edges" });
  for (const edge of layout.edges) {
    const parent = layout.byId.get(edge.parent)!;
    const child = layout.byId.get(edge.child)!;
    const x1 = parent.x + NODE_WIDTH / 2;
    const y1 = parent.y + NODE_HEIGHT;
    const x2 = child.x + NODE_WIDTH / 2;
    const y2 = child.y;
    const group = svgEl("g", {
      class: "edge",
      "data-parent": edge.parent,
      "data-child": edge.child,
    });
    group.appendChild(
      svgEl("path", {
        d: `M ${x1} ${y1} C ${x1} ${y1 + 20}, ${x2} ${y2 - 20}, ${x2} ${y2}`,
        fill: "none",
      }),
    );
    const label = svgEl("text", {
      class: `edge-label ${edge.label}`,
      x: (x1 + x2) / 2 + (edge.side === "left" ? -8 : 8),
      y: (y1 + y2) / 2,
      "text-anchor": edge.side === "left" ? "end" : "start",
    });
    label.textContent = edge.label;
    group.appendChild(label);
    edgeGroup.appendChild(group);
  }
  svg.appendChild(edgeGroup);

  const nodeGroup = svgEl("g", { class: "nodes" });
  const elements = new Map<number, SVGGElement>();
  for (const placed of layout.nodes) {
    const node = placed.node;
    const classes = ["node", node.kind];
    if (isInternal(node) && sensitive.has(displayAttribute(node.display))) {
      classes.push("sensitive");
    }
    const group = svgEl("g", {
      class: classes.join(" "),
      "data-node-id": node.id,
      transform: `translate(${placed.x} ${placed.y})`,
      tabindex: 0,
    }) as SVGGElement;

    group.appendChild(
      svgEl("rect", {
        class: "node-box",
        width: NODE_WIDTH,
        height: NODE_HEIGHT,
        rx: 6,
      }),
    );

    const title = svgEl("text", { class: "node-title", x: 8, y: 18 });
    title.textContent = nodeTitle(node, doc);
    group.appendChild(title);

    const sub = svgEl("text", { class: "node-sub", x: 8, y: 36 });
    sub.textContent = isInternal(node)
      ? `n = ${node.n}`
      : `n = ${node.n} · #${node.id}`;
    group.appendChild(sub);

    const strip = histogramStrip(node, NODE_WIDTH - 16);
    strip.setAttribute("transform", `translate(8 ${NODE_HEIGHT - 15})`);
    group.appendChild(strip);

    nodeGroup.appendChild(group);
    elements.set(node.id, group);
  }
  svg.appendChild(nodeGroup);

  let selected: number | null = null;

  const select = (id: number | null): void => {
    if (selected !== null) elements.get(selected)?.classList.remove("selected");
    selected = id;
    if (id !== null) {
      const el = elements.get(id);
      if (el === undefined) throw new Error(`unknown node ${id}`);
      el.classList.add("selected");
    }
    options.onSelect?.(id);
  };

  const highlightSubtree = (id: number | null): void => {
    for (const el of elements.values()) el.classList.remove("affected");
    if (id === null) return;
    const stack = [id];
    const byId = new Map(doc.nodes.map((n) => [n.id, n]));
    while (stack.length > 0) {
      const current = stack.pop()!;
      elements.get(current)?.classList.add("affected");
      const node = byId.get(current);
      if (node !== undefined && isInternal(node)) {
        stack.push(node.left, node.right);
      }
    }
  };

  for (const [id, el] of elements) {
    el.addEventListener("click", (event) => {
      event.stopPropagation();
      select(id);
    });
  }
  svg.addEventListener("click", () => select(null));

  container.replaceChildren(svg);

  return {
    svg,
    nodeCount: layout.nodes.length,
    ids: layout.nodes.map((p) => p.node.id),
    selectedId: () => selected,
    select,
    highlightSubtree,
    nodeElement: (id: number) => elements.get(id) ?? null,
  };
}
