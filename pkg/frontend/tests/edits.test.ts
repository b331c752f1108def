import { describe, expect, it, vi } from "vitest";

import { PendingEdits } from "../src/edits";
import { tree7 } from "./helpers";

describe("PendingEdits", () => {
  it("stages removes and retrains in order", () => {
    const edits = new PendingEdits();
    edits.stageRemove(tree7, 1);
    edits.stageRetrainExcluding(tree7, 0, ["gender", "team"]);
    expect(edits.toJSON()).toEqual([
      { type: "remove", node_id: 1 },
      {
        type: "retrain_excluding",
        node_id: 0,
        excluded_attributes: ["gender", "team"],
      },
    ]);
  });

  it("refuses leaves for both action kinds", () => {
    const edits = new PendingEdits();
    expect(() => edits.stageRemove(tree7, 2)).toThrow(/leaf/);
    expect(() => edits.stageRetrainExcluding(tree7, 6, ["gender"])).toThrow(/leaf/);
    expect(edits.length).toBe(0);
  });

  it("refuses unknown nodes and empty attribute lists", () => {
    const edits = new PendingEdits();
    expect(() => edits.stageRemove(tree7, 77)).toThrow(/unknown node/);
    expect(() => edits.stageRetrainExcluding(tree7, 0, [])).toThrow(
      /at least one/,
    );
  });

  it("deleting the first staged edit leaves only the second", () => {
    const edits = new PendingEdits();
    edits.stageRemove(tree7, 1);
    edits.stageRemove(tree7, 4);
    edits.removeAt(0);
    expect(edits.toJSON()).toEqual([{ type: "remove", node_id: 4 }]);
    expect(() => edits.removeAt(5)).toThrow(/no staged edit/);
  });

  it("serializes without recycling internal state", () => {
    const edits = new PendingEdits();
    edits.stageRetrainExcluding(tree7, 0, ["gender"]);
    const first = edits.toJSON();
    (first[0] as { excluded_attributes: string[] }).excluded_attributes.push("x");
    expect(edits.toJSON()).toEqual([
      { type: "retrain_excluding", node_id: 0, excluded_attributes: ["gender"] },
    ]);
  });

  it("summarizes actions with the node's display text", () => {
    const edits = new PendingEdits();
    edits.stageRemove(tree7, 1);
    edits.stageRetrainExcluding(tree7, 0, ["gender"]);
    const lines = edits.summaries(tree7);
    expect(lines[0]).toContain('remove "team = red"');
    expect(lines[0]).toContain("node 1");
    expect(lines[1]).toContain("without gender");
  });

  it("notifies listeners on every mutation", () => {
    const edits = new PendingEdits();
    const listener = vi.fn();
    edits.onChange(listener);
    edits.stageRemove(tree7, 1);
    edits.removeAt(0);
    edits.clear();
    expect(listener).toHaveBeenCalledTimes(3);
  });
});
