/**
 * Single-page app for steering the review loop.
 *
 * Flow: create a session, load a log (simulate or upload), train, then
 * inspect the distilled tree. Selecting an internal node opens a detail
 * drawer with its histogram, decision path, and routed samples; from there
 * edits are staged locally and submitted as one iterate job. After the job
 * finishes the tree and metrics panels refresh from the server — the UI is
 * a pure view over API payloads and never recomputes engine results.
 */

import { ApiClient, ApiError } from "./api";
import { PendingEdits } from "./edits";
import { isInternal, pathToNode } from "./layout";
import { fmtMetric, renderMetrics } from "./metricsView";
import {
  classColor,
  renderTree,
  validateTree,
  type TreeViewModel,
} from "./treeView";
import type {
  CanonicalTree,
  EditAction,
  JobPayload,
  LogReport,
  TrainRequest,
} from "./types";

const TEMPLATE = `
<header class="topbar">
  <h1>fairsteer</h1>
  <span class="session" data-testid="session-label">no session</span>
  <span class="status" data-testid="status"></span>
</header>
<div class="banner error hidden" data-testid="error-banner"></div>
<div class="banner warn hidden" data-testid="schema-banner"></div>
<main>
  <section class="panel setup">
    <h2>Session</h2>
    <div class="row">
      <button data-testid="new-session">New session</button>
      <label>sensitive attributes
        <input data-testid="sensitive-input" value="gender" />
      </label>
    </div>
    <h3>Log</h3>
    <div class="row">
      <label>cases <input data-testid="sim-cases" type="number" value="1000" /></label>
      <label>seed <input data-testid="sim-seed" type="number" value="42" /></label>
      <label>female refusal <input data-testid="sim-female" type="number" step="0.05" value="0.5" /></label>
      <label>male refusal <input data-testid="sim-male" type="number" step="0.05" value="0.0" /></label>
      <button data-testid="simulate">Simulate</button>
      <label class="upload">or upload XES <input data-testid="upload" type="file" accept=".xes,.xml" /></label>
    </div>
    <h3>Train</h3>
    <div class="row">
      <label>window <input data-testid="train-window" type="number" value="3" /></label>
      <label>attributes <input data-testid="train-attributes" value="gender" /></label>
      <label>hidden layers <input data-testid="train-hidden" value="64,64" /></label>
      <label>epochs <input data-testid="train-epochs" type="number" value="30" /></label>
    </div>
    <div class="row">
      <label>probe attribute <input data-testid="probe-attribute" value="gender" /></label>
      <label>groups <input data-testid="probe-groups" value="female,male" /></label>
      <label>target class <input data-testid="probe-target" value="refuse screening" /></label>
      <button data-testid="train">Train</button>
    </div>
  </section>
  <section class="panel tree">
    <h2>Distilled tree</h2>
    <div class="tree-container" data-testid="tree-container"></div>
  </section>
  <section class="panel detail hidden" data-testid="detail">
    <h2 data-testid="detail-title"></h2>
    <dl>
      <dt>samples</dt><dd data-testid="detail-n"></dd>
      <dt>routed here</dt><dd data-testid="routed-count">–</dd>
    </dl>
    <ul class="histogram-list" data-testid="detail-histogram"></ul>
    <h3>Decision path</h3>
    <ol class="path" data-testid="detail-path"></ol>
    <h3>Routed samples</h3>
    <ul class="samples" data-testid="detail-samples"></ul>
    <div class="row actions">
      <button data-testid="stage-remove">Stage: remove node</button>
      <label>without attributes
        <input data-testid="exclude-input" placeholder="gender" />
      </label>
      <button data-testid="stage-retrain">Stage: retrain subtree</button>
    </div>
  </section>
  <section class="panel edits">
    <h2>Staged edits</h2>
    <ul data-testid="edits-list"></ul>
    <pre class="payload" data-testid="payload-preview"></pre>
    <div class="row">
      <label>fine-tune epochs <input data-testid="iterate-epochs" type="number" value="10" /></label>
      <button data-testid="submit-edits" disabled>Relabel &amp; fine-tune</button>
      <span class="job" data-testid="job-status"></span>
    </div>
  </section>
  <section class="panel metrics">
    <h2>Metrics by iteration</h2>
    <div data-testid="metrics"></div>
    <div class="row">
      <button data-testid="export">Export session</button>
    </div>
  </section>
</main>
`;

export interface AppOptions {
  api?: ApiClient;
  pollIntervalMs?: number;
  sampleLimit?: number;
}

export class App {
  readonly api: ApiClient;
  readonly edits = new PendingEdits();

  private readonly pollIntervalMs: number;
  private readonly sampleLimit: number;
  private sessionId: string | null = null;
  private tree: CanonicalTree | null = null;
  private view: TreeViewModel | null = null;
  private selectedId: number | null = null;
  private jobRunning = false;
  private inflight: Promise<void> = Promise.resolve();

  private readonly el: Record<string, HTMLElement>;

  constructor(
    readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    this.api = options.api ?? new ApiClient();
    this.pollIntervalMs = options.pollIntervalMs ?? 700;
    this.sampleLimit = options.sampleLimit ?? 8;

    root.innerHTML = TEMPLATE;
    const byTestId = (id: string): HTMLElement => {
      const el = root.querySelector<HTMLElement>(`[data-testid="${id}"]`);
      if (el === null) throw new Error(`template is missing [data-testid=${id}]`);
      return el;
    };
    this.el = Object.fromEntries(
      [
        "session-label", "status", "error-banner", "schema-banner",
        "new-session", "sensitive-input",
        "sim-cases", "sim-seed", "sim-female", "sim-male", "simulate", "upload",
        "train-window", "train-attributes", "train-hidden", "train-epochs",
        "probe-attribute", "probe-groups", "probe-target", "train",
        "tree-container",
        "detail", "detail-title", "detail-n", "routed-count",
        "detail-histogram", "detail-path", "detail-samples",
        "stage-remove", "exclude-input", "stage-retrain",
        "edits-list", "payload-preview", "iterate-epochs", "submit-edits",
        "job-status",
        "metrics", "export",
      ].map((id) => [id, byTestId(id)]),
    );

    this.edits.onChange(() => this.renderEdits());
    this.bind();
    this.renderEdits();
  }

  // -- wiring -----------------------------------------------------------------

  private bind(): void {
    const track = (work: () => Promise<unknown>) => {
      this.inflight = this.inflight
        .then(() => work())
        .then(() => undefined)
        .catch((error: unknown) => this.showError(error));
    };

    this.el["new-session"]!.addEventListener("click", () =>
      track(() => this.newSession()),
    );
    this.el["simulate"]!.addEventListener("click", () =>
      track(() =>
        this.simulate({
          num_cases: this.numberInput("sim-cases", 1000),
          seed: this.numberInput("sim-seed", 42),
          female_refusal: this.numberInput("sim-female", 0.5),
          male_refusal: this.numberInput("sim-male", 0.0),
        }),
      ),
    );
    this.el["upload"]!.addEventListener("change", () => {
      const input = this.el["upload"] as HTMLInputElement;
      const file = input.files?.[0];
      if (file !== undefined) track(() => this.uploadLog(file));
    });
    this.el["train"]!.addEventListener("click", () =>
      track(() => this.train(this.trainRequestFromForm())),
    );
    const staged = (work: () => void) => {
      try {
        this.showError(null);
        work();
      } catch (error) {
        this.showError(error); // e.g. retrain staged without any attributes
      }
    };
    this.el["stage-remove"]!.addEventListener("click", () =>
      staged(() => this.stageRemove()),
    );
    this.el["stage-retrain"]!.addEventListener("click", () =>
      staged(() => this.stageRetrain(this.excludedAttributesFromForm())),
    );
    this.el["submit-edits"]!.addEventListener("click", () =>
      track(() => this.submitEdits()),
    );
    this.el["export"]!.addEventListener("click", () =>
      track(() => this.exportSession()),
    );
    this.el["sensitive-input"]!.addEventListener("change", () => {
      if (this.tree !== null) this.renderTreePanel();
    });
  }

  private numberInput(id: string, fallback: number): number {
    const raw = (this.el[id] as HTMLInputElement).value;
    const value = Number(raw);
    return Number.isFinite(value) ? value : fallback;
  }

  private listInput(id: string): string[] {
    return (this.el[id] as HTMLInputElement).value
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
  }

  private trainRequestFromForm(): TrainRequest {
    const groups = this.listInput("probe-groups");
    const attribute = (this.el["probe-attribute"] as HTMLInputElement).value.trim();
    const target = (this.el["probe-target"] as HTMLInputElement).value.trim();
    const request: TrainRequest = {
      window: this.numberInput("train-window", 3),
      attributes: this.listInput("train-attributes"),
      hidden_layers: this.listInput("train-hidden").map(Number),
      epochs: this.numberInput("train-epochs", 30),
    };
    if (attribute !== "" && target !== "" && groups.length === 2) {
      request.probes = [
        { attribute, groups: [groups[0]!, groups[1]!], target_class: target },
      ];
    }
    return request;
  }

  private excludedAttributesFromForm(): string[] {
    return (this.el["exclude-input"] as HTMLInputElement).value
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
  }

  sensitiveAttributes(): string[] {
    return (this.el["sensitive-input"] as HTMLInputElement).value
      .split(",")
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
  }

  /** Settles when every queued UI action has finished. */
  whenIdle(): Promise<void> {
    return this.inflight;
  }

  // -- session lifecycle --------------------------------------------------------

  async newSession(): Promise<string> {
    const { session_id } = await this.api.createSession();
    this.attachSession(session_id);
    this.setStatus("session created — load a log to begin");
    return session_id;
  }

  /** Point the UI at an existing session and pull whatever state it has. */
  async loadSession(sessionId: string): Promise<void> {
    this.attachSession(sessionId);
    await this.refresh();
  }

  private attachSession(sessionId: string): void {
    this.sessionId = sessionId;
    this.tree = null;
    this.view = null;
    this.selectedId = null;
    this.edits.clear();
    this.el["session-label"]!.textContent = `session ${sessionId}`;
    this.el["tree-container"]!.replaceChildren();
    this.el["metrics"]!.replaceChildren();
    this.el["detail"]!.classList.add("hidden");
    this.showError(null);
  }

  private requireSession(): string {
    if (this.sessionId === null) {
      throw new Error("create or load a session first");
    }
    return this.sessionId;
  }

  async simulate(options: {
    num_cases?: number;
    seed?: number;
    female_refusal?: number;
    male_refusal?: number;
  } = {}): Promise<LogReport> {
    const sessionId = this.requireSession();
    const report = await this.api.simulate(sessionId, options);
    this.setStatus(
      `simulated ${report.num_traces} traces (${report.num_events} events)`,
    );
    return report;
  }

  async uploadLog(file: Blob): Promise<LogReport> {
    const sessionId = this.requireSession();
    const report = await this.api.uploadLog(sessionId, file);
    this.setStatus(
      `uploaded ${report.num_traces} traces (${report.num_events} events)`,
    );
    return report;
  }

  async train(request: TrainRequest = {}): Promise<void> {
    const sessionId = this.requireSession();
    this.showError(null);
    const handle = await this.api.train(sessionId, request);
    this.setJobRunning(true);
    try {
      const job = await this.api.waitForJob(handle.job_id, {
        intervalMs: this.pollIntervalMs,
        onProgress: (j) => this.showJobProgress(j),
      });
      if (job.status === "failed") {
        this.showJobFailure(job);
        return;
      }
      this.setStatus("training finished");
      await this.refresh();
    } finally {
      this.setJobRunning(false);
    }
  }

  // -- tree + selection -----------------------------------------------------------

  async refresh(): Promise<void> {
    const sessionId = this.requireSession();
    this.tree = await this.api.getTree(sessionId);
    this.renderTreePanel();
    await this.refreshMetrics();
  }

  async refreshMetrics(): Promise<void> {
    const sessionId = this.requireSession();
    const payload = await this.api.getMetrics(sessionId);
    renderMetrics(this.el["metrics"]!, payload);
  }

  private renderTreePanel(): void {
    if (this.tree === null) return;
    const problems = validateTree(this.tree);
    const banner = this.el["schema-banner"]!;
    if (problems.length > 0) {
      banner.textContent = `tree document failed validation: ${problems.join("; ")}`;
      banner.classList.remove("hidden");
      return;
    }
    banner.classList.add("hidden");
    this.view = renderTree(this.el["tree-container"]!, this.tree, {
      sensitiveAttributes: this.sensitiveAttributes(),
      onSelect: (id) => {
        void this.showDetail(id);
      },
    });
    this.selectedId = null;
    this.renderEdits();
  }

  selectNode(id: number | null): void {
    this.view?.select(id);
  }

  private async showDetail(id: number | null): Promise<void> {
    this.selectedId = id;
    const detail = this.el["detail"]!;
    if (id === null || this.tree === null) {
      detail.classList.add("hidden");
      this.view?.highlightSubtree(null);
      this.renderEdits();
      return;
    }
    const node = this.tree.nodes.find((n) => n.id === id);
    if (node === undefined) return;

    detail.classList.remove("hidden");
    this.view?.highlightSubtree(id);

    const internal = isInternal(node);
    this.el["detail-title"]!.textContent = internal
      ? `node ${node.id}: ${node.display}?`
      : `node ${node.id}: ${this.tree.class_names[node.predicted] ?? "?"} (leaf)`;
    this.el["detail-n"]!.textContent = String(node.n);

    const histogram = this.el["detail-histogram"]!;
    histogram.replaceChildren(
      ...node.histogram.map((count, classIndex) => {
        const li = document.createElement("li");
        const swatch = document.createElement("span");
        swatch.className = "swatch";
        swatch.style.background = classColor(classIndex);
        li.append(
          swatch,
          ` ${this.tree!.class_names[classIndex] ?? classIndex}: ${count}`,
        );
        return li;
      }),
    );

    const path = this.el["detail-path"]!;
    const lines = pathToNode(this.tree, id);
    path.replaceChildren(
      ...(lines.length > 0 ? lines : ["(root)"]).map((line) => {
        const li = document.createElement("li");
        li.textContent = line;
        return li;
      }),
    );

    const removeButton = this.el["stage-remove"] as HTMLButtonElement;
    const retrainButton = this.el["stage-retrain"] as HTMLButtonElement;
    removeButton.disabled = !internal;
    retrainButton.disabled = !internal;

    this.el["routed-count"]!.textContent = "…";
    this.el["detail-samples"]!.replaceChildren();
    try {
      const payload = await this.api.getNodeSamples(
        this.requireSession(),
        id,
        this.sampleLimit,
      );
      if (this.selectedId !== id) return; // selection moved on while fetching
      this.el["routed-count"]!.textContent = String(payload.count);
      this.el["detail-samples"]!.replaceChildren(
        ...payload.samples.map((sample) => {
          const li = document.createElement("li");
          li.textContent =
            `${sample.case_id} (prefix ${sample.prefix_length}): ` +
            `${sample.model_label}` +
            (sample.model_label === sample.original_label
              ? ""
              : ` (was ${sample.original_label})`);
          return li;
        }),
      );
    } catch (error) {
      this.el["routed-count"]!.textContent = "unavailable";
      this.showError(error);
    }
  }

  // -- staged edits ------------------------------------------------------------------

  stageRemove(): void {
    if (this.tree === null || this.selectedId === null) return;
    this.edits.stageRemove(this.tree, this.selectedId);
  }

  stageRetrain(excludedAttributes: string[]): void {
    if (this.tree === null || this.selectedId === null) return;
    this.edits.stageRetrainExcluding(this.tree, this.selectedId, excludedAttributes);
  }

  deleteEdit(index: number): void {
    this.edits.removeAt(index);
  }

  private renderEdits(): void {
    const list = this.el["edits-list"]!;
    const summaries =
      this.tree === null
        ? this.edits.list().map((a) => `${a.type} node ${a.node_id}`)
        : this.edits.summaries(this.tree);
    list.replaceChildren(
      ...summaries.map((summary, index) => {
        const li = document.createElement("li");
        const text = document.createElement("span");
        text.textContent = summary;
        const del = document.createElement("button");
        del.textContent = "remove";
        del.dataset.action = "delete";
        del.addEventListener("click", () => this.deleteEdit(index));
        li.append(text, " ", del);
        return li;
      }),
    );
    this.el["payload-preview"]!.textContent =
      this.edits.length > 0 ? JSON.stringify(this.edits.toJSON(), null, 2) : "";
    this.updateSubmitState();
  }

  private updateSubmitState(): void {
    (this.el["submit-edits"] as HTMLButtonElement).disabled =
      this.edits.length === 0 || this.jobRunning || this.sessionId === null;
  }

  async submitEdits(): Promise<void> {
    const sessionId = this.requireSession();
    if (this.edits.length === 0 || this.jobRunning) return;
    const payload: EditAction[] = this.edits.toJSON();
    const epochs = this.numberInput("iterate-epochs", 10);

    this.showError(null);
    this.setJobRunning(true);
    try {
      const handle = await this.api.iterate(sessionId, payload, { epochs });
      const job = await this.api.waitForJob(handle.job_id, {
        intervalMs: this.pollIntervalMs,
        onProgress: (j) => this.showJobProgress(j),
      });
      if (job.status === "failed") {
        this.showJobFailure(job); // staged edits stay for another attempt
        return;
      }
      const relabeled = job.progress.relabeled;
      const total = job.progress.total;
      this.el["job-status"]!.textContent =
        relabeled !== undefined && total !== undefined
          ? `done — relabeled ${relabeled} of ${total} samples`
          : "done";
      this.edits.clear();
      await this.refresh();
    } catch (error) {
      if (error instanceof ApiError && error.busy) {
        this.el["job-status"]!.textContent = "job in progress — try again shortly";
      }
      this.showError(error); // staged edits untouched
    } finally {
      this.setJobRunning(false);
    }
  }

  async exportSession(): Promise<object> {
    const sessionId = this.requireSession();
    const bundle = await this.api.exportSession(sessionId);
    const text = JSON.stringify(bundle, null, 2);
    if (typeof URL.createObjectURL === "function") {
      const blob = new Blob([text], { type: "application/json" });
      const anchor = document.createElement("a");
      anchor.href = URL.createObjectURL(blob);
      anchor.download = `${sessionId}-export.json`;
      anchor.click();
      URL.revokeObjectURL(anchor.href);
    }
    this.setStatus("export ready");
    return bundle;
  }

  // -- status + errors ------------------------------------------------------------------

  private setStatus(text: string): void {
    this.el["status"]!.textContent = text;
  }

  private setJobRunning(running: boolean): void {
    this.jobRunning = running;
    if (running) this.el["job-status"]!.textContent = "submitting…";
    this.updateSubmitState();
  }

  private showJobProgress(job: JobPayload): void {
    const p = job.progress;
    let text = `${job.kind}: ${job.status}`;
    if (p.epoch !== undefined && p.epochs !== undefined) {
      text = `${job.kind}: epoch ${p.epoch}/${p.epochs}`;
      if (p.loss !== undefined) text += ` · loss ${fmtMetric(p.loss)}`;
    }
    this.el["job-status"]!.textContent = text;
  }

  private showJobFailure(job: JobPayload): void {
    const detail = job.error?.detail ?? "job failed";
    const code = job.error?.error ?? "internal";
    this.el["job-status"]!.textContent = "failed";
    this.showError(new ApiError(500, code, detail));
  }

  private showError(error: unknown): void {
    const banner = this.el["error-banner"]!;
    if (error === null) {
      banner.classList.add("hidden");
      banner.textContent = "";
      return;
    }
    banner.textContent =
      error instanceof ApiError
        ? `${error.code}: ${error.detail}`
        : String(error instanceof Error ? error.message : error);
    banner.classList.remove("hidden");
  }
}

export function mountApp(root: HTMLElement, options: AppOptions = {}): App {
  return new App(root, options);
}
