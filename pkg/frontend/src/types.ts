/**
 * Wire types for the fairsteer HTTP API.
 *
 * These mirror the JSON payloads the service emits; the UI never computes
 * model or tree logic itself, so everything displayed traces back to one
 * of these shapes.
 */

// -- canonical decision tree (GET /sessions/{id}/tree) ------------------------

export interface TreeParams {
  max_depth: number;
  min_samples_leaf: number;
  criterion: string;
}

export interface LeafNode {
  id: number;
  kind: "leaf";
  /** Per-class sample counts for the samples routed to this node. */
  histogram: number[];
  /** Total samples routed here. */
  n: number;
  /** Index into class_names. */
  predicted: number;
}

export interface InternalNode {
  id: number;
  kind: "internal";
  histogram: number[];
  n: number;
  predicted: number;
  /** Column index of the tested feature. */
  feature: number;
  /**
   * Human-readable test. One-hot indicator columns render as the bare
   * name ("gender = female"); numeric columns as "age <= 42". The left
   * child receives samples with feature value <= threshold, so for a
   * one-hot display the LEFT branch is the "no" side.
   */
  display: string;
  threshold: number;
  /** Node id of the left child (feature <= threshold). */
  left: number;
  /** Node id of the right child. */
  right: number;
}

export type CanonicalNode = LeafNode | InternalNode;

export interface CanonicalTree {
  version: number;
  params: TreeParams;
  class_names: string[];
  feature_names: string[];
  next_node_id: number;
  /** Preorder array; every node appears exactly once. */
  nodes: CanonicalNode[];
}

// -- edit actions (POST /sessions/{id}/iterate) --------------------------------

export interface RemoveAction {
  type: "remove";
  node_id: number;
}

export interface RetrainExcludingAction {
  type: "retrain_excluding";
  node_id: number;
  excluded_attributes: string[];
}

export type EditAction = RemoveAction | RetrainExcludingAction;

// -- metrics (GET /sessions/{id}/metrics) --------------------------------------

export interface ParityProbe {
  attribute: string;
  groups: string[];
  target_class: string;
}

export interface ParityEntry {
  probe: ParityProbe;
  group_rates: number[];
  gap: number;
}

export interface MetricsRow {
  iteration: number;
  accuracy: number;
  macro_precision: number;
  macro_recall: number;
  macro_f1: number;
  per_class_support: Record<string, number>;
  fidelity: number;
  parity: ParityEntry[];
}

export interface MetricsPayload {
  iteration: number;
  history: MetricsRow[];
}

// -- jobs (202 responses + GET /jobs/{id}) --------------------------------------

export type JobStatus = "pending" | "running" | "done" | "failed";

export interface JobProgress {
  epoch?: number;
  epochs?: number;
  loss?: number;
  /** Set by iterate jobs once relabeling is done. */
  relabeled?: number;
  total?: number;
}

export interface JobPayload {
  job_id: string;
  session_id: string;
  kind: string;
  status: JobStatus;
  progress: JobProgress;
  error: { error: string; detail: string } | null;
}

export interface JobHandle {
  job_id: string;
  status: JobStatus;
}

// -- everything else -------------------------------------------------------------

export interface NodeSample {
  case_id: string;
  prefix_length: number;
  model_label: string;
  original_label: string;
}

export interface NodeSamplesPayload {
  node_id: number;
  count: number;
  samples: NodeSample[];
}

export interface LogReport {
  num_traces: number;
  num_events: number;
  activities: string[];
  warnings?: string[];
  ground_truth_rates?: Record<string, number> | null;
}

export interface SimulateRequest {
  model?: string | object;
  female_refusal?: number;
  male_refusal?: number;
  num_cases?: number;
  seed?: number;
}

export interface ProbeRequest {
  attribute: string;
  groups: [string, string];
  target_class: string;
}

export interface TrainRequest {
  window?: number;
  attributes?: string[];
  hidden_layers?: number[];
  epochs?: number;
  batch_size?: number;
  learning_rate?: number;
  seed?: number;
  shuffle?: boolean;
  class_weighting?: boolean;
  max_depth?: number;
  min_samples_leaf?: number;
  criterion?: string;
  probes?: ProbeRequest[];
}

export interface ApiErrorBody {
  error: string;
  detail: string;
}
