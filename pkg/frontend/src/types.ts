// Shared types for the intervention workbench. Every metric shown in the UI
// originates from an engine response; nothing here recomputes metrics.

export type ConfigId =
  | "Q"
  | "Q+I"
  | "Q+I+C+"
  | "Q+I+C-"
  | "Q+IA"
  | "Q+IA+C+"
  | "Q+IA+C-";

export const CONFIG_IDS: ConfigId[] = [
  "Q",
  "Q+I",
  "Q+I+C+",
  "Q+I+C-",
  "Q+IA",
  "Q+IA+C+",
  "Q+IA+C-",
];

export type ImagePreset = "natural" | "annotated" | "random";
export type ContextPreset = "complementary" | "contradictory" | "random" | "none";
export type Task = "answer" | "reasoning";

export interface BoxOverlay {
  kind: "box";
  x: number;
  y: number;
  width: number;
  height: number;
  color: string; // #rrggbb
  filled: boolean;
}

export interface LabelOverlay {
  kind: "label";
  x: number;
  y: number;
  text: string;
  color: string;
  scale: number; // integer pixel multiple of the 5x7 glyph grid
}

export interface ArrowOverlay {
  kind: "arrow";
  x: number; // tail
  y: number;
  x2: number; // head
  y2: number;
  color: string;
  thickness: number;
}

export type Overlay = BoxOverlay | LabelOverlay | ArrowOverlay;

export interface InterventionState {
  version: 1;
  sampleId: string;
  configId: ConfigId;
  task: Task;
  imagePreset: ImagePreset;
  contextPreset: ContextPreset;
  overlays: Overlay[];
  noiseSigma: number;
  noiseSeed: number;
  editedQuestion: string | null;
  editedContext: string | null;
  model: string;
  quantization: string;
  nSamples: number;
  temperature: number;
}

// --- engine service wire types (mirror the HTTP API exactly) ---

export interface SampleSummary {
  id: string;
  question: string;
  ground_truth: string;
  tags: string[];
}

export interface SampleDetail extends SampleSummary {
  complementary_context: string;
  contradictory_context: string;
  image_b64: string;
  annotated_image_b64: string;
}

export interface ClusterView {
  members: number[];
  representative: number;
  texts: string[];
  probability: number;
}

export interface EvaluateResponse {
  generation: { greedy: string; samples: string[] };
  uncertainty: {
    entropy: number;
    n_clusters: number;
    n_samples: number;
    temperature: number;
    estimator: string;
    clusters: ClusterView[];
  };
  relevance: {
    r_image: number;
    r_question: number;
    r_context: number;
    raw_mass: Record<string, number>;
    has_context: boolean;
  };
  metadata: {
    sample_id: string;
    config_id: string;
    task: string;
    model_id: string;
    edited: boolean;
    noise_sigma: number | null;
    noise_seed: number | null;
    default_noise_sigma: number;
    seed: number;
  };
}

export interface AveragesResponse {
  models: Record<
    string,
    Record<
      string,
      {
        entropy_mean: number;
        r_image_mean: number;
        r_question_mean: number;
        r_context_mean: number;
        n: number;
      }
    >
  >;
}

export interface ImageBuffer {
  width: number;
  height: number;
  data: Uint8ClampedArray; // RGBA, length = width * height * 4
}
