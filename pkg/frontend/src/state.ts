// Intervention state lifecycle: defaults, validation, serialization.

import { validateOverlays } from "./overlays.js";
import type { ConfigId, InterventionState } from "./types.js";
import { CONFIG_IDS } from "./types.js";

export function defaultState(sampleId = ""): InterventionState {
  return {
    version: 1,
    sampleId,
    configId: "Q+I",
    task: "answer",
    imagePreset: "natural",
    contextPreset: "none",
    overlays: [],
    noiseSigma: 0,
    noiseSeed: 1,
    editedQuestion: null,
    editedContext: null,
    model: "mock-vlm",
    quantization: "32bit",
    nSamples: 10,
    temperature: 0.9,
  };
}

export function validateState(
  state: InterventionState,
  imageWidth: number,
  imageHeight: number,
): string[] {
  const errors: string[] = [];
  if (!CONFIG_IDS.includes(state.configId)) {
    errors.push(`unknown configuration ${state.configId}`);
  }
  if (state.noiseSigma < 0) errors.push("noise sigma must be >= 0");
  if (state.nSamples < 1) errors.push("n_samples must be >= 1");
  if (state.nSamples > 1 && state.temperature <= 0) {
    errors.push("temperature must be > 0 when sampling");
  }
  errors.push(...validateOverlays(state.overlays, imageWidth, imageHeight));
  return errors;
}

export function serializeState(state: InterventionState): string {
  return JSON.stringify(state, null, 2);
}

export function deserializeState(payload: string): InterventionState {
  let parsed: unknown;
  try {
    parsed = JSON.parse(payload);
  } catch (error) {
    throw new Error(`state is not valid JSON: ${String(error)}`);
  }
  if (typeof parsed !== "object" || parsed === null) {
    throw new Error("state must be a JSON object");
  }
  const candidate = parsed as Partial<InterventionState>;
  if (candidate.version !== 1) {
    throw new Error(`unsupported state version ${String(candidate.version)}`);
  }
  const base = defaultState();
  const state: InterventionState = { ...base, ...candidate, version: 1 };
  if (!CONFIG_IDS.includes(state.configId as ConfigId)) {
    throw new Error(`unknown configuration ${String(state.configId)}`);
  }
  if (!Array.isArray(state.overlays)) {
    throw new Error("overlays must be a list");
  }
  return state;
}
