import type { EvaluateResponse, ImageBuffer } from "../src/types.js";

export function solidBuffer(
  width: number,
  height: number,
  rgb: [number, number, number] = [40, 80, 120],
): ImageBuffer {
  const data = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < data.length; i += 4) {
    data[i] = rgb[0];
    data[i + 1] = rgb[1];
    data[i + 2] = rgb[2];
    data[i + 3] = 255;
  }
  return { width, height, data };
}

export function checksum(buffer: ImageBuffer): number {
  let hash = 2166136261;
  for (let i = 0; i < buffer.data.length; i++) {
    hash = Math.imul(hash ^ buffer.data[i], 16777619);
  }
  return hash >>> 0;
}

export function sampleEvaluation(): EvaluateResponse {
  return {
    generation: { greedy: "Yes.", samples: ["Yes.", "Yes.", "No."] },
    uncertainty: {
      entropy: 0.6365141682948128,
      n_clusters: 2,
      n_samples: 3,
      temperature: 0.9,
      estimator: "discrete",
      clusters: [
        { members: [0, 1], representative: 0, texts: ["Yes.", "Yes."], probability: 2 / 3 },
        { members: [2], representative: 2, texts: ["No."], probability: 1 / 3 },
      ],
    },
    relevance: {
      r_image: 0.52,
      r_question: 0.31,
      r_context: 0.17,
      raw_mass: { image: 0.4, question: 0.24, context: 0.13, other: 0.23 },
      has_context: true,
    },
    metadata: {
      sample_id: "s000",
      config_id: "Q+I+C-",
      task: "answer",
      model_id: "mock-vlm",
      edited: false,
      noise_sigma: null,
      noise_seed: null,
      default_noise_sigma: 25.0,
      seed: 0,
    },
  };
}
