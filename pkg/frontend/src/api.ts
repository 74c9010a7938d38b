// Typed client for the engine evaluation service. The fetch implementation is
// injectable so tests can stub the transport.

import type {
  AveragesResponse,
  EvaluateResponse,
  InterventionState,
  SampleDetail,
  SampleSummary,
  Task,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface EvaluateOptions {
  imageB64?: string | null; // flattened image, when edited
  task?: Task;
}

export class EngineClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      const body = await response.text();
      throw new Error(`${path} failed (${response.status}): ${body}`);
    }
    return (await response.json()) as T;
  }

  listSamples(): Promise<{ samples: SampleSummary[] }> {
    return this.request("/samples");
  }

  getSample(sampleId: string): Promise<SampleDetail> {
    return this.request(`/samples/${encodeURIComponent(sampleId)}`);
  }

  listRuns(): Promise<{ runs: string[] }> {
    return this.request("/runs");
  }

  getRunReport(runId: string): Promise<unknown> {
    return this.request(`/runs/${encodeURIComponent(runId)}/report`);
  }

  averages(): Promise<AveragesResponse> {
    return this.request("/averages");
  }

  /**
   * Evaluate the current intervention. Edited image/question/context ride in
   * overrides; noise applied client-side during flattening is already baked
   * into imageB64, so the noise block is only sent when the user asks the
   * engine to add its own noise (no flattened image supplied).
   */
  evaluate(state: InterventionState, options: EvaluateOptions = {}): Promise<EvaluateResponse> {
    const overrides: Record<string, string> = {};
    if (options.imageB64) overrides.image_b64 = options.imageB64;
    if (state.editedQuestion !== null) overrides.question = state.editedQuestion;
    if (state.editedContext !== null) overrides.context = state.editedContext;

    const body: Record<string, unknown> = {
      sample_id: state.sampleId,
      config_id: state.configId,
      task: options.task ?? state.task,
      n_samples: state.nSamples,
      temperature: state.temperature,
    };
    if (Object.keys(overrides).length) body.overrides = overrides;
    if (!options.imageB64 && state.noiseSigma > 0) {
      body.noise = { sigma: state.noiseSigma, seed: state.noiseSeed };
    }
    return this.request("/evaluate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }
}
