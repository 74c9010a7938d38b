import { describe, expect, it } from "vitest";

import { EngineClient } from "../src/api.js";
import { defaultState } from "../src/state.js";
import { sampleEvaluation } from "./helpers.js";

interface Recorded {
  url: string;
  init?: RequestInit;
}

function stubClient(payload: unknown, status = 200) {
  const calls: Recorded[] = [];
  const fetchImpl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new EngineClient("http://engine.test", fetchImpl), calls };
}

describe("EngineClient", () => {
  it("lists samples from the expected path", async () => {
    const { client, calls } = stubClient({ samples: [] });
    await client.listSamples();
    expect(calls[0].url).toBe("http://engine.test/samples");
  });

  it("escapes sample ids", async () => {
    const { client, calls } = stubClient({});
    await client.getSample("weird/id");
    expect(calls[0].url).toBe("http://engine.test/samples/weird%2Fid");
  });

  it("propagates http errors with body text", async () => {
    const { client } = stubClient({ detail: "unknown sample" }, 404);
    await expect(client.listRuns()).rejects.toThrow(/404/);
  });

  it("sends preset evaluations without overrides or noise", async () => {
    const { client, calls } = stubClient(sampleEvaluation());
    await client.evaluate(defaultState("s000"));
    const body = JSON.parse(String(calls[0].init?.body));
    expect(calls[0].url).toBe("http://engine.test/evaluate");
    expect(body.sample_id).toBe("s000");
    expect(body.config_id).toBe("Q+I");
    expect(body.overrides).toBeUndefined();
    expect(body.noise).toBeUndefined();
  });

  it("sends edited text as overrides", async () => {
    const { client, calls } = stubClient(sampleEvaluation());
    const state = { ...defaultState("s000"), editedQuestion: "Changed?", editedContext: "New context." };
    await client.evaluate(state);
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.overrides).toEqual({ question: "Changed?", context: "New context." });
  });

  it("bakes client-side noise into the image instead of the noise block", async () => {
    const { client, calls } = stubClient(sampleEvaluation());
    const state = { ...defaultState("s000"), noiseSigma: 10 };
    await client.evaluate(state, { imageB64: "QUJD" });
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.overrides.image_b64).toBe("QUJD");
    expect(body.noise).toBeUndefined();
  });

  it("asks the engine for noise when no flattened image is supplied", async () => {
    const { client, calls } = stubClient(sampleEvaluation());
    const state = { ...defaultState("s000"), noiseSigma: 7.5, noiseSeed: 3 };
    await client.evaluate(state);
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.noise).toEqual({ sigma: 7.5, seed: 3 });
  });

  it("honors the task option", async () => {
    const { client, calls } = stubClient(sampleEvaluation());
    await client.evaluate(defaultState("s000"), { task: "reasoning" });
    const body = JSON.parse(String(calls[0].init?.body));
    expect(body.task).toBe("reasoning");
  });
});
