import { describe, expect, it } from "vitest";

import { buildReportBundle, importStateFromReport } from "../src/report.js";
import { defaultState } from "../src/state.js";
import { sampleEvaluation } from "./helpers.js";

describe("report bundle", () => {
  it("json bundle round-trips the intervention state", () => {
    const state = {
      ...defaultState("s000"),
      configId: "Q+I+C-" as const,
      noiseSigma: 14,
      overlays: [{ kind: "label" as const, x: 1, y: 1, text: "HOT", color: "#ff0000", scale: 2 }],
    };
    const bundle = buildReportBundle(state, sampleEvaluation(), "QUJD");
    expect(importStateFromReport(bundle.json)).toEqual(state);
  });

  it("json bundle embeds the evaluation verbatim", () => {
    const evaluation = sampleEvaluation();
    const bundle = buildReportBundle(defaultState("s000"), evaluation, null);
    const parsed = JSON.parse(bundle.json);
    expect(parsed.evaluation).toEqual(evaluation);
    expect(parsed.flattened_image_b64).toBeNull();
  });

  it("html report carries the exact metric values and setup", () => {
    const evaluation = sampleEvaluation();
    const state = { ...defaultState("s000"), quantization: "4bit" };
    const bundle = buildReportBundle(state, evaluation, "QUJD");
    expect(bundle.html).toContain(evaluation.uncertainty.entropy.toFixed(4));
    expect(bundle.html).toContain(String(evaluation.relevance.r_image));
    expect(bundle.html).toContain("mock-vlm (4bit)");
    expect(bundle.html).toContain("data:image/png;base64,QUJD");
    expect(bundle.html).toContain("Yes.");
  });

  it("html escapes user text", () => {
    const state = { ...defaultState("s000"), editedQuestion: "<script>alert(1)</script>" };
    const bundle = buildReportBundle(state, sampleEvaluation(), null);
    expect(bundle.html).not.toContain("<script>alert");
    expect(bundle.html).toContain("&lt;script&gt;");
  });

  it("rejects non-report json on import", () => {
    expect(() => importStateFromReport("{}")).toThrow(/report bundle/);
  });
});
