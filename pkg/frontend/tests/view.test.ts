import { describe, expect, it } from "vitest";

import { averagesHover, clusterTable, relevanceBars, uncertaintySummary } from "../src/view.js";
import { sampleEvaluation } from "./helpers.js";

describe("view projections stay verbatim", () => {
  it("relevance bars expose the engine values unchanged", () => {
    const evaluation = sampleEvaluation();
    const bars = relevanceBars(evaluation);
    expect(bars.map((b) => b.value)).toEqual([
      evaluation.relevance.r_image,
      evaluation.relevance.r_question,
      evaluation.relevance.r_context,
    ]);
  });

  it("omits the context bar when the record has no context", () => {
    const evaluation = sampleEvaluation();
    evaluation.relevance.has_context = false;
    expect(relevanceBars(evaluation).map((b) => b.label)).toEqual(["Image", "Question"]);
  });

  it("cluster table mirrors members and probabilities", () => {
    const rows = clusterTable(sampleEvaluation());
    expect(rows).toHaveLength(2);
    expect(rows[0].size).toBe(2);
    expect(rows[0].probability).toBeCloseTo(2 / 3, 12);
    expect(rows[1].answers).toEqual(["No."]);
  });

  it("uncertainty summary carries the raw entropy", () => {
    const evaluation = sampleEvaluation();
    const summary = uncertaintySummary(evaluation);
    expect(summary.entropy).toBe(evaluation.uncertainty.entropy);
    expect(summary.nClusters).toBe(2);
  });

  it("averages hover formats dataset means and falls back gracefully", () => {
    const averages = {
      models: {
        "mock-vlm": {
          answer: {
            entropy_mean: 0.31, r_image_mean: 0.5, r_question_mean: 0.3,
            r_context_mean: 0.2, n: 70,
          },
        },
      },
    };
    expect(averagesHover(averages, "mock-vlm", "answer")).toMatch(/70 records/);
    expect(averagesHover(averages, "mock-vlm", "reasoning")).toMatch(/no dataset averages/);
    expect(averagesHover(averages, "other", "answer")).toMatch(/no dataset averages/);
  });
});
