// Projection of engine responses into display rows. Values pass through
// verbatim: the UI never recomputes a metric, it only formats what the
// service returned.

import type { AveragesResponse, EvaluateResponse } from "./types.js";

export interface RelevanceBar {
  label: string;
  value: number; // exactly the engine's relative relevance share
  percentText: string;
}

export function relevanceBars(response: EvaluateResponse): RelevanceBar[] {
  const relevance = response.relevance;
  const bars = [
    { label: "Image", value: relevance.r_image },
    { label: "Question", value: relevance.r_question },
  ];
  if (relevance.has_context) {
    bars.push({ label: "Context", value: relevance.r_context });
  }
  return bars.map((bar) => ({
    ...bar,
    percentText: `${(bar.value * 100).toFixed(1)}%`,
  }));
}

export interface ClusterRow {
  cluster: number;
  probability: number;
  size: number;
  answers: string[];
}

export function clusterTable(response: EvaluateResponse): ClusterRow[] {
  return response.uncertainty.clusters.map((cluster, index) => ({
    cluster: index,
    probability: cluster.probability,
    size: cluster.members.length,
    answers: cluster.texts,
  }));
}

export interface UncertaintySummary {
  entropy: number;
  entropyText: string;
  nClusters: number;
  nSamples: number;
  temperature: number;
}

export function uncertaintySummary(response: EvaluateResponse): UncertaintySummary {
  const u = response.uncertainty;
  return {
    entropy: u.entropy,
    entropyText: u.entropy.toFixed(4),
    nClusters: u.n_clusters,
    nSamples: u.n_samples,
    temperature: u.temperature,
  };
}

/** Hover text showing the dataset-wide means for the evaluated model/task. */
export function averagesHover(
  averages: AveragesResponse,
  modelId: string,
  task: string,
): string {
  const entry = averages.models[modelId]?.[task];
  if (!entry) return "no dataset averages yet (run a benchmark first)";
  return [
    `dataset averages over ${entry.n} records:`,
    `entropy ${entry.entropy_mean.toFixed(4)}`,
    `image ${(entry.r_image_mean * 100).toFixed(1)}%`,
    `question ${(entry.r_question_mean * 100).toFixed(1)}%`,
    `context ${(entry.r_context_mean * 100).toFixed(1)}%`,
  ].join(" ");
}
