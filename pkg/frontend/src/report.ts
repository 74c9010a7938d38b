// Downloadable report bundle: machine-readable JSON plus a standalone HTML
// page carrying the image, texts, model setup, hyperparameters, and every
// computed metric exactly as the engine returned them.

import { serializeState, deserializeState } from "./state.js";
import { clusterTable, relevanceBars, uncertaintySummary } from "./view.js";
import type { EvaluateResponse, InterventionState } from "./types.js";

export interface ReportBundle {
  json: string;
  html: string;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function buildReportBundle(
  state: InterventionState,
  evaluation: EvaluateResponse,
  flattenedImageB64: string | null,
): ReportBundle {
  const payload = {
    report_version: 1,
    state: JSON.parse(serializeState(state)),
    evaluation,
    flattened_image_b64: flattenedImageB64,
  };
  const json = JSON.stringify(payload, null, 2);

  const summary = uncertaintySummary(evaluation);
  const bars = relevanceBars(evaluation)
    .map(
      (bar) =>
        `<tr><td>${bar.label}</td><td>${bar.value}</td><td>${bar.percentText}</td></tr>`,
    )
    .join("");
  const clusters = clusterTable(evaluation)
    .map(
      (row) =>
        `<tr><td>${row.cluster}</td><td>${row.probability}</td>` +
        `<td>${row.size}</td><td>${row.answers.map(escapeHtml).join("<br>")}</td></tr>`,
    )
    .join("");
  const image = flattenedImageB64
    ? `<img alt="evaluated image" src="data:image/png;base64,${flattenedImageB64}">`
    : "<p>(no image: question-only input)</p>";

  const html = `<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Intervention report: ${escapeHtml(state.sampleId)} / ${escapeHtml(state.configId)}</title>
<style>
body { font-family: system-ui, sans-serif; margin: 2rem; max-width: 60rem; }
table { border-collapse: collapse; margin: 0.5rem 0 1.5rem; }
td, th { border: 1px solid #999; padding: 0.3rem 0.6rem; text-align: left; }
img { max-width: 24rem; border: 1px solid #999; }
</style>
</head>
<body>
<h1>Intervention report</h1>
<table>
  <tr><th>Sample</th><td>${escapeHtml(state.sampleId)}</td></tr>
  <tr><th>Configuration</th><td>${escapeHtml(state.configId)}</td></tr>
  <tr><th>Task</th><td>${escapeHtml(evaluation.metadata.task)}</td></tr>
  <tr><th>Model</th><td>${escapeHtml(evaluation.metadata.model_id)} (${escapeHtml(state.quantization)})</td></tr>
  <tr><th>Samples / temperature</th><td>${summary.nSamples} @ ${summary.temperature}</td></tr>
  <tr><th>Noise</th><td>sigma ${state.noiseSigma}, seed ${state.noiseSeed}</td></tr>
  <tr><th>Edited</th><td>${evaluation.metadata.edited}</td></tr>
</table>
<h2>Input</h2>
${image}
<p><strong>Question:</strong> ${escapeHtml(state.editedQuestion ?? "(preset)")}</p>
<p><strong>Context:</strong> ${escapeHtml(state.editedContext ?? "(preset)")}</p>
<h2>Generation</h2>
<p>${escapeHtml(evaluation.generation.greedy)}</p>
<h2>Uncertainty</h2>
<p>Semantic entropy <strong>${summary.entropyText}</strong> over ${summary.nClusters} clusters (${evaluation.uncertainty.estimator} estimator).</p>
<table><tr><th>Cluster</th><th>Probability</th><th>Size</th><th>Answers</th></tr>${clusters}</table>
<h2>Attention relevance</h2>
<table><tr><th>Input</th><th>Share</th><th>Percent</th></tr>${bars}</table>
</body>
</html>
`;
  return { json, html };
}

export function importStateFromReport(json: string): InterventionState {
  const parsed = JSON.parse(json) as { report_version?: number; state?: unknown };
  if (parsed.report_version !== 1 || parsed.state === undefined) {
    throw new Error("not a workbench report bundle");
  }
  return deserializeState(JSON.stringify(parsed.state));
}
