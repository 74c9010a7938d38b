// Browser wiring. Thin by design: state lives in an InterventionState, the
// flatten pipeline and all formatting are pure modules, and every metric on
// screen is a verbatim engine value.

import { EngineClient } from "./api.js";
import { decodeBase64Png, encodeBufferAsPngB64, paintBufferTo } from "./browser_codec.js";
import { renderAndFlatten } from "./overlays.js";
import { buildReportBundle, importStateFromReport } from "./report.js";
import { defaultState, deserializeState, serializeState, validateState } from "./state.js";
import { averagesHover, clusterTable, relevanceBars, uncertaintySummary } from "./view.js";
import type {
  AveragesResponse,
  ConfigId,
  EvaluateResponse,
  ImageBuffer,
  InterventionState,
  Overlay,
  SampleDetail,
} from "./types.js";
import { CONFIG_IDS } from "./types.js";

interface AppContext {
  client: EngineClient;
  state: InterventionState;
  sample: SampleDetail | null;
  baseImage: ImageBuffer | null;
  randomImageB64: string | null;
  lastEvaluation: EvaluateResponse | null;
  lastFlattenedB64: string | null;
  averages: AveragesResponse | null;
  pending: boolean;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function download(filename: string, contents: string, mime: string): void {
  const blob = new Blob([contents], { type: mime });
  const anchor = document.createElement("a");
  anchor.href = URL.createObjectURL(blob);
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(anchor.href);
}

async function loadBaseImage(context: AppContext): Promise<void> {
  if (!context.sample) return;
  let b64: string | null;
  switch (context.state.imagePreset) {
    case "annotated":
      b64 = context.sample.annotated_image_b64;
      break;
    case "random":
      b64 = context.randomImageB64 ?? context.sample.image_b64;
      break;
    default:
      b64 = context.sample.image_b64;
  }
  context.baseImage = b64 ? await decodeBase64Png(b64) : null;
  repaintPreview(context);
}

function repaintPreview(context: AppContext): void {
  const canvas = el<HTMLCanvasElement>("preview");
  if (!context.baseImage) {
    canvas.width = 256;
    canvas.height = 64;
    const ctx2d = canvas.getContext("2d");
    ctx2d?.clearRect(0, 0, canvas.width, canvas.height);
    return;
  }
  try {
    const flattened = renderAndFlatten(context.baseImage, context.state);
    paintBufferTo(canvas, flattened);
    el<HTMLParagraphElement>("overlay-errors").textContent = "";
  } catch (error) {
    el<HTMLParagraphElement>("overlay-errors").textContent = String(error);
  }
}

function contextPresetText(context: AppContext): string | null {
  if (!context.sample) return null;
  switch (context.state.contextPreset) {
    case "complementary":
      return context.sample.complementary_context;
    case "contradictory":
      return context.sample.contradictory_context;
    default:
      return null;
  }
}

function syncFormFromState(context: AppContext): void {
  el<HTMLSelectElement>("config").value = context.state.configId;
  el<HTMLSelectElement>("task").value = context.state.task;
  el<HTMLInputElement>("noise-sigma").value = String(context.state.noiseSigma);
  el<HTMLInputElement>("noise-seed").value = String(context.state.noiseSeed);
  el<HTMLInputElement>("n-samples").value = String(context.state.nSamples);
  el<HTMLInputElement>("temperature").value = String(context.state.temperature);
  el<HTMLTextAreaElement>("question").value =
    context.state.editedQuestion ?? context.sample?.question ?? "";
  el<HTMLTextAreaElement>("context-text").value =
    context.state.editedContext ?? contextPresetText(context) ?? "";
  renderOverlayList(context);
}

function renderOverlayList(context: AppContext): void {
  const list = el<HTMLUListElement>("overlay-list");
  list.innerHTML = "";
  context.state.overlays.forEach((overlay, index) => {
    const item = document.createElement("li");
    const description =
      overlay.kind === "box"
        ? `box ${overlay.width}x${overlay.height} @ (${overlay.x}, ${overlay.y})`
        : overlay.kind === "label"
          ? `label "${overlay.text}" @ (${overlay.x}, ${overlay.y})`
          : `arrow (${overlay.x}, ${overlay.y}) -> (${overlay.x2}, ${overlay.y2})`;
    item.textContent = `${description} `;
    const remove = document.createElement("button");
    remove.textContent = "remove";
    remove.onclick = () => {
      context.state.overlays.splice(index, 1);
      renderOverlayList(context);
      repaintPreview(context);
    };
    item.appendChild(remove);
    list.appendChild(item);
  });
}

function renderEvaluation(context: AppContext): void {
  const evaluation = context.lastEvaluation;
  if (!evaluation) return;
  el<HTMLParagraphElement>("generation").textContent = evaluation.generation.greedy;

  const summary = uncertaintySummary(evaluation);
  const entropyNode = el<HTMLSpanElement>("entropy");
  entropyNode.textContent = summary.entropyText;
  const clustersNode = el<HTMLSpanElement>("n-clusters");
  clustersNode.textContent = String(summary.nClusters);
  if (context.averages) {
    const hover = averagesHover(context.averages, evaluation.metadata.model_id,
      evaluation.metadata.task);
    entropyNode.title = hover;
    clustersNode.title = hover;
  }

  const clusterBody = el<HTMLTableSectionElement>("cluster-rows");
  clusterBody.innerHTML = "";
  for (const row of clusterTable(evaluation)) {
    const tr = document.createElement("tr");
    tr.innerHTML = `<td>${row.cluster}</td><td>${row.probability.toFixed(3)}</td>` +
      `<td>${row.size}</td><td></td>`;
    (tr.lastElementChild as HTMLTableCellElement).textContent =
      row.answers.join(" | ");
    clusterBody.appendChild(tr);
  }

  const barsNode = el<HTMLDivElement>("relevance-bars");
  barsNode.innerHTML = "";
  for (const bar of relevanceBars(evaluation)) {
    const rowNode = document.createElement("div");
    rowNode.className = "bar-row";
    const label = document.createElement("span");
    label.textContent = `${bar.label} ${bar.percentText}`;
    if (context.averages) {
      label.title = averagesHover(context.averages, evaluation.metadata.model_id,
        evaluation.metadata.task);
    }
    const track = document.createElement("div");
    track.className = "bar-track";
    const fill = document.createElement("div");
    fill.className = "bar-fill";
    fill.style.width = `${Math.round(bar.value * 100)}%`;
    track.appendChild(fill);
    rowNode.appendChild(label);
    rowNode.appendChild(track);
    barsNode.appendChild(rowNode);
  }
  el<HTMLParagraphElement>("eval-meta").textContent =
    `model ${evaluation.metadata.model_id}, edited=${evaluation.metadata.edited}, ` +
    `noise sigma=${evaluation.metadata.noise_sigma ?? "none"}`;
}

async function runEvaluation(context: AppContext): Promise<void> {
  if (context.pending || !context.sample) return;
  const errors = validateState(context.state, context.baseImage?.width ?? 0,
    context.baseImage?.height ?? 0);
  if (errors.length) {
    el<HTMLParagraphElement>("overlay-errors").textContent = errors.join("; ");
    return;
  }
  context.pending = true;
  const button = el<HTMLButtonElement>("evaluate");
  button.disabled = true;
  try {
    let imageB64: string | null = null;
    const intervened = context.state.overlays.length > 0 ||
      context.state.noiseSigma > 0 || context.state.imagePreset !== "natural";
    if (context.baseImage && intervened) {
      imageB64 = encodeBufferAsPngB64(renderAndFlatten(context.baseImage, context.state));
    }
    const evaluation = await context.client.evaluate(context.state, { imageB64 });
    context.lastEvaluation = evaluation;
    context.lastFlattenedB64 = imageB64 ??
      (context.sample ? context.sample.image_b64 : null);
    try {
      context.averages = await context.client.averages();
    } catch {
      context.averages = null; // hover context is optional
    }
    renderEvaluation(context);
  } catch (error) {
    el<HTMLParagraphElement>("eval-meta").textContent = `evaluation failed: ${String(error)}`;
  } finally {
    context.pending = false;
    button.disabled = false;
  }
}

export async function startApp(baseUrl: string): Promise<AppContext> {
  const context: AppContext = {
    client: new EngineClient(baseUrl),
    state: defaultState(),
    sample: null,
    baseImage: null,
    randomImageB64: null,
    lastEvaluation: null,
    lastFlattenedB64: null,
    averages: null,
    pending: false,
  };

  const configSelect = el<HTMLSelectElement>("config");
  for (const configId of CONFIG_IDS) {
    const option = document.createElement("option");
    option.value = configId;
    option.textContent = configId;
    configSelect.appendChild(option);
  }

  const samples = (await context.client.listSamples()).samples;
  const sampleSelect = el<HTMLSelectElement>("sample");
  for (const sample of samples) {
    const option = document.createElement("option");
    option.value = sample.id;
    option.textContent = `${sample.id}: ${sample.question}`;
    sampleSelect.appendChild(option);
  }

  async function selectSample(sampleId: string): Promise<void> {
    context.sample = await context.client.getSample(sampleId);
    const keepModel = context.state.model;
    context.state = defaultState(sampleId);
    context.state.model = keepModel;
    const others = samples.filter((s) => s.id !== sampleId);
    if (others.length) {
      const pick = others[Math.floor(Math.random() * others.length)];
      context.randomImageB64 = (await context.client.getSample(pick.id)).image_b64;
    }
    syncFormFromState(context);
    await loadBaseImage(context);
  }

  sampleSelect.onchange = () => void selectSample(sampleSelect.value);

  configSelect.onchange = () => {
    context.state.configId = configSelect.value as ConfigId;
    context.state.imagePreset = configSelect.value.includes("IA")
      ? "annotated"
      : context.state.imagePreset === "random" ? "random" : "natural";
    context.state.contextPreset = configSelect.value.includes("C+")
      ? "complementary"
      : configSelect.value.includes("C-") ? "contradictory" : "none";
    syncFormFromState(context);
    void loadBaseImage(context);
  };

  el<HTMLSelectElement>("task").onchange = () => {
    context.state.task = el<HTMLSelectElement>("task").value as "answer" | "reasoning";
  };

  for (const [id, preset] of [["preset-natural", "natural"],
    ["preset-annotated", "annotated"], ["preset-random", "random"]] as const) {
    el<HTMLButtonElement>(id).onclick = () => {
      context.state.imagePreset = preset;
      void loadBaseImage(context);
    };
  }

  el<HTMLButtonElement>("ctx-complementary").onclick = () => {
    context.state.contextPreset = "complementary";
    context.state.editedContext = null;
    syncFormFromState(context);
  };
  el<HTMLButtonElement>("ctx-contradictory").onclick = () => {
    context.state.contextPreset = "contradictory";
    context.state.editedContext = null;
    syncFormFromState(context);
  };
  el<HTMLButtonElement>("ctx-random").onclick = async () => {
    // Random preset: borrow another sample's context as an off-topic edit.
    const others = samples.filter((s) => s.id !== context.state.sampleId);
    if (!others.length) return;
    const pick = others[Math.floor(Math.random() * others.length)];
    const detail = await context.client.getSample(pick.id);
    context.state.contextPreset = "random";
    context.state.editedContext = Math.random() < 0.5
      ? detail.complementary_context
      : detail.contradictory_context;
    syncFormFromState(context);
  };

  el<HTMLInputElement>("noise-sigma").oninput = () => {
    context.state.noiseSigma = Number(el<HTMLInputElement>("noise-sigma").value);
    el<HTMLSpanElement>("noise-sigma-value").textContent =
      String(context.state.noiseSigma);
    repaintPreview(context);
  };
  el<HTMLInputElement>("noise-seed").onchange = () => {
    context.state.noiseSeed = Number(el<HTMLInputElement>("noise-seed").value);
    repaintPreview(context);
  };
  el<HTMLTextAreaElement>("question").onchange = () => {
    const value = el<HTMLTextAreaElement>("question").value;
    context.state.editedQuestion =
      context.sample && value === context.sample.question ? null : value;
  };
  el<HTMLTextAreaElement>("context-text").onchange = () => {
    const value = el<HTMLTextAreaElement>("context-text").value;
    context.state.editedContext =
      value === (contextPresetText(context) ?? "") ? null : value;
  };
  el<HTMLInputElement>("n-samples").onchange = () => {
    context.state.nSamples = Number(el<HTMLInputElement>("n-samples").value);
  };
  el<HTMLInputElement>("temperature").onchange = () => {
    context.state.temperature = Number(el<HTMLInputElement>("temperature").value);
  };

  el<HTMLButtonElement>("add-box").onclick = () => {
    const overlay: Overlay = {
      kind: "box",
      x: Number(el<HTMLInputElement>("ov-x").value),
      y: Number(el<HTMLInputElement>("ov-y").value),
      width: Number(el<HTMLInputElement>("ov-w").value),
      height: Number(el<HTMLInputElement>("ov-h").value),
      color: el<HTMLInputElement>("ov-color").value,
      filled: el<HTMLInputElement>("ov-filled").checked,
    };
    context.state.overlays.push(overlay);
    renderOverlayList(context);
    repaintPreview(context);
  };
  el<HTMLButtonElement>("add-label").onclick = () => {
    context.state.overlays.push({
      kind: "label",
      x: Number(el<HTMLInputElement>("ov-x").value),
      y: Number(el<HTMLInputElement>("ov-y").value),
      text: el<HTMLInputElement>("ov-text").value || "HINT",
      color: el<HTMLInputElement>("ov-color").value,
      scale: 2,
    });
    renderOverlayList(context);
    repaintPreview(context);
  };
  el<HTMLButtonElement>("add-arrow").onclick = () => {
    context.state.overlays.push({
      kind: "arrow",
      x: Number(el<HTMLInputElement>("ov-x").value),
      y: Number(el<HTMLInputElement>("ov-y").value),
      x2: Number(el<HTMLInputElement>("ov-w").value),
      y2: Number(el<HTMLInputElement>("ov-h").value),
      color: el<HTMLInputElement>("ov-color").value,
      thickness: 2,
    });
    renderOverlayList(context);
    repaintPreview(context);
  };

  el<HTMLButtonElement>("evaluate").onclick = () => void runEvaluation(context);

  el<HTMLButtonElement>("export-report").onclick = () => {
    if (!context.lastEvaluation) return;
    const bundle = buildReportBundle(context.state, context.lastEvaluation,
      context.lastFlattenedB64);
    download(`report-${context.state.sampleId}-${Date.now()}.json`, bundle.json,
      "application/json");
    download(`report-${context.state.sampleId}-${Date.now()}.html`, bundle.html,
      "text/html");
  };
  el<HTMLButtonElement>("export-state").onclick = () => {
    download(`state-${context.state.sampleId}.json`, serializeState(context.state),
      "application/json");
  };
  el<HTMLInputElement>("import-state").onchange = async () => {
    const input = el<HTMLInputElement>("import-state");
    const file = input.files?.[0];
    if (!file) return;
    const text = await file.text();
    try {
      context.state = text.includes("report_version")
        ? importStateFromReport(text)
        : deserializeState(text);
    } catch (error) {
      el<HTMLParagraphElement>("overlay-errors").textContent = String(error);
      return;
    }
    if (context.state.sampleId) {
      sampleSelect.value = context.state.sampleId;
      context.sample = await context.client.getSample(context.state.sampleId);
    }
    syncFormFromState(context);
    await loadBaseImage(context);
  };

  if (samples.length) {
    sampleSelect.value = samples[0].id;
    await selectSample(samples[0].id);
  }
  return context;
}
