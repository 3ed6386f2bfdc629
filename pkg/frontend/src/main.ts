import { visibleTracks, styleVocabulary, yearBounds } from "./filters";
import { detailFor, inspectUnit, TrackDetail, UnitDetail } from "./panel";
import { markerAt, Marker, renderMap } from "./render";
import { defaultViewState, LAYERS, MapBundle, ViewState } from "./types";
import { validateBundle } from "./validate";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner")!;
const counter = document.getElementById("counter")!;
const panel = document.getElementById("panel")!;
const layerBox = document.getElementById("layers")!;
const nationBox = document.getElementById("nations")!;
const styleBox = document.getElementById("styles")!;
const yearMinInput = document.getElementById("year-min") as HTMLInputElement;
const yearMaxInput = document.getElementById("year-max") as HTMLInputElement;
const yearLabel = document.getElementById("year-label")!;
const cumulativeInput = document.getElementById("cumulative") as HTMLInputElement;
const animateButton = document.getElementById("animate") as HTMLButtonElement;
const fileInput = document.getElementById("bundle-file") as HTMLInputElement;

let bundle: MapBundle | null = null;
let view: ViewState | null = null;
let markers: Marker[] = [];
let animationTimer: number | null = null;

function showBanner(message: string) {
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearBanner() {
  banner.classList.add("hidden");
}

function redraw() {
  if (!bundle || !view) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    counter.textContent = "0/0";
    return;
  }
  const visible = visibleTracks(bundle, view);
  markers = renderMap(ctx, bundle, view.activeLayer, visible, view.hoveredTrack).markers;
  counter.textContent = `${visible.length}/${bundle.tracks.length}`;
}

function renderPanel(detail: TrackDetail | UnitDetail | null) {
  if (!detail) {
    panel.innerHTML = "<em>hover a marker or click a unit</em>";
    return;
  }
  const rows =
    detail.kind === "track"
      ? [
          `<h3>${escapeHtml(detail.title)}</h3>`,
          `<p>${escapeHtml(detail.artist)}</p>`,
          `<p>${detail.nation === "G" ? "Germany" : "USA"} · ${detail.year} · ${escapeHtml(detail.style || "(no style)")}</p>`,
          `<p>unit (${detail.unit.x}, ${detail.unit.y})</p>`,
          ...detail.features.map((f) => `<p class="kv"><span>${f.label}</span><span>${f.value}</span></p>`),
        ]
      : [
          `<h3>unit (${detail.unit.x}, ${detail.unit.y})</h3>`,
          `<p>codebook vector (normalized units)</p>`,
          ...detail.codebook.map((f) => `<p class="kv"><span>${f.label}</span><span>${f.value}</span></p>`),
        ];
  panel.innerHTML = rows.join("");
}

function escapeHtml(text: string): string {
  return text.replace(/[&<>"']/g, (c) => `&#${c.charCodeAt(0)};`);
}

function rebuildControls() {
  if (!bundle || !view) return;
  layerBox.innerHTML = "";
  for (const layer of LAYERS) {
    const id = `layer-${layer}`;
    const label = document.createElement("label");
    label.innerHTML = `<input type="radio" name="layer" id="${id}" ${
      layer === view.activeLayer ? "checked" : ""
    }> ${layer.replace(/_/g, " ")}`;
    label.querySelector("input")!.addEventListener("change", () => {
      view!.activeLayer = layer;
      redraw();
    });
    layerBox.appendChild(label);
  }

  nationBox.innerHTML = "";
  for (const nation of ["G", "U"]) {
    const label = document.createElement("label");
    label.innerHTML = `<input type="checkbox" checked> ${nation === "G" ? "Germany" : "USA"}`;
    label.querySelector("input")!.addEventListener("change", (ev) => {
      const on = (ev.target as HTMLInputElement).checked;
      if (on) view!.nationFilter.add(nation);
      else view!.nationFilter.delete(nation);
      redraw();
    });
    nationBox.appendChild(label);
  }

  styleBox.innerHTML = "";
  for (const style of styleVocabulary(bundle)) {
    const label = document.createElement("label");
    label.innerHTML = `<input type="checkbox" checked> ${escapeHtml(style || "(none)")}`;
    label.querySelector("input")!.addEventListener("change", (ev) => {
      const on = (ev.target as HTMLInputElement).checked;
      if (on) view!.styleFilter.add(style);
      else view!.styleFilter.delete(style);
      redraw();
    });
    styleBox.appendChild(label);
  }

  const bounds = yearBounds(bundle);
  yearMinInput.min = yearMaxInput.min = String(bounds.min);
  yearMinInput.max = yearMaxInput.max = String(bounds.max);
  yearMinInput.value = String(bounds.min);
  yearMaxInput.value = String(bounds.max);
  updateYearLabel();
}

function updateYearLabel() {
  if (!view) return;
  yearLabel.textContent = view.cumulative
    ? `≤ ${view.yearRange.max} (cumulative)`
    : `${view.yearRange.min} – ${view.yearRange.max}`;
}

yearMinInput.addEventListener("input", () => {
  if (!view) return;
  view.yearRange.min = Math.min(Number(yearMinInput.value), view.yearRange.max);
  updateYearLabel();
  redraw();
});

yearMaxInput.addEventListener("input", () => {
  if (!view) return;
  view.yearRange.max = Math.max(Number(yearMaxInput.value), view.yearRange.min);
  updateYearLabel();
  redraw();
});

cumulativeInput.addEventListener("change", () => {
  if (!view) return;
  view.cumulative = cumulativeInput.checked;
  yearMinInput.disabled = view.cumulative;
  updateYearLabel();
  redraw();
});

animateButton.addEventListener("click", () => {
  if (!bundle || !view) return;
  if (animationTimer !== null) {
    window.clearInterval(animationTimer);
    animationTimer = null;
    animateButton.textContent = "animate years";
    return;
  }
  const bounds = yearBounds(bundle);
  view.cumulative = true;
  cumulativeInput.checked = true;
  yearMinInput.disabled = true;
  view.yearRange.max = bounds.min;
  animateButton.textContent = "stop";
  animationTimer = window.setInterval(() => {
    if (!view) return;
    view.yearRange.max += 1;
    yearMaxInput.value = String(view.yearRange.max);
    updateYearLabel();
    redraw();
    if (view.yearRange.max >= bounds.max && animationTimer !== null) {
      window.clearInterval(animationTimer);
      animationTimer = null;
      animateButton.textContent = "animate years";
    }
  }, 700);
});

canvas.addEventListener("mousemove", (ev) => {
  if (!bundle || !view) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  const marker = markerAt(markers, px, py, 8);
  const next = marker ? marker.track.track_id : null;
  if (next !== view.hoveredTrack) {
    view.hoveredTrack = next;
    renderPanel(marker ? detailFor(marker.track) : null);
    redraw();
  }
});

canvas.addEventListener("click", (ev) => {
  if (!bundle || !view) return;
  const rect = canvas.getBoundingClientRect();
  const px = ((ev.clientX - rect.left) / rect.width) * canvas.width;
  const py = ((ev.clientY - rect.top) / rect.height) * canvas.height;
  const marker = markerAt(markers, px, py, 8);
  if (marker) {
    renderPanel(detailFor(marker.track));
    return;
  }
  const cell = Math.min(canvas.width / bundle.som.grid.width,
                        canvas.height / bundle.som.grid.height);
  renderPanel(inspectUnit(bundle, Math.floor(px / cell), Math.floor(py / cell)));
});

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) return;
  let parsed: unknown;
  try {
    parsed = JSON.parse(await file.text());
  } catch (err) {
    bundle = null;
    view = null;
    showBanner(`not valid JSON: ${String(err)}`);
    redraw();
    return;
  }
  const result = validateBundle(parsed);
  if (!result.ok) {
    bundle = null;
    view = null;
    showBanner(`schema mismatch: ${result.error}`);
    redraw();
    return;
  }
  clearBanner();
  bundle = result.bundle;
  view = defaultViewState(bundle);
  cumulativeInput.checked = false;
  yearMinInput.disabled = false;
  rebuildControls();
  renderPanel(null);
  redraw();
});

renderPanel(null);
redraw();
