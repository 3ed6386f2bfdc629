import { colormap, NATION_COLORS } from "./colormap";
import { jitterFor } from "./jitter";
import { BundleTrack, LayerId, MapBundle } from "./types";

export interface Marker {
  track: BundleTrack;
  px: number;
  py: number;
}

export interface RenderResult {
  markers: Marker[];
  cellSize: number;
}

function layerMatrix(bundle: MapBundle, layer: LayerId): number[][] {
  if (layer === "u_matrix") return bundle.som.u_matrix;
  return bundle.som.component_planes[layer];
}

/**
 * Draw heatmap plus visible track markers; returns marker screen positions
 * for hover lookup. Positions depend only on (bundle, layer, canvas size),
 * so a reloaded bundle renders identically.
 */
export function renderMap(
  ctx: CanvasRenderingContext2D,
  bundle: MapBundle,
  layer: LayerId,
  visible: BundleTrack[],
  hovered: string | null,
): RenderResult {
  const { width, height } = bundle.som.grid;
  const cw = ctx.canvas.width;
  const ch = ctx.canvas.height;
  const cell = Math.min(cw / width, ch / height);

  const matrix = layerMatrix(bundle, layer);
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of matrix) {
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  const span = hi - lo || 1;

  ctx.clearRect(0, 0, cw, ch);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      ctx.fillStyle = colormap((matrix[y][x] - lo) / span);
      ctx.fillRect(x * cell, y * cell, Math.ceil(cell), Math.ceil(cell));
    }
  }

  const markers: Marker[] = [];
  for (const track of visible) {
    const { dx, dy } = jitterFor(track.track_id);
    const px = (track.unit_x + 0.5 + dx) * cell;
    const py = (track.unit_y + 0.5 + dy) * cell;
    markers.push({ track, px, py });
  }

  const radius = Math.max(1.2, cell * 0.06);
  ctx.globalAlpha = 0.85;
  for (const m of markers) {
    ctx.fillStyle = NATION_COLORS[m.track.nation] ?? "#ffffff";
    ctx.beginPath();
    ctx.arc(m.px, m.py, radius, 0, Math.PI * 2);
    ctx.fill();
  }
  ctx.globalAlpha = 1.0;

  if (hovered !== null) {
    const m = markers.find((mk) => mk.track.track_id === hovered);
    if (m) {
      ctx.strokeStyle = "#ffffff";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      ctx.arc(m.px, m.py, radius + 2.5, 0, Math.PI * 2);
      ctx.stroke();
    }
  }
  return { markers, cellSize: cell };
}

/** Nearest marker within `maxDistance` pixels of (px, py), or null. */
export function markerAt(
  markers: Marker[],
  px: number,
  py: number,
  maxDistance: number,
): Marker | null {
  let best: Marker | null = null;
  let bestD = maxDistance * maxDistance;
  for (const m of markers) {
    const d = (m.px - px) ** 2 + (m.py - py) ** 2;
    if (d <= bestD) {
      bestD = d;
      best = m;
    }
  }
  return best;
}
