import { BundleTrack, FEATURE_NAMES, MapBundle } from "./types";

export interface TrackDetail {
  kind: "track";
  track_id: string;
  title: string;
  artist: string;
  nation: string;
  year: number;
  style: string;
  /** display strings; channel correlation already converted to percent */
  features: { label: string; value: string }[];
  unit: { x: number; y: number };
}

export interface UnitDetail {
  kind: "unit";
  unit: { x: number; y: number };
  codebook: { label: string; value: string }[];
}

const LABELS: Record<string, string> = {
  bpm: "bpm",
  phase_space: "phase space",
  channel_correlation: "channel correlation",
  crest_factor: "crest factor",
};

function formatFeature(name: string, value: number): string {
  if (name === "channel_correlation") {
    return `${(value * 100).toFixed(1)} %`; // stored in [-1, 1], shown as percent
  }
  if (name === "bpm") {
    return value.toFixed(1);
  }
  return value.toFixed(3);
}

/** Detail for a hovered/clicked track; null clears the panel. */
export function inspectTrack(bundle: MapBundle, trackId: string): TrackDetail | null {
  const track = bundle.tracks.find((t) => t.track_id === trackId);
  if (!track) return null;
  return detailFor(track);
}

export function detailFor(track: BundleTrack): TrackDetail {
  return {
    kind: "track",
    track_id: track.track_id,
    title: track.title,
    artist: track.artist,
    nation: track.nation,
    year: track.year,
    style: track.style,
    features: FEATURE_NAMES.map((name) => ({
      label: LABELS[name],
      value: formatFeature(name, track.features[name]),
    })),
    unit: { x: track.unit_x, y: track.unit_y },
  };
}

/** Detail for an empty unit: its coordinates and codebook vector. */
export function inspectUnit(bundle: MapBundle, x: number, y: number): UnitDetail | null {
  const { width, height, codebook } = bundle.som.grid;
  if (x < 0 || x >= width || y < 0 || y >= height) return null;
  const vector = codebook[y * width + x];
  return {
    kind: "unit",
    unit: { x, y },
    codebook: FEATURE_NAMES.map((name, i) => ({
      label: LABELS[name],
      value: vector[i].toFixed(3),
    })),
  };
}
