// Mirrors the versioned map_bundle.json schema (snake_case as on disk).

export const SUPPORTED_SCHEMA_VERSION = 1;

export const FEATURE_NAMES = [
  "bpm",
  "phase_space",
  "channel_correlation",
  "crest_factor",
] as const;

export type FeatureName = (typeof FEATURE_NAMES)[number];

export interface TrackFeatures {
  bpm: number;
  phase_space: number;
  channel_correlation: number;
  crest_factor: number;
}

export interface BundleTrack {
  track_id: string;
  title: string;
  artist: string;
  nation: "G" | "U";
  year: number;
  style: string;
  unit_x: number;
  unit_y: number;
  features: TrackFeatures;
}

export interface SomGridData {
  width: number;
  height: number;
  dim: number;
  codebook: number[][]; // row-major, length width*height
}

export interface MapBundle {
  schema_version: number;
  feature_names: string[];
  som: {
    grid: SomGridData;
    u_matrix: number[][]; // [height][width]
    component_planes: Record<FeatureName, number[][]>;
  };
  normalization: { means: number[]; stds: number[] };
  tracks: BundleTrack[];
}

export type LayerId = "u_matrix" | FeatureName;

export const LAYERS: LayerId[] = ["u_matrix", ...FEATURE_NAMES];

/** What the user currently looks at; filtering is a pure function of this. */
export interface ViewState {
  activeLayer: LayerId;
  /** Tracks are visible when their nation is in the set. */
  nationFilter: Set<string>;
  /** Inclusive year window; in cumulative mode only `max` applies. */
  yearRange: { min: number; max: number };
  cumulative: boolean;
  /** Tracks are visible when their style tag is in the set. */
  styleFilter: Set<string>;
  hoveredTrack: string | null;
}

/** Initial state: everything visible, U-matrix layer. */
export function defaultViewState(bundle: MapBundle): ViewState {
  const years = bundle.tracks.map((t) => t.year);
  return {
    activeLayer: "u_matrix",
    nationFilter: new Set(bundle.tracks.map((t) => t.nation)),
    yearRange: {
      min: years.length ? Math.min(...years) : 0,
      max: years.length ? Math.max(...years) : 0,
    },
    cumulative: false,
    styleFilter: new Set(bundle.tracks.map((t) => t.style)),
    hoveredTrack: null,
  };
}
