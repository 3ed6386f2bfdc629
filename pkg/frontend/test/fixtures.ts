// Deterministic synthetic bundle for tests (seeded PRNG, no I/O).

import { BundleTrack, FEATURE_NAMES, MapBundle } from "../src/types";

export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

const G_STYLES = ["house", "trance", "tekkno", "eurodance", "breakbeat",
  "hardtrance", "happy hardcore", "hardcore", "downbeat"];
const U_STYLES = ["garage house", "chicago house", "deep house", "hip house",
  "detroit techno", "acid house", "detroit techno 2nd wave", "hardcore", "downbeat"];

export function buildBundle(nTracks = 9000, width = 30, height = 20): MapBundle {
  const rand = mulberry32(0xc0ffee);
  const tracks: BundleTrack[] = [];
  for (let i = 0; i < nTracks; i++) {
    const nation = rand() < 0.52 ? "G" : "U";
    const styles = nation === "G" ? G_STYLES : U_STYLES;
    tracks.push({
      track_id: `T${String(i).padStart(5, "0")}`,
      title: `Track ${i}`,
      artist: `Artist ${i % 97}`,
      nation,
      year: 1984 + Math.floor(rand() * 11),
      style: styles[Math.floor(rand() * styles.length)],
      unit_x: Math.floor(rand() * width),
      unit_y: Math.floor(rand() * height),
      features: {
        bpm: 90 + rand() * 90,
        phase_space: rand(),
        channel_correlation: rand() * 2 - 1,
        crest_factor: 1 + rand() * 8,
      },
    });
  }
  const matrix = () =>
    Array.from({ length: height }, () =>
      Array.from({ length: width }, () => rand()));
  const codebook = Array.from({ length: width * height }, () =>
    Array.from({ length: 4 }, () => rand() * 2 - 1));
  return {
    schema_version: 1,
    feature_names: [...FEATURE_NAMES],
    som: {
      grid: { width, height, dim: 4, codebook },
      u_matrix: matrix(),
      component_planes: {
        bpm: matrix(),
        phase_space: matrix(),
        channel_correlation: matrix(),
        crest_factor: matrix(),
      },
    },
    normalization: {
      means: [128, 0.45, 0.6, 3.4],
      stds: [14, 0.12, 0.15, 0.8],
    },
    tracks,
  };
}

export function deepFreeze<T>(value: T): T {
  if (value && typeof value === "object") {
    for (const key of Object.keys(value as object)) {
      deepFreeze((value as Record<string, unknown>)[key]);
    }
    Object.freeze(value);
  }
  return value;
}
