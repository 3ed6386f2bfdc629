import { FEATURE_NAMES, MapBundle, SUPPORTED_SCHEMA_VERSION } from "./types";

export type ValidationResult =
  | { ok: true; bundle: MapBundle }
  | { ok: false; error: string };

function isMatrix(value: unknown, rows: number, cols: number): boolean {
  return (
    Array.isArray(value) &&
    value.length === rows &&
    value.every(
      (row) =>
        Array.isArray(row) &&
        row.length === cols &&
        row.every((v) => typeof v === "number" && Number.isFinite(v)),
    )
  );
}

/**
 * Structural check of a parsed bundle. Never throws: a malformed file
 * yields an error message for the banner, not a crash.
 */
export function validateBundle(data: unknown): ValidationResult {
  if (typeof data !== "object" || data === null) {
    return { ok: false, error: "bundle is not a JSON object" };
  }
  const bundle = data as Partial<MapBundle>;
  if (bundle.schema_version !== SUPPORTED_SCHEMA_VERSION) {
    return {
      ok: false,
      error: `unsupported schema_version ${String(bundle.schema_version)} ` +
        `(viewer supports ${SUPPORTED_SCHEMA_VERSION})`,
    };
  }
  const som = bundle.som;
  if (!som || typeof som !== "object" || !som.grid) {
    return { ok: false, error: "missing som.grid" };
  }
  const { width, height, codebook } = som.grid;
  if (!Number.isInteger(width) || !Number.isInteger(height) || width < 2 || height < 2) {
    return { ok: false, error: "grid dimensions invalid" };
  }
  if (!Array.isArray(codebook) || codebook.length !== width * height) {
    return { ok: false, error: "codebook length disagrees with grid size" };
  }
  if (!isMatrix(som.u_matrix, height, width)) {
    return { ok: false, error: "u_matrix shape disagrees with grid size" };
  }
  for (const name of FEATURE_NAMES) {
    if (!som.component_planes || !isMatrix(som.component_planes[name], height, width)) {
      return { ok: false, error: `component plane ${name} missing or misshaped` };
    }
  }
  if (!Array.isArray(bundle.tracks)) {
    return { ok: false, error: "tracks is not an array" };
  }
  for (const track of bundle.tracks) {
    if (typeof track !== "object" || track === null) {
      return { ok: false, error: "track entry is not an object" };
    }
    if (typeof track.track_id !== "string" || track.track_id.length === 0) {
      return { ok: false, error: "track without track_id" };
    }
    if (track.nation !== "G" && track.nation !== "U") {
      return { ok: false, error: `track ${track.track_id}: bad nation` };
    }
    if (!Number.isInteger(track.year)) {
      return { ok: false, error: `track ${track.track_id}: bad year` };
    }
    if (
      !Number.isInteger(track.unit_x) || track.unit_x < 0 || track.unit_x >= width ||
      !Number.isInteger(track.unit_y) || track.unit_y < 0 || track.unit_y >= height
    ) {
      return { ok: false, error: `track ${track.track_id}: unit outside grid` };
    }
    const features = track.features;
    if (!features || FEATURE_NAMES.some((f) => typeof features[f] !== "number")) {
      return { ok: false, error: `track ${track.track_id}: incomplete features` };
    }
  }
  return { ok: true, bundle: data as MapBundle };
}
