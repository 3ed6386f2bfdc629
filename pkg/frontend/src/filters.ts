import { BundleTrack, MapBundle, ViewState } from "./types";

/**
 * The visible subset: nation, style and year window intersected.
 *
 * Pure function of (bundle, view); never mutates either. In cumulative
 * mode the window is "year <= max", which makes the visible count
 * monotonically non-decreasing as the slider advances.
 */
export function visibleTracks(bundle: MapBundle, view: ViewState): BundleTrack[] {
  const lo = view.cumulative ? -Infinity : view.yearRange.min;
  const hi = view.yearRange.max;
  const out: BundleTrack[] = [];
  for (const track of bundle.tracks) {
    if (track.year < lo || track.year > hi) continue;
    if (!view.nationFilter.has(track.nation)) continue;
    if (!view.styleFilter.has(track.style)) continue;
    out.push(track);
  }
  return out;
}

export function visibleCount(bundle: MapBundle, view: ViewState): number {
  return visibleTracks(bundle, view).length;
}

/** Distinct style tags, sorted, for building the filter widget. */
export function styleVocabulary(bundle: MapBundle): string[] {
  return [...new Set(bundle.tracks.map((t) => t.style))].sort();
}

export function yearBounds(bundle: MapBundle): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const t of bundle.tracks) {
    if (t.year < min) min = t.year;
    if (t.year > max) max = t.year;
  }
  return { min, max };
}
