// Deterministic within-unit jitter so co-located tracks stay hoverable.
// Seeded by a hash of the track_id: the same bundle renders identically
// on every load.

const FNV_OFFSET = 0x811c9dc5;
const FNV_PRIME = 0x01000193;

export function hash32(text: string): number {
  let h = FNV_OFFSET;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, FNV_PRIME) >>> 0;
  }
  return h >>> 0;
}

/** Maximum displacement from the unit center, in cell units. */
export const JITTER_SPAN = 0.72;

export function jitterFor(trackId: string): { dx: number; dy: number } {
  const hx = hash32(trackId);
  const hy = hash32(trackId + "");
  return {
    dx: (hx / 0xffffffff - 0.5) * JITTER_SPAN,
    dy: (hy / 0xffffffff - 0.5) * JITTER_SPAN,
  };
}
