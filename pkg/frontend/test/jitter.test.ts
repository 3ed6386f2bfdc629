import { describe, expect, it } from "vitest";

import { hash32, JITTER_SPAN, jitterFor } from "../src/jitter";
import { buildBundle } from "./fixtures";

describe("seeded marker jitter", () => {
  it("is deterministic per track id", () => {
    for (const id of ["T00000", "T04242", "some track", ""]) {
      expect(jitterFor(id)).toEqual(jitterFor(id));
    }
  });

  it("stays within its half-cell span", () => {
    const bundle = buildBundle(2000);
    for (const track of bundle.tracks) {
      const { dx, dy } = jitterFor(track.track_id);
      expect(Math.abs(dx)).toBeLessThanOrEqual(JITTER_SPAN / 2);
      expect(Math.abs(dy)).toBeLessThanOrEqual(JITTER_SPAN / 2);
    }
  });

  it("separates co-located tracks", () => {
    const positions = new Set(
      ["a", "b", "c", "d", "e", "f"].map((id) => {
        const { dx, dy } = jitterFor(id);
        return `${dx.toFixed(6)},${dy.toFixed(6)}`;
      }),
    );
    expect(positions.size).toBe(6);
  });

  it("hashes differ between id and its jitter-axis variant", () => {
    expect(hash32("T00001")).not.toBe(hash32("T00001"));
  });
});
