import { describe, expect, it } from "vitest";

import { validateBundle } from "../src/validate";
import { buildBundle } from "./fixtures";

describe("bundle validation", () => {
  it("accepts a well-formed bundle", () => {
    const result = validateBundle(buildBundle(50));
    expect(result.ok).toBe(true);
  });

  it("rejects unsupported schema versions without throwing", () => {
    const bundle = buildBundle(5) as unknown as Record<string, unknown>;
    bundle.schema_version = 2;
    const result = validateBundle(bundle);
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.error).toContain("schema_version");
  });

  it("rejects garbage inputs gracefully", () => {
    for (const junk of [null, 42, "bundle", [], {}, { schema_version: 1 }]) {
      const result = validateBundle(junk);
      expect(result.ok).toBe(false);
    }
  });

  it("rejects tracks with out-of-grid coordinates", () => {
    const bundle = buildBundle(10);
    bundle.tracks[3].unit_x = bundle.som.grid.width; // one past the edge
    const result = validateBundle(bundle);
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.error).toContain("unit outside grid");
  });

  it("rejects a misshaped u_matrix", () => {
    const bundle = buildBundle(10);
    bundle.som.u_matrix = bundle.som.u_matrix.slice(1);
    const result = validateBundle(bundle);
    expect(result.ok).toBe(false);
    if (!result.ok) expect(result.error).toContain("u_matrix");
  });

  it("rejects a bad nation tag", () => {
    const bundle = buildBundle(10);
    (bundle.tracks[0] as { nation: string }).nation = "X";
    expect(validateBundle(bundle).ok).toBe(false);
  });
});
