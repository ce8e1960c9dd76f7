import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { computeBandWidths, formatMm, renderLayerStack } from "../src/layer-stack.js";
import type { ModelUpdatedEvent, ServerEvent, WallTypeSnapshot } from "../src/protocol.js";

const here = dirname(fileURLToPath(import.meta.url));

function goldenWall(): WallTypeSnapshot {
  const events = JSON.parse(
    readFileSync(join(here, "golden", "ce1_events.json"), "utf8"),
  ) as ServerEvent[];
  const updated = events.find((e): e is ModelUpdatedEvent => e.type === "model_updated");
  return updated!.wall_types[0];
}

/** Deterministic PRNG for the property sweep (mulberry32). */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function assertProportional(thicknesses: number[], totalPx: number): void {
  const widths = computeBandWidths(thicknesses, totalPx);
  const sum = thicknesses.reduce((a, b) => a + b, 0);
  expect(widths.reduce((a, b) => a + b, 0)).toBe(totalPx);
  widths.forEach((width, i) => {
    expect(Number.isInteger(width)).toBe(true);
    const exact = (thicknesses[i] / sum) * totalPx;
    expect(Math.abs(width - exact)).toBeLessThanOrEqual(1);
  });
}

describe("computeBandWidths", () => {
  it("splits [20, 150, 50] exactly when the width divides evenly", () => {
    expect(computeBandWidths([20, 150, 50], 440)).toEqual([40, 300, 100]);
  });

  it("stays within 1 px of proportional for [20, 150, 50] at awkward widths", () => {
    for (const totalPx of [600, 333, 437, 1000, 97]) {
      assertProportional([20, 150, 50], totalPx);
    }
  });

  it("gives a single layer the whole width", () => {
    expect(computeBandWidths([123.4], 600)).toEqual([600]);
  });

  it("handles empty input", () => {
    expect(computeBandWidths([], 600)).toEqual([]);
  });

  it("rejects non-positive thicknesses", () => {
    expect(() => computeBandWidths([10, 0, 5], 600)).toThrow(/positive/);
    expect(() => computeBandWidths([-2], 600)).toThrow(/positive/);
  });

  it("sums to the container and stays within 1 px across random stacks", () => {
    const rand = mulberry32(20260814);
    for (let caseIndex = 0; caseIndex < 200; caseIndex += 1) {
      const count = 1 + Math.floor(rand() * 12);
      const thicknesses = Array.from({ length: count }, () => 0.5 + rand() * 400);
      const totalPx = 50 + Math.floor(rand() * 1150);
      assertProportional(thicknesses, totalPx);
    }
  });
});

describe("formatMm", () => {
  it("drops trailing zeros", () => {
    expect(formatMm(290)).toBe("290 mm");
    expect(formatMm(12.5)).toBe("12.5 mm");
  });

  it("cleans float noise", () => {
    expect(formatMm(183.99999999999997)).toBe("184 mm");
  });
});

describe("renderLayerStack", () => {
  const wall = goldenWall();

  it("renders one band per layer with widths summing to the container", () => {
    const html = renderLayerStack(wall, null, 600);
    const bands = [...html.matchAll(/class="band(?: structure)?"[^>]*style="width:(\d+)px"/g)];
    expect(bands).toHaveLength(4);
    const widths = bands.map((m) => Number(m[1]));
    expect(widths.reduce((a, b) => a + b, 0)).toBe(600);
    const expected = computeBandWidths(wall.layers.map((l) => l.thickness), 600);
    expect(widths).toEqual(expected);
  });

  it("marks the structural layer and labels both faces", () => {
    const html = renderLayerStack(wall);
    expect(html.match(/class="band structure"/g)).toHaveLength(1);
    expect(html).toContain('data-type="Structure"');
    expect(html).toContain(">exterior<");
    expect(html).toContain(">interior<");
    expect(html).toContain("Reinforced Concrete / Structure / 150 mm");
  });

  it("captions the total thickness", () => {
    const html = renderLayerStack(wall);
    expect(html).toContain('<div class="stack-caption">290 mm total</div>');
    expect(html).toContain("RC Exterior Insulated Wall (rev 1)");
  });

  it("flags a non-compliant wall with the failing messages", () => {
    const bad: WallTypeSnapshot = {
      ...wall,
      non_compliant: true,
      total_mm: 130,
      layers: wall.layers.map((l) =>
        l.layer_type === "Structure" ? { ...l, thickness: 90 } : l,
      ),
    };
    const check = {
      overall: false,
      attempt: 5,
      verdicts: [
        {
          rule: "structural_thickness",
          passed: false,
          measured: 90,
          unit: "mm",
          expected: ">= 100 mm",
          message: "structural thickness 90 mm is below the 100 mm minimum",
          severity: "Blocking",
          skipped: false,
        },
      ],
    };
    const html = renderLayerStack(bad, check);
    expect(html).toContain('class="stack-caption failed"');
    expect(html).toContain("non-compliant");
    expect(html).toContain("structural thickness 90 mm is below the 100 mm minimum");
  });
});
