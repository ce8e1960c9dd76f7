/** Horizontal layer-stack diagram: exterior on the left, widths proportional
 * to thickness. Band widths are integers allocated by largest remainder so
 * they always sum to the container width and each band stays within 1 px of
 * its exact proportional share.
 */

import type { CheckReport, WallTypeSnapshot } from "./protocol.js";
import { escapeHtml } from "./html.js";

export function computeBandWidths(thicknesses: number[], totalPx: number): number[] {
  if (!thicknesses.length) return [];
  if (thicknesses.some((t) => !(t > 0))) {
    throw new Error("layer thicknesses must be positive");
  }
  const sum = thicknesses.reduce((a, b) => a + b, 0);
  const exact = thicknesses.map((t) => (t / sum) * totalPx);
  const floors = exact.map(Math.floor);
  let shortfall = totalPx - floors.reduce((a, b) => a + b, 0);
  const byRemainder = exact
    .map((value, index) => ({ index, remainder: value - Math.floor(value) }))
    .sort((a, b) => b.remainder - a.remainder || a.index - b.index);
  const widths = [...floors];
  for (const { index } of byRemainder) {
    if (shortfall <= 0) break;
    widths[index] += 1;
    shortfall -= 1;
  }
  return widths;
}

export function formatMm(value: number): string {
  return `${Number(value.toFixed(6))} mm`;
}

export function renderLayerStack(
  wall: WallTypeSnapshot,
  check: CheckReport | null = null,
  totalPx = 600,
): string {
  const widths = computeBandWidths(wall.layers.map((l) => l.thickness), totalPx);
  const bands = wall.layers
    .map((layer, i) => {
      const cls = layer.layer_type === "Structure" ? "band structure" : "band";
      const label = `${layer.material} / ${layer.layer_type} / ${formatMm(layer.thickness)}`;
      return (
        `<div class="${cls}" data-type="${escapeHtml(layer.layer_type)}" ` +
        `style="width:${widths[i]}px" title="${escapeHtml(label)}">` +
        `<span class="band-label">${escapeHtml(label)}</span></div>`
      );
    })
    .join("");

  let caption: string;
  if (wall.non_compliant) {
    const failed = (check?.verdicts ?? [])
      .filter((v) => !v.passed)
      .map((v) => escapeHtml(v.message));
    const detail = failed.length ? `: ${failed.join("; ")}` : "";
    caption =
      `<div class="stack-caption failed">${escapeHtml(formatMm(wall.total_mm))}` +
      ` total (non-compliant${detail})</div>`;
  } else {
    caption = `<div class="stack-caption">${escapeHtml(formatMm(wall.total_mm))} total</div>`;
  }

  return (
    `<div class="layer-stack" data-wall="${escapeHtml(wall.id)}">` +
    `<div class="stack-title">${escapeHtml(wall.name)} (rev ${wall.revision})</div>` +
    `<div class="edge-label">exterior</div>` +
    `<div class="bands" style="width:${totalPx}px">${bands}</div>` +
    `<div class="edge-label">interior</div>` +
    caption +
    `</div>`
  );
}
