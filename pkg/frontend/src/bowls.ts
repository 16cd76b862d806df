import type { SeverityLevel } from "./types.js";

// One glyph per bowl, straight from the payload's 100-cell allocation.
// The grid is 10x10 (positions read row by row, worst severity first, as
// the server orders them).

const BOWL_PATH =
  "M2 7 Q2 13 8 14 L8 16 L16 16 L16 14 Q22 13 22 7 Z";

function bowlGlyph(level: SeverityLevel): string {
  return (
    `<span class="bowl bowl--${level}" role="img" aria-label="${level}">` +
    `<svg viewBox="0 0 24 20" aria-hidden="true"><path d="${BOWL_PATH}"></path></svg>` +
    `</span>`
  );
}

export function renderBowlGrid(bowls: SeverityLevel[], columns = 10): string {
  if (bowls.length === 0) {
    return `<p class="bowls-empty">No meals observed yet today.</p>`;
  }
  const rows: string[] = [];
  for (let start = 0; start < bowls.length; start += columns) {
    const cells = bowls.slice(start, start + columns).map(bowlGlyph).join("");
    rows.push(`<div class="bowl-row">${cells}</div>`);
  }
  return `<div class="bowl-grid" data-bowl-count="${bowls.length}">${rows.join("")}</div>`;
}
