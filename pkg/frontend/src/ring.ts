// SVG ring charts. Segments are drawn as stroked circles whose dash length
// is the exact fraction of the circumference, so rendered arc length is
// directly proportional to the value.

export interface RingSegment {
  value: number;
  cssClass: string;
}

export interface RingOptions {
  size?: number; // px, square viewBox
  strokeWidth?: number;
}

export function ringGeometry(opts: RingOptions = {}) {
  const size = opts.size ?? 140;
  const strokeWidth = opts.strokeWidth ?? 16;
  const radius = (size - strokeWidth) / 2;
  const circumference = 2 * Math.PI * radius;
  return { size, strokeWidth, radius, circumference };
}

export function renderRing(segments: RingSegment[], opts: RingOptions = {}): string {
  const { size, strokeWidth, radius, circumference } = ringGeometry(opts);
  const total = segments.reduce((sum, s) => sum + s.value, 0);
  const center = size / 2;
  const parts: string[] = [];
  let consumed = 0;
  if (total > 0) {
    for (const segment of segments) {
      const length = (segment.value / total) * circumference;
      if (length <= 0) continue;
      const offset = -(consumed / total) * circumference;
      parts.push(
        `<circle class="ring-seg ${segment.cssClass}" cx="${center}" cy="${center}" r="${radius}" ` +
          `fill="none" stroke-width="${strokeWidth}" ` +
          `stroke-dasharray="${length.toFixed(4)} ${(circumference - length).toFixed(4)}" ` +
          `stroke-dashoffset="${offset.toFixed(4)}"></circle>`,
      );
      consumed += segment.value;
    }
  }
  // rotate so the first segment starts at 12 o'clock
  return (
    `<svg class="ring" viewBox="0 0 ${size} ${size}" width="${size}" height="${size}" role="img">` +
    `<g transform="rotate(-90 ${center} ${center})">` +
    `<circle class="ring-track" cx="${center}" cy="${center}" r="${radius}" fill="none" stroke-width="${strokeWidth}"></circle>` +
    parts.join("") +
    `</g></svg>`
  );
}

/** Single-value ring: `percent` filled, remainder left as track. */
export function renderCompletionRing(percent: number, opts: RingOptions = {}): string {
  const clamped = Math.max(0, Math.min(100, percent));
  return renderRing(
    [
      { value: clamped, cssClass: "ring-seg--done" },
      { value: 100 - clamped, cssClass: "ring-seg--rest" },
    ],
    opts,
  );
}
