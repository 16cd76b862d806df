import type { ScoreTriple } from "./types.js";

// Client-side guard for the three completion sliders. The server validates
// again; this just stops bad input before it costs an upload.

export function clampScore(raw: number): number {
  if (Number.isNaN(raw)) return 0;
  return Math.max(0, Math.min(100, Math.round(raw)));
}

export function scoreErrors(scores: ScoreTriple): string[] {
  const errors: string[] = [];
  for (const key of ["rice", "meat", "vegetables"] as const) {
    const value = scores[key];
    if (!Number.isInteger(value) || value < 0 || value > 100) {
      errors.push(`${key} score must be a whole number between 0 and 100`);
    }
  }
  return errors;
}
