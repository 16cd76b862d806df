import { describe, expect, it } from "vitest";
import {
  DEFAULT_MAX_BYTES,
  DEFAULT_MAX_EDGE,
  compressImage,
  fitWithinEdge,
  type ImageEncoder,
  type ImageMeasurer,
} from "../src/compress.js";

// Neither jsdom nor node encodes real JPEGs, so the pipeline runs against a
// deterministic encoder model: size scales with pixel count and quality,
// like a real encoder's envelope.
const BYTES_PER_PIXEL_QUALITY = 0.7;

function fakeEncoder(log: Array<{ width: number; height: number; quality: number }>): ImageEncoder {
  return async (_source, width, height, quality) => {
    log.push({ width, height, quality });
    const size = Math.round(width * height * quality * BYTES_PER_PIXEL_QUALITY);
    return new Blob([new Uint8Array(size)], { type: "image/jpeg" });
  };
}

const measure4000x3000: ImageMeasurer = async () => ({ width: 4000, height: 3000 });

function sixMegabyteFixture(): Blob {
  return new Blob([new Uint8Array(6 * 1024 * 1024)], { type: "image/jpeg" });
}

describe("fitWithinEdge", () => {
  it("caps the longest edge and keeps aspect", () => {
    expect(fitWithinEdge({ width: 4000, height: 3000 }, 1600)).toEqual({
      width: 1600,
      height: 1200,
    });
    expect(fitWithinEdge({ width: 3000, height: 4000 }, 1600)).toEqual({
      width: 1200,
      height: 1600,
    });
  });

  it("leaves small images alone", () => {
    expect(fitWithinEdge({ width: 800, height: 600 }, 1600)).toEqual({ width: 800, height: 600 });
  });
});

describe("compressImage", () => {
  it("gets a 6 MB photo below 1 MB before upload", async () => {
    const attempts: Array<{ width: number; height: number; quality: number }> = [];
    const result = await compressImage(
      sixMegabyteFixture(),
      {},
      fakeEncoder(attempts),
      measure4000x3000,
    );
    expect(result.size).toBeLessThan(DEFAULT_MAX_BYTES);
    expect(result.size).toBeGreaterThan(0);
    // quality stepping actually happened: first attempt was over target
    expect(attempts.length).toBeGreaterThan(1);
    expect(attempts[0].quality).toBeGreaterThan(attempts[1].quality);
  });

  it("never encodes above the longest-edge cap", async () => {
    const attempts: Array<{ width: number; height: number; quality: number }> = [];
    await compressImage(sixMegabyteFixture(), {}, fakeEncoder(attempts), measure4000x3000);
    for (const attempt of attempts) {
      expect(Math.max(attempt.width, attempt.height)).toBeLessThanOrEqual(DEFAULT_MAX_EDGE);
    }
  });

  it("passes small in-bounds photos through untouched", async () => {
    const attempts: Array<{ width: number; height: number; quality: number }> = [];
    const original = new Blob([new Uint8Array(200 * 1024)], { type: "image/jpeg" });
    const result = await compressImage(
      original,
      {},
      fakeEncoder(attempts),
      async () => ({ width: 1024, height: 768 }),
    );
    expect(result).toBe(original);
    expect(attempts.length).toBe(0);
  });

  it("falls back to dimension backoff when quality alone cannot fit", async () => {
    const attempts: Array<{ width: number; height: number; quality: number }> = [];
    const result = await compressImage(
      sixMegabyteFixture(),
      { maxBytes: 220 * 1024 }, // unreachable via quality stepping alone at 1600px
      fakeEncoder(attempts),
      measure4000x3000,
    );
    expect(result.size).toBeLessThanOrEqual(220 * 1024);
    const edges = attempts.map((a) => Math.max(a.width, a.height));
    expect(Math.min(...edges)).toBeLessThan(DEFAULT_MAX_EDGE);
  });

  it("returns the smallest attempt when the target is impossible", async () => {
    const result = await compressImage(
      sixMegabyteFixture(),
      { maxBytes: 1, maxRounds: 2 },
      fakeEncoder([]),
      measure4000x3000,
    );
    expect(result.size).toBeGreaterThan(1); // best effort, server still guards
    expect(result.size).toBeLessThan(6 * 1024 * 1024);
  });
});
