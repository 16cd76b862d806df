// Client-side photo compression before upload. Meal photos off a phone
// camera are routinely several megabytes; the upload target is 1 MB with
// the longest edge capped at 1600 px, stepping JPEG quality down (and then
// dimensions) until the encoded size fits.
//
// The encoder and measurer are injectable: browsers use canvas + image
// decoding, tests plug in deterministic fakes since no DOM test
// environment encodes real JPEGs.

export interface ImageSize {
  width: number;
  height: number;
}

export type ImageMeasurer = (source: Blob) => Promise<ImageSize>;
export type ImageEncoder = (
  source: Blob,
  width: number,
  height: number,
  quality: number,
) => Promise<Blob>;

export interface CompressOptions {
  maxBytes?: number;
  maxEdge?: number;
  qualitySteps?: number[];
  dimensionBackoff?: number;
  maxRounds?: number;
}

export const DEFAULT_MAX_BYTES = 1024 * 1024;
export const DEFAULT_MAX_EDGE = 1600;
const DEFAULT_QUALITIES = [0.85, 0.7, 0.55, 0.4, 0.3];

export function fitWithinEdge(size: ImageSize, maxEdge: number): ImageSize {
  const longest = Math.max(size.width, size.height);
  if (longest <= maxEdge) return { width: size.width, height: size.height };
  const scale = maxEdge / longest;
  return {
    width: Math.max(1, Math.round(size.width * scale)),
    height: Math.max(1, Math.round(size.height * scale)),
  };
}

export async function compressImage(
  source: Blob,
  options: CompressOptions = {},
  encode: ImageEncoder = canvasEncoder,
  measure: ImageMeasurer = decodeSize,
): Promise<Blob> {
  const maxBytes = options.maxBytes ?? DEFAULT_MAX_BYTES;
  const maxEdge = options.maxEdge ?? DEFAULT_MAX_EDGE;
  const qualities = options.qualitySteps ?? DEFAULT_QUALITIES;
  const backoff = options.dimensionBackoff ?? 0.75;
  const maxRounds = options.maxRounds ?? 4;

  const original = await measure(source);
  let target = fitWithinEdge(original, maxEdge);

  // Already small enough and within the edge cap: upload as-is.
  if (source.size <= maxBytes && target.width === original.width && target.height === original.height) {
    return source;
  }

  let best: Blob | null = null;
  for (let round = 0; round < maxRounds; round++) {
    for (const quality of qualities) {
      const candidate = await encode(source, target.width, target.height, quality);
      if (best === null || candidate.size < best.size) best = candidate;
      if (candidate.size <= maxBytes) return candidate;
    }
    target = {
      width: Math.max(1, Math.round(target.width * backoff)),
      height: Math.max(1, Math.round(target.height * backoff)),
    };
  }
  // Give back the smallest attempt; the server enforces its own hard cap.
  return best ?? source;
}

// -- browser implementations --------------------------------------------

async function decodeSize(source: Blob): Promise<ImageSize> {
  const bitmap = await createImageBitmap(source);
  try {
    return { width: bitmap.width, height: bitmap.height };
  } finally {
    bitmap.close();
  }
}

async function canvasEncoder(
  source: Blob,
  width: number,
  height: number,
  quality: number,
): Promise<Blob> {
  const bitmap = await createImageBitmap(source);
  try {
    const canvas = document.createElement("canvas");
    canvas.width = width;
    canvas.height = height;
    const context = canvas.getContext("2d");
    if (!context) throw new Error("canvas 2d context unavailable");
    context.drawImage(bitmap, 0, 0, width, height);
    return await new Promise<Blob>((resolve, reject) => {
      canvas.toBlob(
        (blob) => (blob ? resolve(blob) : reject(new Error("jpeg encoding failed"))),
        "image/jpeg",
        quality,
      );
    });
  } finally {
    bitmap.close();
  }
}
