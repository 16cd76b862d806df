import { ApiError, OfflineError } from "./api.js";
import { compressImage } from "./compress.js";
import { scoreErrors } from "./scores.js";
import type { BadgeKind, BadgeStatePayload, ScoreTriple, SubmitResponse } from "./types.js";

export type SubmitState =
  | { kind: "idle" }
  | { kind: "submitting" }
  | { kind: "rejected"; errors: string[] }
  | { kind: "failed"; message: string; retryable: boolean }
  | { kind: "submitted"; badgeState: BadgeStatePayload; newlyEarned: BadgeKind[] };

export interface RecordApi {
  submitRecord(photo: Blob, filename: string, scores: ScoreTriple): Promise<SubmitResponse>;
}

type Compressor = (photo: Blob) => Promise<Blob>;

/**
 * Drives one record submission: validate scores locally, compress the
 * photo, post, and surface the result (including the badge celebration).
 * An in-flight guard makes double-taps harmless.
 */
export class RecordFlow {
  state: SubmitState = { kind: "idle" };

  constructor(
    private readonly api: RecordApi,
    private readonly compress: Compressor = (photo) => compressImage(photo),
  ) {}

  get inFlight(): boolean {
    return this.state.kind === "submitting";
  }

  async submit(photo: Blob, filename: string, scores: ScoreTriple): Promise<SubmitState> {
    if (this.inFlight) return this.state;

    const errors = scoreErrors(scores);
    if (errors.length > 0) {
      this.state = { kind: "rejected", errors };
      return this.state;
    }

    this.state = { kind: "submitting" };
    let payload: Blob;
    try {
      payload = await this.compress(photo);
    } catch {
      payload = photo; // compression trouble should never block a submission
    }
    try {
      const response = await this.api.submitRecord(payload, filename, scores);
      this.state = {
        kind: "submitted",
        badgeState: response.badge_state,
        newlyEarned: response.newly_earned,
      };
    } catch (error) {
      if (error instanceof OfflineError) {
        this.state = {
          kind: "failed",
          message: "You appear to be offline. Your record was not sent — try again.",
          retryable: true,
        };
      } else if (error instanceof ApiError && error.status === 413) {
        this.state = {
          kind: "failed",
          message:
            "That photo is too large even after compression. Try a smaller photo or lower camera resolution.",
          retryable: false,
        };
      } else if (error instanceof ApiError) {
        this.state = { kind: "failed", message: error.message, retryable: false };
      } else {
        throw error;
      }
    }
    return this.state;
  }
}
