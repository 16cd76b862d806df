import { describe, expect, it, vi } from "vitest";
import { ApiError, OfflineError } from "../src/api.js";
import { RecordFlow } from "../src/record_page.js";
import { clampScore, scoreErrors } from "../src/scores.js";
import type { SubmitResponse } from "../src/types.js";

const photo = new Blob([new Uint8Array(1024)], { type: "image/jpeg" });
const goodScores = { rice: 90, meat: 80, vegetables: 70 };

function submitResponse(newly: SubmitResponse["newly_earned"]): SubmitResponse {
  const progress = { earned: false, earned_at: null, progress: 0.1 };
  return {
    record_id: "r1",
    badge_state: {
      attempt: { earned: true, earned_at: "2023-03-20T04:00:00Z", progress: 1.0 },
      persistence: progress,
      quantity: progress,
      quality: progress,
      reward_eligible: false,
    },
    newly_earned: newly,
  };
}

const identity = async (blob: Blob) => blob;

describe("score guards", () => {
  it("clamps slider values into [0, 100]", () => {
    expect(clampScore(-5)).toBe(0);
    expect(clampScore(101)).toBe(100);
    expect(clampScore(55.6)).toBe(56);
    expect(clampScore(Number.NaN)).toBe(0);
  });

  it("collects errors for out-of-range scores", () => {
    expect(scoreErrors(goodScores)).toEqual([]);
    expect(scoreErrors({ rice: 120, meat: 0, vegetables: 0 })).toHaveLength(1);
    expect(scoreErrors({ rice: -1, meat: 101, vegetables: 2.5 })).toHaveLength(3);
  });
});

describe("record flow", () => {
  it("rejects out-of-range scores without calling the API", async () => {
    const submitRecord = vi.fn();
    const flow = new RecordFlow({ submitRecord }, identity);
    const state = await flow.submit(photo, "m.jpg", { rice: 120, meat: 0, vegetables: 0 });
    expect(state.kind).toBe("rejected");
    expect(submitRecord).not.toHaveBeenCalled();
  });

  it("celebrates newly earned badges from the server response", async () => {
    const submitRecord = vi.fn().mockResolvedValue(submitResponse(["attempt"]));
    const flow = new RecordFlow({ submitRecord }, identity);
    const state = await flow.submit(photo, "m.jpg", goodScores);
    expect(state.kind).toBe("submitted");
    if (state.kind === "submitted") {
      expect(state.newlyEarned).toEqual(["attempt"]);
      expect(state.badgeState.attempt.earned).toBe(true);
    }
  });

  it("uploads the compressed blob, not the original", async () => {
    const compressed = new Blob([new Uint8Array(10)], { type: "image/jpeg" });
    const submitRecord = vi.fn().mockResolvedValue(submitResponse([]));
    const flow = new RecordFlow({ submitRecord }, async () => compressed);
    await flow.submit(photo, "m.jpg", goodScores);
    expect(submitRecord).toHaveBeenCalledWith(compressed, "m.jpg", goodScores);
  });

  it("surfaces offline failures as retryable", async () => {
    const submitRecord = vi.fn().mockRejectedValue(new OfflineError());
    const flow = new RecordFlow({ submitRecord }, identity);
    const state = await flow.submit(photo, "m.jpg", goodScores);
    expect(state).toMatchObject({ kind: "failed", retryable: true });
  });

  it("gives size guidance on 413", async () => {
    const submitRecord = vi.fn().mockRejectedValue(new ApiError(413, "photo_too_large", "too big"));
    const flow = new RecordFlow({ submitRecord }, identity);
    const state = await flow.submit(photo, "m.jpg", goodScores);
    expect(state.kind).toBe("failed");
    if (state.kind === "failed") {
      expect(state.retryable).toBe(false);
      expect(state.message).toMatch(/smaller photo|resolution/);
    }
  });

  it("guards against double submission while in flight", async () => {
    let release: (value: SubmitResponse) => void = () => {};
    const pending = new Promise<SubmitResponse>((resolve) => (release = resolve));
    const submitRecord = vi.fn().mockReturnValue(pending);
    const flow = new RecordFlow({ submitRecord }, identity);
    const first = flow.submit(photo, "m.jpg", goodScores);
    const second = flow.submit(photo, "m.jpg", goodScores);
    release(submitResponse([]));
    await Promise.all([first, second]);
    expect(submitRecord).toHaveBeenCalledTimes(1);
  });
});
