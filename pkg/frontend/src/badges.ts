import type { BadgeKind, BadgesResponse, BadgeStatePayload } from "./types.js";
import { BADGE_KINDS } from "./types.js";

const BADGE_META: Record<BadgeKind, { title: string; hint: string; icon: string }> = {
  attempt: { title: "Attempt", hint: "Log your first finished meal", icon: "🍞" },
  persistence: { title: "Persistence", hint: "Record on consecutive days", icon: "🍜" },
  quantity: { title: "Quantity", hint: "Keep the records coming", icon: "🍱" },
  quality: { title: "Quality", hint: "Finish your meals consistently", icon: "🍰" },
};

function badgeCard(kind: BadgeKind, state: BadgeStatePayload, earners?: number): string {
  const progress = state[kind];
  const pct = Math.round(progress.progress * 100);
  const stateClass = progress.earned ? "badge--earned" : "badge--locked";
  const earnersHtml =
    earners === undefined
      ? ""
      : `<p class="badge-earners" data-kind="${kind}">${earners} earned this</p>`;
  return (
    `<article class="badge ${stateClass}" data-kind="${kind}">` +
    `<span class="badge-icon" aria-hidden="true">${BADGE_META[kind].icon}</span>` +
    `<h3>${BADGE_META[kind].title}</h3>` +
    `<p class="badge-hint">${BADGE_META[kind].hint}</p>` +
    `<div class="progress-track"><div class="progress-fill" style="width: ${pct}%"></div></div>` +
    `<p class="badge-progress">${pct}%</p>` +
    earnersHtml +
    `</article>`
  );
}

export function renderBadgeStrip(state: BadgeStatePayload): string {
  return (
    `<div class="badge-strip">` +
    BADGE_KINDS.map((kind) => badgeCard(kind, state)).join("") +
    `</div>`
  );
}

export function renderBadgePage(payload: BadgesResponse): string {
  const { badge_state: state, earner_counts: counts } = payload;
  const callout = state.reward_eligible
    ? `<div class="reward-callout">All four badges earned — you can claim the final reward! 🎉</div>`
    : "";
  return (
    `<section class="badge-page">` +
    `<h2>Badges</h2>` +
    callout +
    `<div class="badge-strip">` +
    BADGE_KINDS.map((kind) => badgeCard(kind, state, counts[kind])).join("") +
    `</div>` +
    `</section>`
  );
}

export function renderCelebration(newlyEarned: readonly BadgeKind[]): string {
  if (newlyEarned.length === 0) return "";
  const names = newlyEarned.map((kind) => BADGE_META[kind].title).join(" + ");
  return (
    `<div class="celebration" role="status">` +
    `<span class="celebration-burst" aria-hidden="true">🎉</span>` +
    `<p>New badge${newlyEarned.length > 1 ? "s" : ""}: <strong>${names}</strong></p>` +
    `</div>`
  );
}
