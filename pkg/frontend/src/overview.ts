import { renderBadgeStrip } from "./badges.js";
import { renderRecordList } from "./records.js";
import { renderCompletionRing } from "./ring.js";
import type { OverviewPayload } from "./types.js";

function comparisonRow(label: string, mine: number, community: number, communityNoData: boolean): string {
  const communityText = communityNoData ? "–" : community.toFixed(1);
  return (
    `<tr data-category="${label}">` +
    `<th>${label}</th>` +
    `<td class="mine">${mine.toFixed(1)}</td>` +
    `<td class="community">${communityText}</td>` +
    `</tr>`
  );
}

export function renderOverviewPage(payload: OverviewPayload): string {
  const { user, community } = payload;
  const ring = user.averages.no_data
    ? `<p class="empty-state">No records yet — your completion ring appears after your first log.</p>`
    : `<div class="overview-ring">${renderCompletionRing(user.averages.overall)}` +
      `<p class="ring-value"><b>${user.averages.overall.toFixed(1)}%</b> avg completion</p></div>`;
  return (
    `<section class="overview-page">` +
    `<h2>Hi ${user.display_name}</h2>` +
    ring +
    `<table class="comparison"><thead>` +
    `<tr><th></th><th>you</th><th>community</th></tr></thead><tbody>` +
    comparisonRow("rice", user.averages.rice, community.rice, community.no_data) +
    comparisonRow("meat", user.averages.meat, community.meat, community.no_data) +
    comparisonRow("vegetables", user.averages.vegetables, community.vegetables, community.no_data) +
    `</tbody></table>` +
    renderBadgeStrip(payload.badge_state) +
    `<h3>Recent records</h3>` +
    renderRecordList(payload.recent_records, "Nothing logged yet.") +
    `</section>`
  );
}
