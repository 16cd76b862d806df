import { renderCompletionRing } from "./ring.js";
import type { RecordPayload } from "./types.js";

export function renderRecordItem(record: RecordPayload): string {
  return (
    `<li class="record" data-record-id="${record.record_id}">` +
    `<figure class="record-photo" data-photo-url="${record.photo_url}"></figure>` +
    `<div class="record-ring">${renderCompletionRing(record.overall, { size: 64, strokeWidth: 8 })}</div>` +
    `<div class="record-body">` +
    `<time datetime="${record.date}">${record.date}</time>` +
    `<p class="record-scores">` +
    `rice <b>${record.scores.rice}</b> · meat <b>${record.scores.meat}</b> · veg <b>${record.scores.vegetables}</b>` +
    `</p>` +
    `<p class="record-overall">overall <b>${record.overall.toFixed(1)}%</b></p>` +
    `</div>` +
    `</li>`
  );
}

export function renderRecordList(records: RecordPayload[], emptyMessage: string): string {
  if (records.length === 0) {
    return `<p class="empty-state">${emptyMessage}</p>`;
  }
  return `<ul class="record-list">${records.map(renderRecordItem).join("")}</ul>`;
}

export function renderHistoryPage(records: RecordPayload[]): string {
  return (
    `<section class="history-page">` +
    `<h2>History</h2>` +
    renderRecordList(records, "No food-saving records yet. Log your first finished meal!") +
    `</section>`
  );
}
