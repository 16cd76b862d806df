import { renderBowlGrid } from "./bowls.js";
import { renderRing } from "./ring.js";
import type { DailyPayload, MonthlyPayload, SeverityLevel } from "./types.js";

// The public storytelling pages. Reds deepen with severity (palette in
// style.css); every number displayed is a payload field.

const SEVERITY_ORDER: readonly SeverityLevel[] = ["severe", "medium", "light"];
const HEADLINE = "How much food we wasted?";

function severityLegend(counts: Record<SeverityLevel, number>): string {
  return (
    `<ul class="severity-legend">` +
    SEVERITY_ORDER.map(
      (level) =>
        `<li class="legend--${level}"><span class="swatch"></span>` +
        `${level} <b data-count="${level}">${counts[level]}</b> trays</li>`,
    ).join("") +
    `</ul>`
  );
}

function tipFooter(tips: string[], tipIndex: number): string {
  if (tips.length === 0) return "";
  const tip = tips[tipIndex % tips.length];
  return `<footer class="tips-footer"><span aria-hidden="true">💡</span> <em class="tip">${tip}</em></footer>`;
}

export function renderDailyPage(daily: DailyPayload, tips: string[], tipIndex = 0): string {
  const ring = renderRing(
    [
      { value: daily.type_percent.rice, cssClass: "type--rice" },
      { value: daily.type_percent.meat, cssClass: "type--meat" },
      { value: daily.type_percent.vegetables, cssClass: "type--vegetables" },
    ],
    { size: 220, strokeWidth: 30 },
  );
  return (
    `<section class="dash-page dash-daily">` +
    `<header><h1>${HEADLINE}</h1><p class="dash-date">${daily.date}</p></header>` +
    `<div class="dash-columns">` +
    `<div class="dash-bowls">` +
    `<h2>Today, bowl by bowl</h2>` +
    `<p class="dash-sub">Each bowl is 1% of today's ${daily.total_trays} meals</p>` +
    renderBowlGrid(daily.bowls) +
    severityLegend(daily.severity_counts) +
    `</div>` +
    `<div class="dash-types">` +
    `<h2>What we left behind</h2>` +
    ring +
    `<ul class="type-legend">` +
    `<li class="type--rice">rice <b>${daily.type_percent.rice}%</b></li>` +
    `<li class="type--meat">meat <b>${daily.type_percent.meat}%</b></li>` +
    `<li class="type--vegetables">vegetables <b>${daily.type_percent.vegetables}%</b></li>` +
    `</ul>` +
    `<p class="dash-total">≈ <b>${Math.round(daily.total_waste_g)}</b> g of food wasted</p>` +
    `</div>` +
    `</div>` +
    tipFooter(tips, tipIndex) +
    `</section>`
  );
}

export function renderMonthlyPage(monthly: MonthlyPayload, tips: string[], tipIndex = 0): string {
  const maxTotal = Math.max(
    1,
    ...monthly.days.map((d) =>
      SEVERITY_ORDER.reduce((sum, level) => sum + d.severity_counts[level], 0),
    ),
  );
  const barMaxPx = 240;
  const bars = monthly.days
    .map((day) => {
      const segments = SEVERITY_ORDER.map((level) => {
        const count = day.severity_counts[level];
        const px = (count / maxTotal) * barMaxPx;
        return `<div class="bar-seg seg--${level}" data-level="${level}" data-count="${count}" style="height: ${px.toFixed(1)}px"></div>`;
      }).join("");
      const dayOfMonth = Number(day.date.slice(-2));
      return (
        `<div class="bar" data-date="${day.date}">` +
        `<div class="bar-stack">${segments}</div>` +
        `<span class="bar-label">${dayOfMonth}</span>` +
        `</div>`
      );
    })
    .join("");
  return (
    `<section class="dash-page dash-monthly">` +
    `<header><h1>${HEADLINE}</h1><p class="dash-date">${monthly.month}</p></header>` +
    (monthly.days.length === 0
      ? `<p class="empty-state">No data for this month yet.</p>`
      : `<div class="bar-chart" role="img" aria-label="daily waste trend">${bars}</div>`) +
    `<ul class="severity-legend severity-legend--row">` +
    SEVERITY_ORDER.map(
      (level) => `<li class="legend--${level}"><span class="swatch"></span>${level}</li>`,
    ).join("") +
    `</ul>` +
    tipFooter(tips, tipIndex) +
    `</section>`
  );
}
