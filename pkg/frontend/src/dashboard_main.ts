import { ApiClient } from "./api.js";
import { renderDailyPage, renderMonthlyPage } from "./dashboard.js";
import { RotationController } from "./rotation.js";

// Kiosk entry: /dashboard.html?rotate=20 — no auth, full screen, Daily and
// Monthly pages looping forever. Payloads refresh on every wrap so the
// screen tracks the latest cached aggregates without a reload.

const api = new ApiClient("");

type PageName = "daily" | "monthly";

async function boot(): Promise<void> {
  const rootElement = document.getElementById("dashboard");
  if (!rootElement) throw new Error("#dashboard missing from page");

  const params = new URLSearchParams(location.search);
  const rotateSeconds = Number(params.get("rotate") ?? "20") || 20;

  let tips: string[] = [];
  let daily: Awaited<ReturnType<typeof api.daily>> | null = null;
  let monthly: Awaited<ReturnType<typeof api.monthly>> | null = null;
  let tipIndex = -1;

  async function refresh(): Promise<void> {
    try {
      tips = await api.tips();
    } catch {
      /* tips are decorative */
    }
    try {
      daily = await api.daily(params.get("date") ?? undefined);
    } catch {
      daily = null;
    }
    try {
      monthly = await api.monthly(params.get("month") ?? undefined);
    } catch {
      monthly = null;
    }
  }

  function show(page: PageName): void {
    tipIndex += 1;
    if (page === "daily") {
      rootElement!.innerHTML = daily
        ? renderDailyPage(daily, tips, tipIndex)
        : `<p class="empty-state">Today's numbers are still cooking…</p>`;
    } else {
      rootElement!.innerHTML = monthly
        ? renderMonthlyPage(monthly, tips, tipIndex)
        : `<p class="empty-state">No monthly trend yet.</p>`;
    }
  }

  await refresh();
  const rotation = new RotationController<PageName>(
    ["daily", "monthly"],
    rotateSeconds * 1000,
    (page, index) => {
      if (index === 0) void refresh();
      show(page);
    },
  );
  rotation.start();
}

window.addEventListener("DOMContentLoaded", () => void boot());
