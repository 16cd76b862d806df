import { ApiClient, ApiError, OfflineError } from "./api.js";
import { renderBadgePage, renderCelebration } from "./badges.js";
import { renderOverviewPage } from "./overview.js";
import { RecordFlow } from "./record_page.js";
import { renderHistoryPage } from "./records.js";
import { clampScore } from "./scores.js";

// Participant single-page app: #/overview, #/record, #/badges, #/history.

const api = new ApiClient("");
const TOKEN_KEY = "wastenot.token";

function saved(): string | null {
  return localStorage.getItem(TOKEN_KEY);
}

function root(): HTMLElement {
  const element = document.getElementById("app");
  if (!element) throw new Error("#app missing from page");
  return element;
}

function navBar(active: string): string {
  const link = (route: string, label: string) =>
    `<a href="#/${route}" class="${active === route ? "active" : ""}">${label}</a>`;
  return (
    `<nav class="tabs">` +
    link("overview", "Overview") +
    link("record", "Record") +
    link("badges", "Badges") +
    link("history", "History") +
    `</nav>`
  );
}

function showError(error: unknown): void {
  const message =
    error instanceof OfflineError
      ? "Offline — check your connection and retry."
      : error instanceof ApiError
        ? error.message
        : "Something went wrong.";
  root().insertAdjacentHTML("afterbegin", `<div class="banner banner--error">${message}</div>`);
}

async function hydratePhotos(): Promise<void> {
  const figures = root().querySelectorAll<HTMLElement>("[data-photo-url]");
  await Promise.all(
    Array.from(figures).map(async (figure) => {
      const url = figure.dataset.photoUrl;
      if (!url) return;
      try {
        const blob = await api.media(url);
        const img = document.createElement("img");
        img.src = URL.createObjectURL(blob);
        img.alt = "finished meal";
        figure.replaceChildren(img);
      } catch {
        figure.classList.add("photo-unavailable");
      }
    }),
  );
}

function renderAuth(): void {
  root().innerHTML = `
    <section class="auth-page">
      <h1>wastenot</h1>
      <p class="tagline">Save food, one meal at a time.</p>
      <form id="login-form" class="card">
        <h2>Log in</h2>
        <label>Email <input name="email" type="email" required></label>
        <label>Password <input name="password" type="password" required minlength="8"></label>
        <button type="submit">Log in</button>
      </form>
      <form id="register-form" class="card">
        <h2>New here? Register</h2>
        <label>Email <input name="email" type="email" required></label>
        <label>Display name <input name="display_name" required></label>
        <label>Password <input name="password" type="password" required minlength="8"></label>
        <button type="submit">Register</button>
      </form>
    </section>`;

  const loginForm = document.getElementById("login-form") as HTMLFormElement;
  loginForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const data = new FormData(loginForm);
    try {
      await api.login(String(data.get("email")), String(data.get("password")));
      localStorage.setItem(TOKEN_KEY, api.token ?? "");
      location.hash = "#/overview";
    } catch (error) {
      showError(error);
    }
  });

  const registerForm = document.getElementById("register-form") as HTMLFormElement;
  registerForm.addEventListener("submit", async (event) => {
    event.preventDefault();
    const data = new FormData(registerForm);
    try {
      await api.register(
        String(data.get("email")),
        String(data.get("display_name")),
        String(data.get("password")),
      );
      await api.login(String(data.get("email")), String(data.get("password")));
      localStorage.setItem(TOKEN_KEY, api.token ?? "");
      location.hash = "#/overview";
    } catch (error) {
      showError(error);
    }
  });
}

async function renderOverview(): Promise<void> {
  const payload = await api.overview();
  root().innerHTML = navBar("overview") + renderOverviewPage(payload);
  await hydratePhotos();
}

async function renderBadges(): Promise<void> {
  const payload = await api.badges();
  root().innerHTML = navBar("badges") + renderBadgePage(payload);
}

async function renderHistory(): Promise<void> {
  const records = await api.records();
  root().innerHTML = navBar("history") + renderHistoryPage(records);
  await hydratePhotos();
}

function renderRecord(): void {
  root().innerHTML =
    navBar("record") +
    `
    <section class="record-page">
      <h2>Record a food-saving action</h2>
      <form id="record-form" class="card">
        <label class="photo-label">Finished-meal photo
          <input name="photo" type="file" accept="image/*" capture="environment" required>
        </label>
        ${["rice", "meat", "vegetables"]
          .map(
            (category) => `
        <label class="slider-label">${category}: <output id="out-${category}">100</output>%
          <input name="${category}" type="range" min="0" max="100" step="1" value="100">
        </label>`,
          )
          .join("")}
        <button type="submit" id="submit-record">Submit</button>
      </form>
      <div id="record-result" aria-live="polite"></div>
    </section>`;

  for (const category of ["rice", "meat", "vegetables"]) {
    const slider = root().querySelector<HTMLInputElement>(`input[name=${category}]`);
    const out = document.getElementById(`out-${category}`);
    slider?.addEventListener("input", () => {
      const value = clampScore(Number(slider.value));
      slider.value = String(value);
      if (out) out.textContent = String(value);
    });
  }

  const flow = new RecordFlow(api);
  const form = document.getElementById("record-form") as HTMLFormElement;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const result = document.getElementById("record-result")!;
    const data = new FormData(form);
    const photo = data.get("photo");
    if (!(photo instanceof File) || photo.size === 0) {
      result.innerHTML = `<div class="banner banner--error">Pick a photo of your finished meal first.</div>`;
      return;
    }
    const button = document.getElementById("submit-record") as HTMLButtonElement;
    button.disabled = true;
    result.innerHTML = `<p class="submitting">Uploading…</p>`;
    const state = await flow.submit(photo, photo.name || "meal.jpg", {
      rice: clampScore(Number(data.get("rice"))),
      meat: clampScore(Number(data.get("meat"))),
      vegetables: clampScore(Number(data.get("vegetables"))),
    });
    button.disabled = false;
    if (state.kind === "submitted") {
      result.innerHTML =
        renderCelebration(state.newlyEarned) +
        `<div class="banner banner--ok">Recorded! <a href="#/history">See it in your history</a>.</div>`;
      form.reset();
    } else if (state.kind === "failed") {
      const retry = state.retryable ? ` <button id="retry-record">Retry</button>` : "";
      result.innerHTML = `<div class="banner banner--error">${state.message}${retry}</div>`;
      document.getElementById("retry-record")?.addEventListener("click", () => {
        form.requestSubmit();
      });
    } else if (state.kind === "rejected") {
      result.innerHTML = `<div class="banner banner--error">${state.errors.join("<br>")}</div>`;
    }
  });
}

async function route(): Promise<void> {
  api.token = saved();
  if (!api.token) {
    renderAuth();
    return;
  }
  const hash = location.hash || "#/overview";
  try {
    if (hash.startsWith("#/record")) renderRecord();
    else if (hash.startsWith("#/badges")) await renderBadges();
    else if (hash.startsWith("#/history")) await renderHistory();
    else await renderOverview();
  } catch (error) {
    if (error instanceof ApiError && error.status === 401) {
      localStorage.removeItem(TOKEN_KEY);
      renderAuth();
      return;
    }
    showError(error);
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
