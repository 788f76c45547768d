/** DOM rendering: probability bars, staleness, the error banner.
 *
 * Every number shown comes straight from the last response; all five heads
 * always render, in the fixed head order, including 0.00 values.
 */

import { HEAD_ORDER, ScanResponse } from "./api.js";

export const THRESHOLD = 0.5;

export function renderBars(container: HTMLElement, response: ScanResponse): void {
  const rows = HEAD_ORDER.map((name) => {
    const value = response.probabilities[name] ?? 0;
    const hot = value >= THRESHOLD;
    return `
      <div class="row${hot ? " hot" : ""}" data-head="${name}">
        <span class="head">${name}</span>
        <span class="track">
          <span class="fill" style="width: ${(value * 100).toFixed(1)}%"></span>
          <span class="mark" title="decision threshold ${THRESHOLD}"></span>
        </span>
        <span class="value">${value.toFixed(2)}</span>
      </div>`;
  });
  container.innerHTML =
    rows.join("") +
    `<div class="meta">${response.token_count} tokens scanned ` +
    `(model format v${response.model_format_version})</div>`;
  container.classList.remove("stale");
}

export function markStale(container: HTMLElement): void {
  container.classList.add("stale");
}

export function showBanner(banner: HTMLElement, message: string): void {
  banner.textContent = message;
  banner.hidden = false;
}

export function hideBanner(banner: HTMLElement): void {
  banner.hidden = true;
  banner.textContent = "";
}

export function setHealth(indicator: HTMLElement, up: boolean): void {
  indicator.textContent = up ? "service up" : "service unreachable";
  indicator.classList.toggle("up", up);
  indicator.classList.toggle("down", !up);
}
