/** Wires the page together: one in-flight scan at a time, stale results
 * grayed out while waiting and preserved under the banner on failure.
 *
 * After every scan settles (success or failure) the results element gets a
 * "scan-settled" event, which the tests await.
 */

import { checkHealth, scanCode, ScanError } from "./api.js";
import { hideBanner, markStale, renderBars, setHealth, showBanner } from "./view.js";

export const DEFAULT_BASE_URL = "http://localhost:8765";

export interface AppHandles {
  code: HTMLTextAreaElement;
  submit: HTMLButtonElement;
  results: HTMLElement;
  banner: HTMLElement;
  baseUrl: HTMLInputElement;
  health: HTMLElement;
}

function grab(root: Document, id: string): HTMLElement {
  const el = root.getElementById(id);
  if (!el) throw new Error(`page is missing #${id}`);
  return el;
}

export function initApp(root: Document, baseUrl?: string): AppHandles {
  const handles: AppHandles = {
    code: grab(root, "code") as HTMLTextAreaElement,
    submit: grab(root, "submit") as HTMLButtonElement,
    results: grab(root, "results"),
    banner: grab(root, "banner"),
    baseUrl: grab(root, "base-url") as HTMLInputElement,
    health: grab(root, "health"),
  };
  if (baseUrl) handles.baseUrl.value = baseUrl;
  if (!handles.baseUrl.value) handles.baseUrl.value = DEFAULT_BASE_URL;

  let pending = false;

  async function scan(): Promise<void> {
    if (pending) return; // one in-flight request by design
    pending = true;
    handles.submit.disabled = true;
    hideBanner(handles.banner);
    markStale(handles.results);
    try {
      const response = await scanCode(handles.baseUrl.value, handles.code.value);
      renderBars(handles.results, response);
      setHealth(handles.health, true);
    } catch (err) {
      // previous results stay visible, grayed out under the banner
      const message = err instanceof ScanError ? err.message : String(err);
      showBanner(handles.banner, message);
      void checkHealth(handles.baseUrl.value).then((up) => setHealth(handles.health, up));
    } finally {
      pending = false;
      handles.submit.disabled = false;
      handles.results.dispatchEvent(new Event("scan-settled"));
    }
  }

  handles.submit.addEventListener("click", () => void scan());
  void checkHealth(handles.baseUrl.value).then((up) => setHealth(handles.health, up));
  return handles;
}
