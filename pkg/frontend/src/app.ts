/**
 * Single-page client: connect to a session, poll its state every second,
 * render the wealth gauge and hypothesis list, and funnel star/override/
 * delete gestures through the API with optimistic updates.
 */

import { ApiClient, ApiError } from "./api.js";
import { optimisticUpdate } from "./optimistic.js";
import { renderBanner, renderGauge, renderRecordList } from "./render.js";
import { toViewModel, type SessionViewModel } from "./viewModel.js";

const POLL_MS = 1000;

interface AppState {
  client: ApiClient;
  sessionId: string | null;
  vm: SessionViewModel | null;
  error: string | null;
  timer: number | null;
}

const state: AppState = {
  client: new ApiClient(defaultBase()),
  sessionId: null,
  vm: null,
  error: null,
  timer: null,
};

function defaultBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  return fromQuery ?? "http://127.0.0.1:8712";
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function draw(): void {
  el("banner").innerHTML = renderBanner(state.error);
  if (state.vm) {
    el("gauge").innerHTML = renderGauge(state.vm);
    el("records").innerHTML = renderRecordList(state.vm);
    el("session-label").textContent = `session ${state.vm.id}`;
  }
}

function setVm(vm: SessionViewModel | null): void {
  state.vm = vm;
  draw();
}

async function refresh(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const session = await state.client.getSession(state.sessionId);
    state.error = null;
    setVm(toViewModel(session));
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

function startPolling(): void {
  if (state.timer !== null) window.clearInterval(state.timer);
  state.timer = window.setInterval(() => void refresh(), POLL_MS);
}

async function connect(): Promise<void> {
  const base = el<HTMLInputElement>("api-base").value.trim();
  state.client = new ApiClient(base);
  const existing = el<HTMLInputElement>("session-id").value.trim();
  try {
    if (existing) {
      state.sessionId = existing;
    } else {
      const dataset = el<HTMLInputElement>("dataset-name").value.trim();
      const alpha = Number(el<HTMLInputElement>("alpha").value) || 0.05;
      const policyName = el<HTMLSelectElement>("policy").value;
      const session = await state.client.createSession({
        dataset,
        alpha,
        policy: { name: policyName },
      });
      state.sessionId = session.id;
      el<HTMLInputElement>("session-id").value = session.id;
    }
    state.error = null;
    await refresh();
    startPolling();
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

async function toggleStar(recordId: number, on: boolean): Promise<void> {
  if (!state.vm || !state.sessionId) return;
  const before = state.vm;
  const after: SessionViewModel = {
    ...before,
    records: before.records.map((r) => (r.id === recordId ? { ...r, starred: on } : r)),
  };
  try {
    await optimisticUpdate(before, setVm, after, () =>
      state.client.star(state.sessionId!, recordId, on),
    );
    const response = await state.client.star(state.sessionId, recordId, on);
    if (response.warning) {
      state.error = response.warning;
      draw();
    }
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

async function removeRecord(recordId: number): Promise<void> {
  if (!state.vm || !state.sessionId) return;
  const before = state.vm;
  const after: SessionViewModel = {
    ...before,
    records: before.records.map((r) =>
      r.id === recordId ? { ...r, decision: "descriptive", color: "gray" } : r,
    ),
  };
  try {
    await optimisticUpdate(before, setVm, after, () =>
      state.client.remove(state.sessionId!, recordId),
    );
    await refresh();
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

async function overrideRecord(recordId: number): Promise<void> {
  if (!state.sessionId) return;
  const raw = window.prompt(
    'Override spec (JSON), e.g. {"kind": "welch_t_two_sided"} or {"p_value": 0.01}',
  );
  if (!raw) return;
  try {
    const spec = JSON.parse(raw) as Record<string, unknown>;
    await state.client.override(state.sessionId, recordId, spec);
    state.error = null;
    await refresh();
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

function filterFromForm(): Record<string, unknown>[] {
  const column = el<HTMLInputElement>("filter-column").value.trim();
  if (!column) return [];
  const op = el<HTMLSelectElement>("filter-op").value;
  const negated = el<HTMLInputElement>("filter-negated").checked;
  const value = el<HTMLInputElement>("filter-value").value.trim();
  if (op === "range") {
    const [lo, hi] = value.split(":").map((part) => (part ? Number(part) : null));
    return [{ column, op, lo, hi: hi ?? null, negated }];
  }
  if (op === "in_set") {
    return [{ column, op, values: value.split(",").map((v) => v.trim()), negated }];
  }
  return [{ column, op, value, negated }];
}

async function addVisualization(): Promise<void> {
  if (!state.sessionId) return;
  const attribute = el<HTMLInputElement>("viz-attribute").value.trim();
  const linked = el<HTMLInputElement>("viz-linked").value.trim();
  const viz: Record<string, unknown> = { attribute, filters: filterFromForm() };
  if (linked) viz.linked_to = linked;
  try {
    await state.client.postVisualization(state.sessionId, viz);
    state.error = null;
    await refresh();
  } catch (err) {
    state.error = err instanceof ApiError ? err.message : String(err);
    draw();
  }
}

function wire(): void {
  el("connect").addEventListener("click", () => void connect());
  el("add-viz").addEventListener("click", () => void addVisualization());
  el("records").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const id = Number(target.dataset.id);
    if (!id) return;
    if (target.classList.contains("star")) {
      void toggleStar(id, target.dataset.on === "true");
    } else if (target.classList.contains("delete")) {
      void removeRecord(id);
    } else if (target.classList.contains("override")) {
      void overrideRecord(id);
    }
  });
  el<HTMLInputElement>("api-base").value = state.client.base;
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}
