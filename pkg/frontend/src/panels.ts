// DOM panels: VNA, tuning control, scope, spectrum, shot table. Each
// panel builds its elements once and re-renders from the view models on
// every store change.

import { drawMagnitude, drawPolar, drawScope, drawSpectrum } from "./charts.js";
import { fmtDbm, fmtFreq, fmtKhz, fmtMhz, fmtRabiMhz, fmtUs, fmtVolts } from "./format.js";
import type { PanelId, Store, ViewState } from "./store.js";
import {
  scopeViewModel,
  shotTableViewModel,
  spectrumViewModel,
  tuningViewModel,
  vnaViewModel,
  TUNE_STEP_HZ,
} from "./viewmodels.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function badge(label: string): { wrap: HTMLElement; value: HTMLElement } {
  const wrap = el("div", "badge");
  wrap.appendChild(el("span", "badge-label", label));
  const value = el("span", "badge-value", "-");
  wrap.appendChild(value);
  return { wrap, value };
}

interface Panel {
  id: PanelId;
  root: HTMLElement;
  render(s: ViewState): void;
}

function vnaPanel(store: Store): Panel {
  const root = el("section", "panel");
  root.appendChild(el("h2", undefined, "vna"));
  const empty = el("div", "empty-msg");
  const mag = el("canvas", "plot") as HTMLCanvasElement;
  mag.width = 460;
  mag.height = 220;
  const polar = el("canvas", "plot polar") as HTMLCanvasElement;
  polar.width = 220;
  polar.height = 220;
  const row = el("div", "plot-row");
  row.appendChild(mag);
  row.appendChild(polar);
  const caption = el("div", "caption");
  root.appendChild(empty);
  root.appendChild(row);
  root.appendChild(caption);

  return {
    id: "vna",
    root,
    render(s) {
      const vm = vnaViewModel(s.bench, s.sweep);
      if (vm.kind === "empty") {
        empty.textContent = vm.message;
        empty.style.display = "block";
        row.style.display = "none";
        caption.textContent = "";
        return;
      }
      empty.style.display = "none";
      row.style.display = "flex";
      drawMagnitude(mag, vm);
      drawPolar(polar, vm);
      caption.textContent =
        `mode ${fmtFreq(vm.fModeHz)}  |  spin line ${fmtFreq(vm.spinFreqHz)}  |  ` +
        `beta ${vm.couplingBeta.toFixed(2)} (${vm.coupling})`;
    },
  };
}

function tuningControl(store: Store): HTMLElement {
  const root = el("div", "tuning");
  const down = el("button", undefined, "-0.5 MHz");
  const up = el("button", undefined, "+0.5 MHz");
  const slider = el("input") as HTMLInputElement;
  slider.type = "range";
  const readout = el("span", "tune-readout");
  const limits = el("span", "tune-limits");
  const error = el("div", "inline-error");
  const fire = el("button", "fire", "fire");
  const autofireToggle = el("input") as HTMLInputElement;
  autofireToggle.type = "checkbox";
  const autofireRate = el("input") as HTMLInputElement;
  autofireRate.type = "number";
  autofireRate.min = "0.5";
  autofireRate.max = "10";
  autofireRate.step = "0.5";
  autofireRate.value = "1";
  const autofireLabel = el("label", "autofire-label", "auto ");
  autofireLabel.appendChild(autofireToggle);
  autofireLabel.appendChild(autofireRate);
  autofireLabel.appendChild(document.createTextNode(" Hz"));

  down.addEventListener("click", () => void store.tuneStep(-TUNE_STEP_HZ).catch(() => {}));
  up.addEventListener("click", () => void store.tuneStep(TUNE_STEP_HZ).catch(() => {}));
  slider.addEventListener("input", () => store.dragTuning(Number(slider.value)));
  slider.addEventListener("change", () => void store.commitTuning().catch(() => {}));
  fire.addEventListener("click", () => void store.fire().catch(() => {}));
  autofireToggle.addEventListener("change", () => {
    const rate = autofireToggle.checked ? Number(autofireRate.value) : null;
    void store.setAutofire(rate).catch(() => {});
  });

  const rowTop = el("div", "tune-row");
  rowTop.appendChild(down);
  rowTop.appendChild(slider);
  rowTop.appendChild(up);
  rowTop.appendChild(readout);
  const rowBottom = el("div", "tune-row");
  rowBottom.appendChild(fire);
  rowBottom.appendChild(autofireLabel);
  rowBottom.appendChild(limits);
  root.appendChild(rowTop);
  root.appendChild(rowBottom);
  root.appendChild(error);

  store.subscribe((s) => {
    const vm = tuningViewModel(s);
    if (!vm) return;
    slider.min = String(vm.rangeLoHz);
    slider.max = String(vm.rangeHiHz);
    slider.step = "1000";
    if (!vm.dragging) slider.value = String(vm.valueHz);
    readout.textContent = fmtFreq(vm.valueHz);
    limits.textContent = `range ${fmtFreq(vm.rangeLoHz)} .. ${fmtFreq(vm.rangeHiHz)}`;
    for (const b of [down, up, fire]) b.disabled = vm.disabled;
    slider.disabled = vm.disabled;
    autofireToggle.checked = s.bench ? s.bench.autofire_active : false;
    error.textContent = vm.error ?? "";
    error.style.display = vm.error ? "block" : "none";
  });

  return root;
}

function scopePanel(store: Store): Panel {
  const root = el("section", "panel");
  root.appendChild(el("h2", undefined, "scope"));
  const banner = el("div", "banner", "below threshold");
  const empty = el("div", "empty-msg");
  const canvas = el("canvas", "plot wide") as HTMLCanvasElement;
  canvas.width = 700;
  canvas.height = 220;
  const peak = badge("peak");
  const hint = el("div", "caption", "wheel to zoom, double-click to reset");
  root.appendChild(banner);
  root.appendChild(empty);
  root.appendChild(canvas);
  const badges = el("div", "badges");
  badges.appendChild(peak.wrap);
  root.appendChild(badges);
  root.appendChild(hint);

  canvas.addEventListener("wheel", (ev) => {
    ev.preventDefault();
    const s = store.getState();
    const vm = scopeViewModel(s.detail, s.scopeZoom);
    if (vm.kind !== "ready") return;
    const span = vm.windowT1 - vm.windowT0;
    const frac = ev.offsetX / canvas.width;
    const pivot = vm.windowT0 + frac * span;
    const factor = ev.deltaY < 0 ? 0.5 : 2.0;
    const newSpan = Math.max(span * factor, 2e-9);
    const t0 = pivot - frac * newSpan;
    const t1 = t0 + newSpan;
    void store.setScopeZoom(t0, t1).catch(() => {});
  });
  canvas.addEventListener("dblclick", () => store.clearScopeZoom());

  return {
    id: "scope",
    root,
    render(s) {
      const vm = scopeViewModel(s.detail, s.scopeZoom);
      if (vm.kind === "empty") {
        empty.textContent = vm.message;
        empty.style.display = "block";
        canvas.style.display = "none";
        banner.style.display = "none";
        peak.value.textContent = "-";
        return;
      }
      empty.style.display = "none";
      canvas.style.display = "block";
      banner.style.display = vm.belowThreshold ? "block" : "none";
      drawScope(canvas, vm);
      peak.value.textContent = fmtVolts(vm.vPeakV);
    },
  };
}

function spectrumPanel(store: Store): Panel {
  const root = el("section", "panel");
  root.appendChild(el("h2", undefined, "spectrum"));
  const msg = el("div", "empty-msg");
  const canvas = el("canvas", "plot wide") as HTMLCanvasElement;
  canvas.width = 700;
  canvas.height = 200;
  const splitting = badge("splitting");
  const power = badge("peak power");
  const delay = badge("delay");
  const rabi = badge("rabi");
  const badges = el("div", "badges");
  for (const b of [splitting, power, delay, rabi]) badges.appendChild(b.wrap);
  root.appendChild(msg);
  root.appendChild(canvas);
  root.appendChild(badges);

  return {
    id: "spectrum",
    root,
    render(s) {
      const vm = spectrumViewModel(s.detail);
      if (vm.kind !== "ready") {
        msg.textContent = vm.message;
        msg.style.display = "block";
        msg.className = vm.kind === "below-threshold" ? "banner" : "empty-msg";
        canvas.style.display = "none";
        for (const b of [splitting, power, delay, rabi]) b.value.textContent = "-";
        return;
      }
      msg.style.display = "none";
      canvas.style.display = "block";
      drawSpectrum(canvas, vm);
      splitting.value.textContent = fmtKhz(vm.splittingKhz);
      power.value.textContent = fmtDbm(vm.pPeakDbm);
      delay.value.textContent = fmtUs(vm.delayUs);
      rabi.value.textContent = fmtRabiMhz(vm.rabiMhz);
    },
  };
}

function shotTablePanel(store: Store): Panel {
  const root = el("section", "panel");
  root.appendChild(el("h2", undefined, "shots"));
  const table = el("table", "shot-table");
  const head = el("tr");
  for (const label of ["id", "time", "detuning", "energy", "mased", "peak", "delay", "rabi"]) {
    head.appendChild(el("th", undefined, label));
  }
  const thead = el("thead");
  thead.appendChild(head);
  const tbody = el("tbody");
  table.appendChild(thead);
  table.appendChild(tbody);
  root.appendChild(table);

  return {
    id: "shots",
    root,
    render(s) {
      const rows = shotTableViewModel(s.shots, s.selectedShotId);
      tbody.textContent = "";
      for (const r of rows) {
        const tr = el("tr", r.selected ? "selected" : undefined);
        tr.appendChild(el("td", undefined, String(r.shotId)));
        tr.appendChild(el("td", undefined, r.timestampUtc.slice(11, 19)));
        tr.appendChild(el("td", undefined, fmtMhz(r.detuningMhz * 1e6)));
        tr.appendChild(el("td", undefined, `${r.energyMj.toFixed(1)} mJ`));
        tr.appendChild(el("td", undefined, r.mased ? "yes" : "no"));
        tr.appendChild(el("td", undefined, fmtDbm(r.pPeakDbm)));
        tr.appendChild(el("td", undefined, fmtUs(r.delayUs)));
        tr.appendChild(el("td", undefined, fmtRabiMhz(r.rabiMhz)));
        tr.addEventListener("click", () => void store.selectShot(r.shotId).catch(() => {}));
        tbody.appendChild(tr);
      }
    },
  };
}

export function mountPanels(host: HTMLElement, store: Store): void {
  const status = el("div", "status");
  const tuning = tuningControl(store);
  const grid = el("div", "grid");
  const panels: Panel[] = [
    vnaPanel(store),
    scopePanel(store),
    spectrumPanel(store),
    shotTablePanel(store),
  ];
  for (const p of panels) grid.appendChild(p.root);
  host.appendChild(status);
  host.appendChild(tuning);
  host.appendChild(grid);

  store.subscribe((s) => {
    status.textContent = `events: ${s.connection}` + (s.firing ? "  |  shot running" : "");
    for (const p of panels) {
      p.root.style.order = String(s.panelLayout.indexOf(p.id));
      p.render(s);
    }
  });
}
