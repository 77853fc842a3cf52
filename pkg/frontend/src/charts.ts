// Canvas drawing for the three plots. Plain 2d-context polylines with a
// dark instrument look; nothing here touches the network or the store.

import type { ScopeReady, SpectrumReady, VnaReady } from "./viewmodels.js";
import { fmtFreq, fmtTimeAxis } from "./format.js";

const BG = "#10141a";
const GRID = "#2a3340";
const TRACE = "#53d18a";
const MARKER = "#e8b10a";
const TEXT = "#c0c8d4";

interface Scale {
  (x: number): number;
}

function linScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const k = d1 === d0 ? 0 : (r1 - r0) / (d1 - d0);
  return (x) => r0 + (x - d0) * k;
}

function clearPlot(ctx: CanvasRenderingContext2D, w: number, h: number): void {
  ctx.fillStyle = BG;
  ctx.fillRect(0, 0, w, h);
}

function gridLines(ctx: CanvasRenderingContext2D, w: number, h: number): void {
  ctx.strokeStyle = GRID;
  ctx.lineWidth = 1;
  ctx.beginPath();
  for (let i = 1; i < 10; i++) {
    const x = (w * i) / 10;
    ctx.moveTo(x, 0);
    ctx.lineTo(x, h);
  }
  for (let j = 1; j < 6; j++) {
    const y = (h * j) / 6;
    ctx.moveTo(0, y);
    ctx.lineTo(w, y);
  }
  ctx.stroke();
}

function polyline(
  ctx: CanvasRenderingContext2D,
  xs: number[],
  ys: number[],
  sx: Scale,
  sy: Scale,
  i0 = 0,
  i1 = xs.length,
): void {
  ctx.strokeStyle = TRACE;
  ctx.lineWidth = 1.4;
  ctx.beginPath();
  let started = false;
  for (let i = i0; i < i1; i++) {
    const x = sx(xs[i]);
    const y = sy(ys[i]);
    if (!started) {
      ctx.moveTo(x, y);
      started = true;
    } else {
      ctx.lineTo(x, y);
    }
  }
  ctx.stroke();
}

function dashedVertical(
  ctx: CanvasRenderingContext2D,
  x: number,
  h: number,
  color = MARKER,
): void {
  ctx.save();
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.setLineDash([5, 4]);
  ctx.beginPath();
  ctx.moveTo(x, 0);
  ctx.lineTo(x, h);
  ctx.stroke();
  ctx.restore();
}

export function drawMagnitude(canvas: HTMLCanvasElement, vm: VnaReady): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width: w, height: h } = canvas;
  clearPlot(ctx, w, h);
  gridLines(ctx, w, h);

  const f0 = vm.freqHz[0];
  const f1 = vm.freqHz[vm.freqHz.length - 1];
  let magLo = 0;
  for (const m of vm.magDb) if (m < magLo) magLo = m;
  const sx = linScale(f0, f1, 8, w - 8);
  const sy = linScale(magLo - 2, 1, h - 16, 10);

  // half-power band edges, then the trace, then the dip marker on top
  dashedVertical(ctx, sx(vm.halfPowerLoHz), h);
  dashedVertical(ctx, sx(vm.halfPowerHiHz), h);
  polyline(ctx, vm.freqHz, vm.magDb, sx, sy);

  ctx.fillStyle = MARKER;
  ctx.beginPath();
  ctx.arc(sx(vm.dipFreqHz), sy(vm.dipMagDb), 3.5, 0, 2 * Math.PI);
  ctx.fill();

  ctx.fillStyle = TEXT;
  ctx.font = "12px monospace";
  ctx.fillText(`dip ${fmtFreq(vm.dipFreqHz)}  ${vm.dipMagDb.toFixed(2)} dB`, 10, 14);
  ctx.fillText(`Q loaded ${vm.qLoaded.toFixed(1)}`, 10, 28);
}

export function drawPolar(canvas: HTMLCanvasElement, vm: VnaReady): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width: w, height: h } = canvas;
  clearPlot(ctx, w, h);

  const cx = w / 2;
  const cy = h / 2;
  // the outer circle is always the unit circle, whatever the trace does
  const R = Math.min(w, h) / 2 - 10;

  ctx.strokeStyle = GRID;
  ctx.lineWidth = 1;
  ctx.beginPath();
  ctx.arc(cx, cy, R, 0, 2 * Math.PI);
  ctx.moveTo(cx - R, cy);
  ctx.lineTo(cx + R, cy);
  ctx.moveTo(cx, cy - R);
  ctx.lineTo(cx, cy + R);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(cx, cy, R / 2, 0, 2 * Math.PI);
  ctx.stroke();

  ctx.strokeStyle = TRACE;
  ctx.lineWidth = 1.4;
  ctx.beginPath();
  for (let i = 0; i < vm.re.length; i++) {
    const x = cx + vm.re[i] * R;
    const y = cy - vm.im[i] * R;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();

  ctx.fillStyle = TEXT;
  ctx.font = "12px monospace";
  ctx.fillText(vm.coupling, 10, h - 10);
  ctx.fillText(`min |S11| ${vm.polarMinRadius.toFixed(3)}`, 10, 14);
}

export function drawScope(canvas: HTMLCanvasElement, vm: ScopeReady): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width: w, height: h } = canvas;
  clearPlot(ctx, w, h);
  gridLines(ctx, w, h);

  let vMax = 0;
  for (let i = vm.i0; i < vm.i1; i++) {
    const a = Math.abs(vm.vVolts[i]);
    if (a > vMax) vMax = a;
  }
  if (vMax === 0) vMax = 1e-6;
  const sx = linScale(vm.windowT0, vm.windowT1, 0, w);
  const sy = linScale(-vMax, vMax, h - 6, 6);
  polyline(ctx, vm.tS, vm.vVolts, sx, sy, vm.i0, vm.i1);

  ctx.fillStyle = TEXT;
  ctx.font = "12px monospace";
  const span = vm.windowT1 - vm.windowT0;
  ctx.fillText(
    `window ${fmtTimeAxis(span)} from ${fmtTimeAxis(vm.windowT0)}`,
    10,
    14,
  );
}

export function drawSpectrum(canvas: HTMLCanvasElement, vm: SpectrumReady): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width: w, height: h } = canvas;
  clearPlot(ctx, w, h);
  gridLines(ctx, w, h);

  const f0 = vm.freqHz[0];
  const f1 = vm.freqHz[vm.freqHz.length - 1];
  const sx = linScale(f0, f1, 0, w);
  const sy = linScale(0, 1.05, h - 6, 6);

  if (vm.markerLoHz !== null) dashedVertical(ctx, sx(vm.markerLoHz), h);
  if (vm.markerHiHz !== null) dashedVertical(ctx, sx(vm.markerHiHz), h);
  polyline(ctx, vm.freqHz, vm.psdNorm, sx, sy);
}
