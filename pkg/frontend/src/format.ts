export function fmtFreq(hz: number): string {
  const a = Math.abs(hz);
  if (a >= 1e9) return `${(hz / 1e9).toFixed(6)} GHz`;
  if (a >= 1e6) return `${(hz / 1e6).toFixed(3)} MHz`;
  if (a >= 1e3) return `${(hz / 1e3).toFixed(1)} kHz`;
  return `${hz.toFixed(0)} Hz`;
}

export function fmtMhz(hz: number): string {
  return `${(hz / 1e6).toFixed(3)} MHz`;
}

export function fmtKhz(khz: number | null): string {
  return khz === null ? "-" : `${khz.toFixed(1)} kHz`;
}

export function fmtDbm(v: number | null): string {
  return v === null ? "-" : `${v.toFixed(2)} dBm`;
}

export function fmtUs(us: number | null): string {
  return us === null ? "-" : `${us.toFixed(2)} µs`;
}

export function fmtRabiMhz(mhz: number | null): string {
  return mhz === null ? "-" : `${mhz.toFixed(3)} MHz`;
}

export function fmtVolts(v: number | null): string {
  if (v === null) return "-";
  return Math.abs(v) >= 1 ? `${v.toFixed(3)} V` : `${(v * 1e3).toFixed(2)} mV`;
}

export function fmtTimeAxis(s: number): string {
  const a = Math.abs(s);
  if (a >= 1e-3) return `${(s * 1e3).toFixed(2)} ms`;
  if (a >= 1e-6) return `${(s * 1e6).toFixed(2)} µs`;
  return `${(s * 1e9).toFixed(1)} ns`;
}
