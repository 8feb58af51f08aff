/** Linear and log10 axis scales with simple tick selection. */

export interface Scale {
  toPx(v: number): number;
  ticks(): Array<{ v: number; label: string }>;
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.001) {
    return v.toExponential(1).replace("+", "");
  }
  const s = v.toPrecision(3);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

export function linearScale(lo: number, hi: number, pxLo: number, pxHi: number): Scale {
  if (!(hi > lo)) hi = lo + 1;
  const span = hi - lo;
  const step = niceStep(span / 5);
  const first = Math.ceil(lo / step) * step;
  return {
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: () => {
      const out: Array<{ v: number; label: string }> = [];
      for (let t = first; t <= hi + 1e-9 * span; t += step) {
        const v = Math.abs(t) < 1e-12 * span ? 0 : t;
        out.push({ v, label: fmt(v) });
      }
      return out;
    },
  };
}

function niceStep(raw: number): number {
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const r = raw / mag;
  if (r <= 1) return mag;
  if (r <= 2) return 2 * mag;
  if (r <= 5) return 5 * mag;
  return 10 * mag;
}

/** Log10 scale; ticks at powers of two when the data are powers of two
 * (dimension axes), otherwise at decades. */
export function logScale(lo: number, hi: number, pxLo: number, pxHi: number, powersOfTwo = false): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  return {
    toPx: (v) => pxLo + ((Math.log10(v) - llo) / span) * (pxHi - pxLo),
    ticks: () => {
      const out: Array<{ v: number; label: string }> = [];
      if (powersOfTwo) {
        const kLo = Math.ceil(Math.log2(lo) - 1e-9);
        const kHi = Math.floor(Math.log2(hi) + 1e-9);
        const stride = Math.max(1, Math.ceil((kHi - kLo) / 7));
        for (let k = kLo; k <= kHi; k += stride) {
          const v = Math.pow(2, k);
          out.push({ v, label: fmt(v) });
        }
      } else {
        for (let e = Math.ceil(llo - 1e-9); e <= Math.floor(lhi + 1e-9); e++) {
          out.push({ v: Math.pow(10, e), label: e >= -3 && e <= 3 ? fmt(Math.pow(10, e)) : `1e${e}` });
        }
        if (out.length < 2) {
          // narrow range: fall back to 1-2-5 mantissa ticks
          out.length = 0;
          for (let e = Math.floor(llo) - 1; e <= Math.ceil(lhi) + 1; e++) {
            for (const m of [1, 2, 5]) {
              const v = m * Math.pow(10, e);
              if (v >= lo / 1.0001 && v <= hi * 1.0001) out.push({ v, label: fmt(v) });
            }
          }
        }
      }
      return out;
    },
  };
}
