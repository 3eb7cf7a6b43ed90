/** Bounded ring buffer for chart signals plus the decimator that maps
 * it onto a pixel column grid. History older than the capacity falls
 * off the front; memory never grows past the bound.
 */

export class RingBuffer {
  private t: Float64Array;
  private v: Float64Array;
  private head = 0; // next write slot
  private count = 0;

  constructor(readonly capacity = 2000) {
    if (!Number.isInteger(capacity) || capacity <= 0) {
      throw new RangeError(`capacity must be a positive int, got ${capacity}`);
    }
    this.t = new Float64Array(capacity);
    this.v = new Float64Array(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(t: number, value: number): void {
    this.t[this.head] = t;
    this.v[this.head] = value;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count++;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
  }

  at(i: number): { t: number; v: number } {
    if (i < 0 || i >= this.count) throw new RangeError(`index ${i}`);
    const k = (this.head - this.count + i + this.capacity * 2) % this.capacity;
    return { t: this.t[k]!, v: this.v[k]! };
  }

  first(): { t: number; v: number } | null {
    return this.count ? this.at(0) : null;
  }

  last(): { t: number; v: number } | null {
    return this.count ? this.at(this.count - 1) : null;
  }
}

export interface Column {
  x: number;
  min: number;
  max: number;
  last: number;
}

/** Min/max-preserving decimation of a ring onto `width` columns covering
 * [t0, t1]. Spikes survive: each column keeps the extremes of samples
 * that landed in it. Columns without samples are omitted.
 */
export function decimate(
  buf: RingBuffer, t0: number, t1: number, width: number,
): Column[] {
  if (width <= 0 || t1 <= t0) return [];
  const cols = new Map<number, Column>();
  const scale = width / (t1 - t0);
  for (let i = 0; i < buf.length; i++) {
    const { t, v } = buf.at(i);
    if (t < t0 || t > t1 || !Number.isFinite(v)) continue;
    const x = Math.min(width - 1, Math.floor((t - t0) * scale));
    const c = cols.get(x);
    if (!c) {
      cols.set(x, { x, min: v, max: v, last: v });
    } else {
      if (v < c.min) c.min = v;
      if (v > c.max) c.max = v;
      c.last = v;
    }
  }
  return [...cols.values()].sort((a, b) => a.x - b.x);
}
