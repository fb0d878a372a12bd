// Latent-code traversal playback: one code runs across a uniform grid with
// exact endpoints (21 frames at the defaults) while all others hold still.

export function traversalValues(lo = -1, hi = 1, step = 0.1): number[] {
  if (step <= 0 || hi < lo) {
    throw new Error(`bad traversal range [${lo}, ${hi}] step ${step}`);
  }
  const n = Math.max(1, Math.round((hi - lo) / step));
  const values: number[] = [];
  for (let i = 0; i < n; i++) {
    values.push(lo + (hi - lo) * (i / n));
  }
  values.push(hi);
  return values;
}

export interface PlayerHooks {
  onFrame: (index: number, value: number) => void;
  onDone?: () => void;
}

export type Scheduler = (fn: () => void, ms: number) => unknown;
export type Canceller = (handle: unknown) => void;

/** Steps through traversal values on a timer; supports pause and scrub. */
export class TraversalPlayer {
  readonly values: number[];
  private index = 0;
  private timer: unknown = null;

  constructor(
    private readonly hooks: PlayerHooks,
    lo = -1,
    hi = 1,
    step = 0.1,
    private readonly frameMs = 150,
    private readonly schedule: Scheduler = (f, t) => setTimeout(f, t),
    private readonly cancel: Canceller = (h) => clearTimeout(h as number),
  ) {
    this.values = traversalValues(lo, hi, step);
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  get frame(): number {
    return this.index;
  }

  play(): void {
    if (this.timer !== null) {
      return;
    }
    const tick = (): void => {
      this.hooks.onFrame(this.index, this.values[this.index]);
      if (this.index >= this.values.length - 1) {
        this.timer = null;
        this.hooks.onDone?.();
        return;
      }
      this.index += 1;
      this.timer = this.schedule(tick, this.frameMs);
    };
    this.timer = this.schedule(tick, 0);
  }

  pause(): void {
    if (this.timer !== null) {
      this.cancel(this.timer);
      this.timer = null;
    }
  }

  scrub(index: number): void {
    this.pause();
    this.index = Math.min(Math.max(index, 0), this.values.length - 1);
    this.hooks.onFrame(this.index, this.values[this.index]);
  }

  reset(): void {
    this.pause();
    this.index = 0;
  }
}
