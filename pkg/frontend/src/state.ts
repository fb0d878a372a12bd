// Explorer state plus the two pieces of request discipline the live slider
// needs: debounced sends and last-response-wins sequence numbers.

import { DecodeResponse, RationalityResponse } from './api.js';

export interface ExplorerState {
  z: number[];
  encounter: DecodeResponse | null;
  profiles: RationalityResponse | null;
  playbackIndex: number;
  offline: boolean;
}

export function createState(k: number): ExplorerState {
  return {
    z: new Array<number>(k).fill(0),
    encounter: null,
    profiles: null,
    playbackIndex: 0,
    offline: false,
  };
}

/** Monotonic sequence gate: stale responses are discarded, never rendered. */
export class ResponseGate {
  private nextSeq = 0;
  private lastApplied = -1;

  issue(): number {
    return this.nextSeq++;
  }

  /** True exactly when `seq` is newer than anything applied so far. */
  shouldApply(seq: number): boolean {
    if (seq <= this.lastApplied) {
      return false;
    }
    this.lastApplied = seq;
    return true;
  }
}

export type Scheduler = (fn: () => void, ms: number) => unknown;
export type Canceller = (handle: unknown) => void;

/**
 * Trailing-edge debounce: the wrapped call runs once, `ms` after the last
 * invocation in a burst. Injectable timers keep it testable.
 */
export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  ms: number,
  schedule: Scheduler = (f, t) => setTimeout(f, t),
  cancel: Canceller = (h) => clearTimeout(h as number),
): (...args: A) => void {
  let pending: unknown = null;
  return (...args: A) => {
    if (pending !== null) {
      cancel(pending);
    }
    pending = schedule(() => {
      pending = null;
      fn(...args);
    }, ms);
  };
}
