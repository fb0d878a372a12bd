import { describe, expect, it } from 'vitest';

import { TraversalPlayer, traversalValues } from '../src/traversal.js';

describe('traversalValues', () => {
  it('produces 21 frames at the defaults with exact endpoints', () => {
    const values = traversalValues();
    expect(values).toHaveLength(21);
    expect(values[0]).toBe(-1);
    expect(values[20]).toBe(1);
    expect(values[10]).toBe(0);
    for (let i = 1; i < values.length; i++) {
      expect(values[i] - values[i - 1]).toBeCloseTo(0.1, 12);
    }
  });

  it('keeps both endpoints when the step exceeds the range', () => {
    expect(traversalValues(-1, 1, 5)).toEqual([-1, 1]);
  });

  it('rejects non-positive steps', () => {
    expect(() => traversalValues(-1, 1, 0)).toThrow();
  });
});

function manualTimers() {
  const queue: Array<{ fn: () => void; id: number }> = [];
  let nextId = 1;
  return {
    schedule: (fn: () => void): unknown => {
      const id = nextId++;
      queue.push({ fn, id });
      return id;
    },
    cancel: (handle: unknown): void => {
      const idx = queue.findIndex((q) => q.id === handle);
      if (idx >= 0) {
        queue.splice(idx, 1);
      }
    },
    tick: (): boolean => {
      const next = queue.shift();
      if (!next) {
        return false;
      }
      next.fn();
      return true;
    },
  };
}

describe('TraversalPlayer', () => {
  it('visits every frame in order and finishes', () => {
    const timers = manualTimers();
    const seen: number[] = [];
    let done = false;
    const player = new TraversalPlayer(
      { onFrame: (_i, v) => seen.push(v), onDone: () => { done = true; } },
      -1, 1, 0.1, 0, timers.schedule, timers.cancel,
    );
    player.play();
    while (timers.tick()) { /* drain */ }
    expect(seen).toHaveLength(21);
    expect(seen[0]).toBe(-1);
    expect(seen[20]).toBe(1);
    expect(done).toBe(true);
    expect(player.playing).toBe(false);
  });

  it('pause stops the timer and scrub jumps to an exact frame', () => {
    const timers = manualTimers();
    const seen: Array<[number, number]> = [];
    const player = new TraversalPlayer(
      { onFrame: (i, v) => seen.push([i, v]) },
      -1, 1, 0.1, 0, timers.schedule, timers.cancel,
    );
    player.play();
    timers.tick();
    timers.tick();
    player.pause();
    expect(player.playing).toBe(false);
    const before = seen.length;
    while (timers.tick()) { /* nothing should run */ }
    expect(seen.length).toBe(before);

    player.scrub(0);
    expect(seen[seen.length - 1]).toEqual([0, -1]); // frame 0 is value -1
    player.scrub(999);
    expect(seen[seen.length - 1]).toEqual([20, 1]); // clamped to last frame
  });
});
