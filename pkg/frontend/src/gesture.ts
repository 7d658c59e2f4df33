// Pointer-drag demonstration capture: canvas points plus the height slider
// and aperture toggle become world end-effector samples, resampled so the
// stream never exceeds 60 Hz.

import type { DemoSampleFrame } from './types.js';
import { canvasToWorld, type Viewport } from './viewport.js';

export const MAX_STREAM_HZ = 60;

export interface PointerSample {
  timeMs: number;
  px: number;
  py: number;
  /** world z from the height slider at this instant; a drag may ride the
      slider to draw vertical arcs (a drop-down oven door) */
  z?: number;
}

export interface GestureCapture {
  pointer: PointerSample[];
  height: number; // slider value when the drag began, the default z
  apertureEvents: { timeMs: number; aperture: number }[];
}

export function newCapture(height: number): GestureCapture {
  return { pointer: [], height, apertureEvents: [] };
}

export function addPoint(capture: GestureCapture, sample: PointerSample): void {
  capture.pointer.push(sample);
}

export function setAperture(capture: GestureCapture, timeMs: number, aperture: number): void {
  capture.apertureEvents.push({ timeMs, aperture });
}

function apertureAt(capture: GestureCapture, timeMs: number): number {
  let value = 1.0;
  for (const event of capture.apertureEvents) {
    if (event.timeMs <= timeMs) value = event.aperture;
  }
  return value;
}

/**
 * Resample the capture to at most 60 Hz and convert to demo_sample frames.
 * Timestamps are seconds from the first retained point; points closer than
 * the minimum interval to the previously retained one are dropped (the last
 * point always survives so the stream ends where the finger did).
 */
export function toDemoFrames(capture: GestureCapture, vp: Viewport): DemoSampleFrame[] {
  const minIntervalMs = 1000 / MAX_STREAM_HZ;
  const retained: PointerSample[] = [];
  for (const point of capture.pointer) {
    const last = retained[retained.length - 1];
    if (!last || point.timeMs - last.timeMs >= minIntervalMs - 1e-9) {
      retained.push(point);
    }
  }
  const tail = capture.pointer[capture.pointer.length - 1];
  if (tail && retained[retained.length - 1] !== tail) {
    retained.push(tail);
  }
  if (!retained.length) return [];
  const t0 = retained[0].timeMs;
  return retained.map((point) => {
    const [x, y] = canvasToWorld(vp, point.px, point.py);
    return {
      type: 'demo_sample' as const,
      t: (point.timeMs - t0) / 1000,
      x,
      y,
      z: point.z ?? capture.height,
      aperture: apertureAt(capture, point.timeMs),
    };
  });
}

/** Streaming rate of a frame list in Hz (0 for degenerate streams). */
export function streamRate(frames: DemoSampleFrame[]): number {
  if (frames.length < 2) return 0;
  const span = frames[frames.length - 1].t - frames[0].t;
  return span > 0 ? (frames.length - 1) / span : Infinity;
}
