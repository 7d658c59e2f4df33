// Top-down scene renderer. Pure drawing against a 2D context interface so
// tests can record calls without a real canvas.

import type { SceneSnapshot, PlanSnapshot } from './types.js';
import { fitViewport, worldToCanvas, type Viewport } from './viewport.js';

export interface Context2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  globalAlpha: number;
}

const FIXED_COLOR = '#b0a999';
const MOVABLE_COLOR = '#5a8fd6';
const DOOR_COLOR = '#c25b4e';
const ROBOT_COLOR = '#2e7d32';

export function labelObjects(scene: SceneSnapshot): Map<string, string> {
  // name1..nameK left to right along +y, mirroring the perception labeling
  const labels = new Map<string, string>();
  const byName = new Map<string, typeof scene.objects>();
  for (const obj of scene.objects) {
    if (obj.fixed) continue;
    const group = byName.get(obj.name) ?? [];
    group.push(obj);
    byName.set(obj.name, group);
  }
  for (const [name, group] of byName) {
    const ranked = [...group].sort((a, b) => a.position[1] - b.position[1]);
    ranked.forEach((obj, index) => labels.set(obj.id, `${name}${index + 1}`));
  }
  return labels;
}

export function drawScene(ctx: Context2D, scene: SceneSnapshot, vp: Viewport): void {
  ctx.clearRect(0, 0, vp.width, vp.height);
  const labels = labelObjects(scene);
  ctx.font = '11px sans-serif';
  for (const obj of scene.objects) {
    const [cx, cy] = worldToCanvas(vp, obj.position[0], obj.position[1]);
    const w = obj.size[1] * vp.scale;
    const h = obj.size[0] * vp.scale;
    ctx.globalAlpha = obj.fixed ? 0.45 : 0.9;
    ctx.fillStyle = obj.fixed ? FIXED_COLOR : MOVABLE_COLOR;
    ctx.fillRect(cx - w / 2, cy - h / 2, w, h);
    ctx.globalAlpha = 1.0;
    ctx.fillStyle = '#222';
    ctx.fillText(labels.get(obj.id) ?? obj.name, cx - w / 2, cy - h / 2 - 3);
    if (obj.articulated && obj.handle) {
      // the door as a line from its hinge region to the handle
      const [hx, hy] = worldToCanvas(vp, obj.handle[0], obj.handle[1]);
      ctx.strokeStyle = DOOR_COLOR;
      ctx.lineWidth = 3;
      ctx.beginPath();
      ctx.moveTo(cx, cy);
      ctx.lineTo(hx, hy);
      ctx.stroke();
      if (obj.powered) {
        ctx.fillStyle = '#e69f00';
        ctx.fillText('ON', cx, cy);
      }
    }
  }
  const [bx, by] = worldToCanvas(vp, scene.robot.base[0], scene.robot.base[1]);
  ctx.fillStyle = ROBOT_COLOR;
  ctx.beginPath();
  ctx.arc(bx, by, 9, 0, Math.PI * 2);
  ctx.fill();
  const [ex, ey] = worldToCanvas(vp, scene.robot.ee[0], scene.robot.ee[1]);
  ctx.strokeStyle = ROBOT_COLOR;
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(bx, by);
  ctx.lineTo(ex, ey);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(ex, ey, 4, 0, Math.PI * 2);
  ctx.stroke();
  ctx.fillStyle = '#222';
  ctx.fillText(`ee z=${scene.robot.ee[2].toFixed(2)}m grip=${scene.robot.aperture.toFixed(2)}`,
    8, vp.height - 8);
}

export function drawPlanCursor(ctx: Context2D, plan: PlanSnapshot,
                               cursor: [number, number], x: number, y: number): void {
  ctx.font = '12px monospace';
  let line = 0;
  plan.subtasks.forEach((subtask, si) => {
    const marker = si === cursor[0] ? '>' : ' ';
    ctx.fillStyle = si === cursor[0] ? '#000' : '#666';
    ctx.fillText(`${marker} ${subtask.description}`, x, y + 14 * line);
    line += 1;
    subtask.motions.forEach((motion, mi) => {
      const active = si === cursor[0] && mi === cursor[1];
      ctx.fillStyle = active ? '#c25b4e' : '#888';
      ctx.fillText(`${active ? '->' : '  '} ${motion}`, x + 12, y + 14 * line);
      line += 1;
    });
  });
}

export function drawDisconnectedWatermark(ctx: Context2D, vp: Viewport): void {
  ctx.globalAlpha = 0.6;
  ctx.fillStyle = '#c25b4e';
  ctx.font = 'bold 22px sans-serif';
  ctx.fillText('DISCONNECTED - state may be stale', 20, 34);
  ctx.globalAlpha = 1.0;
}

export function makeViewport(scene: SceneSnapshot, width: number, height: number): Viewport {
  return fitViewport(scene, width, height);
}
