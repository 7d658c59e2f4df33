// Canvas <-> world mapping for the top-down view. The robot looks along +x,
// which points up on screen; the lateral +y axis runs left to right.

import type { SceneSnapshot } from './types.js';

export interface Viewport {
  scale: number; // pixels per meter
  worldX0: number; // world x at the bottom edge
  worldY0: number; // world y at the left edge
  width: number;
  height: number;
}

export function fitViewport(scene: SceneSnapshot, width: number, height: number,
                            marginPx = 30): Viewport {
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  const include = (x: number, y: number) => {
    minX = Math.min(minX, x); maxX = Math.max(maxX, x);
    minY = Math.min(minY, y); maxY = Math.max(maxY, y);
  };
  for (const obj of scene.objects) {
    include(obj.position[0] - obj.size[0] / 2, obj.position[1] - obj.size[1] / 2);
    include(obj.position[0] + obj.size[0] / 2, obj.position[1] + obj.size[1] / 2);
  }
  include(scene.robot.base[0], scene.robot.base[1]);
  include(scene.robot.ee[0], scene.robot.ee[1]);
  const spanX = Math.max(maxX - minX, 0.1);
  const spanY = Math.max(maxY - minY, 0.1);
  const scale = Math.min(
    (height - 2 * marginPx) / spanX,
    (width - 2 * marginPx) / spanY,
  );
  return {
    scale,
    worldX0: minX - marginPx / scale,
    worldY0: minY - marginPx / scale,
    width,
    height,
  };
}

/** World (x, y) to canvas pixels: +x up, +y right. */
export function worldToCanvas(vp: Viewport, x: number, y: number): [number, number] {
  return [
    (y - vp.worldY0) * vp.scale,
    vp.height - (x - vp.worldX0) * vp.scale,
  ];
}

export function canvasToWorld(vp: Viewport, px: number, py: number): [number, number] {
  return [
    (vp.height - py) / vp.scale + vp.worldX0,
    px / vp.scale + vp.worldY0,
  ];
}
