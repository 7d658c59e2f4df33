// Console wiring: submit tasks, watch execution, answer questions, pause,
// draw demonstrations, name and commit skills, browse the library.

import { SessionApi, StreamHandle } from './api.js';
import {
  addPoint,
  newCapture,
  setAperture,
  toDemoFrames,
  type GestureCapture,
} from './gesture.js';
import {
  applyFrame,
  applySnapshots,
  emptyView,
  setConnected,
  type ViewModel,
} from './store.js';
import {
  drawDisconnectedWatermark,
  drawPlanCursor,
  drawScene,
  makeViewport,
  type Context2D,
} from './canvas.js';

const api = new SessionApi(location.origin.replace(/\/$/, ''));
let view: ViewModel = emptyView();
let stream: StreamHandle | null = null;
let capture: GestureCapture | null = null;

const sceneCanvas = document.getElementById('scene') as HTMLCanvasElement;
const planCanvas = document.getElementById('plan') as HTMLCanvasElement;
const phaseEl = document.getElementById('phase')!;
const questionEl = document.getElementById('question')!;
const outcomeEl = document.getElementById('outcome')!;
const logEl = document.getElementById('log')!;
const libraryEl = document.getElementById('library')!;
const commitBox = document.getElementById('commit-box')!;
const skillNameInput = document.getElementById('skill-name') as HTMLInputElement;
const heightSlider = document.getElementById('height') as HTMLInputElement;
const gripToggle = document.getElementById('grip') as HTMLInputElement;

function render(): void {
  phaseEl.textContent = view.phase;
  questionEl.textContent = view.question ?? '';
  (questionEl as HTMLElement).style.display = view.question ? 'block' : 'none';
  if (view.lastOutcome) {
    const o = view.lastOutcome;
    outcomeEl.textContent =
      `${o.task_text}: ${o.success ? 'success' : 'failed'}` +
      (o.failure_reason ? ` (${o.failure_reason})` : '');
  }
  logEl.textContent = view.logTail.slice(-12).join('\n');
  libraryEl.textContent = view.library.skills
    .map((s) => `${s.name} v${s.version}`)
    .join('\n') || '(empty)';
  if (view.recordingId) {
    (commitBox as HTMLElement).style.display = 'block';
    if (!skillNameInput.value && view.proposedSkillName) {
      skillNameInput.value = view.proposedSkillName;
    }
  } else {
    (commitBox as HTMLElement).style.display = 'none';
  }
  if (view.scene) {
    const ctx = sceneCanvas.getContext('2d') as unknown as Context2D;
    const vp = makeViewport(view.scene, sceneCanvas.width, sceneCanvas.height);
    drawScene(ctx, view.scene, vp);
    if (!view.connected) drawDisconnectedWatermark(ctx, vp);
    const planCtx = planCanvas.getContext('2d') as unknown as Context2D;
    planCtx.clearRect(0, 0, planCanvas.width, planCanvas.height);
    if (view.plan) drawPlanCursor(planCtx, view.plan, view.cursor, 8, 18);
  }
}

async function reloadSnapshots(): Promise<void> {
  const [state, scene, plan, library] = await Promise.all([
    api.getState(), api.getScene(), api.getPlan(), api.getLibrary(),
  ]);
  view = applySnapshots(view, state, scene, plan, library);
  render();
}

function connect(): void {
  stream = api.connectStream(
    (frame) => {
      view = applyFrame(setConnected(view, true), frame);
      if (frame.type === 'state') void refreshAuxiliary();
      render();
    },
    () => {
      view = setConnected(view, false);
      render();
      setTimeout(connect, 1500); // reconnect banner until this lands
    },
  );
}

async function refreshAuxiliary(): Promise<void> {
  // plan and library change only on state transitions; refetch then
  const [plan, library] = await Promise.all([api.getPlan(), api.getLibrary()]);
  view = { ...view, plan, library };
  render();
}

function canvasPoint(event: PointerEvent): { px: number; py: number } {
  const rect = sceneCanvas.getBoundingClientRect();
  return { px: event.clientX - rect.left, py: event.clientY - rect.top };
}

function wire(): void {
  document.getElementById('submit')!.addEventListener('click', async () => {
    const input = document.getElementById('task') as HTMLInputElement;
    if (input.value.trim()) await api.submitTask(input.value.trim());
  });
  document.getElementById('pause')!.addEventListener('click', () => api.pause());
  document.getElementById('resume')!.addEventListener('click', () => api.resume());
  document.getElementById('answer')!.addEventListener('click', async () => {
    const input = document.getElementById('clarify') as HTMLInputElement;
    if (input.value.trim()) await api.clarify(input.value.trim());
  });
  document.getElementById('commit')!.addEventListener('click', async () => {
    if (!view.recordingId) return;
    await api.commitSkill(view.recordingId, skillNameInput.value || undefined);
    skillNameInput.value = '';
    await refreshAuxiliary();
  });
  document.getElementById('discard')!.addEventListener('click', () => {
    skillNameInput.value = '';
    void reloadSnapshots();
  });

  sceneCanvas.addEventListener('pointerdown', (event) => {
    if (view.phase !== 'paused' && view.phase !== 'demonstrating') return;
    capture = newCapture(parseFloat(heightSlider.value));
    setAperture(capture, event.timeStamp, gripToggle.checked ? 0.0 : 1.0);
    addPoint(capture, { timeMs: event.timeStamp, z: parseFloat(heightSlider.value), ...canvasPoint(event) });
    sceneCanvas.setPointerCapture(event.pointerId);
  });
  sceneCanvas.addEventListener('pointermove', (event) => {
    if (!capture) return;
    addPoint(capture, { timeMs: event.timeStamp, z: parseFloat(heightSlider.value), ...canvasPoint(event) });
  });
  sceneCanvas.addEventListener('pointerup', () => {
    if (!capture || !view.scene || !stream) return;
    const vp = makeViewport(view.scene, sceneCanvas.width, sceneCanvas.height);
    for (const frame of toDemoFrames(capture, vp)) stream.send(frame);
    stream.send({ type: 'demo_end' });
    capture = null;
  });
  gripToggle.addEventListener('change', () => {
    if (capture) setAperture(capture, performance.now(), gripToggle.checked ? 0.0 : 1.0);
  });
}

void (async () => {
  wire();
  await reloadSnapshots();
  connect();
})();
