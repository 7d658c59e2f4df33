// End-to-end console flow against the real session service: load, submit
// "Open the oven", watch it fail, pause, draw the oven-arc gesture, accept
// the proposed skill name, resubmit, observe success; then verify that a
// page reload reconstructs the identical view from the GET endpoints.
//
// The service is the actual Python process; this suite talks to it only
// through the same api/store/gesture modules the browser console uses.

import { spawn, type ChildProcess } from 'node:child_process';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';
import WebSocket from 'ws';

import { SessionApi, type FetchLike, type SocketLike } from '../src/api.js';
import { addPoint, newCapture, toDemoFrames } from '../src/gesture.js';
import {
  applyFrame,
  applySnapshots,
  comparableView,
  emptyView,
  setConnected,
  type ViewModel,
} from '../src/store.js';
import { fitViewport, worldToCanvas } from '../src/viewport.js';
import type { SceneSnapshot, ServerFrame } from '../src/types.js';

const PORT = 8891;
const BASE = `http://127.0.0.1:${PORT}`;

const SERVER_SCRIPT = `
import tempfile
from hrcbot.library import SkillLibrary
from hrcbot.scene import build_kitchen_scene
from hrcbot.service import serve
from hrcbot.session import Session

session = Session(build_kitchen_scene(), SkillLibrary(tempfile.mkdtemp()))
serve(session, host="127.0.0.1", port=${PORT}, motion_delay=0.1)
`;

let server: ChildProcess;
const nodeFetch = fetch as unknown as FetchLike;
const wsFactory = (url: string) => new WebSocket(url) as unknown as SocketLike;

function api(): SessionApi {
  return new SessionApi(BASE, nodeFetch, wsFactory);
}

async function serverReady(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await api().getState();
      return;
    } catch {
      if (Date.now() > deadline) throw new Error('service never came up');
      await new Promise((resolve) => setTimeout(resolve, 150));
    }
  }
}

beforeAll(async () => {
  server = spawn('python3', ['-c', SERVER_SCRIPT], { stdio: 'ignore' });
  await serverReady();
});

afterAll(() => {
  server?.kill();
});

function ovenArcGesture(scene: SceneSnapshot, width: number, height: number) {
  // trace the handle arc: hinge at the axis, handle swinging forward and down
  const oven = scene.objects.find((o) => o.name === 'oven')!;
  const axis = oven.axis_position!;
  const handle = oven.handle!;
  const radius = Math.hypot(handle[0] - axis[0], handle[2] - axis[2]);
  const vp = fitViewport(scene, width, height);
  const capture = newCapture(handle[2]);
  const steps = 90;
  for (let k = 0; k <= steps; k += 1) {
    const theta = (k / steps) * (oven.open_angle ?? Math.PI / 2);
    const x = axis[0] - radius * Math.sin(theta);
    const z = axis[2] + radius * Math.cos(theta);
    const [px, py] = worldToCanvas(vp, x, handle[1]);
    addPoint(capture, { timeMs: (k * 3000) / steps, px, py, z });
  }
  return toDemoFrames(capture, vp);
}

function roundScene(scene: SceneSnapshot): SceneSnapshot {
  const r = (v: number) => Math.round(v * 1e6) / 1e6;
  return JSON.parse(JSON.stringify(scene, (key, value) =>
    typeof value === 'number' ? r(value) : value)) as SceneSnapshot;
}

describe('console end to end', () => {
  it('teaches the oven through the drawn gesture and replays it', async () => {
    const client = api();
    let view: ViewModel = emptyView();

    // initial console load
    const [state0, scene0, plan0, library0] = await Promise.all([
      client.getState(), client.getScene(), client.getPlan(), client.getLibrary(),
    ]);
    view = applySnapshots(view, state0, scene0, plan0, library0);
    expect(view.phase).toBe('idle');
    expect(view.library.skills).toHaveLength(0);

    // stream connection mirrors server frames into the view
    const frames: ServerFrame[] = [];
    const stream = client.connectStream((frame) => {
      frames.push(frame);
      view = applyFrame(setConnected(view, true), frame);
    });
    await new Promise((resolve) => setTimeout(resolve, 300));

    // zero-shot attempt fails on the horizontal hinge
    await client.submitTask('Open the oven');
    let state = await client.waitForSettle();
    expect(state.phase).toBe('idle');
    expect(state.last_outcome?.success).toBe(false);
    expect(state.last_outcome?.failure_reason).toContain('wrong-articulation');

    // supervise again, pause at the first motion boundary
    await client.submitTask('Open the oven');
    await client.pause();
    state = await client.getState();
    expect(state.phase).toBe('paused');

    // draw the arc; frames stream over the socket and the robot mirrors them
    const scene1 = await client.getScene();
    for (const frame of ovenArcGesture(scene1, 640, 560)) stream.send(frame);
    stream.send({ type: 'demo_end' });
    const recordingDeadline = Date.now() + 15000;
    for (;;) {
      state = await client.getState();
      if (state.recording_id) break;
      if (Date.now() > recordingDeadline) throw new Error('recording never registered');
      await new Promise((resolve) => setTimeout(resolve, 50));
    }
    expect(state.proposed_skill_name).toBe('open_oven_handle');

    // accept the proposal, resume; the demonstrated sub-task is already done
    await client.commitSkill(state.recording_id!);
    await client.resume();
    state = await client.waitForSettle();
    expect(state.phase).toBe('idle');
    expect(state.last_outcome?.success).toBe(true);
    const library = await client.getLibrary();
    expect(library.skills.map((s) => s.name)).toContain('open_oven_handle');

    // resubmit: the plan is now the pure skill replay, and it succeeds
    await client.submitTask('Open the oven');
    state = await client.waitForSettle();
    expect(state.last_outcome?.success).toBe(true);
    const plan = await client.getPlan();
    const motions = plan.subtasks.flatMap((s) => s.motions);
    expect(motions).toEqual([
      'dmp_publish(open_oven_handle)',
      'dmp_publish(open_oven_handle_ex)',
    ]);

    // the oven door actually opened in the streamed world picture
    const ovenView = view.scene?.objects.find((o) => o.name === 'oven');
    expect(ovenView).toBeDefined();
    expect(frames.some((f) => f.type === 'scene_delta')).toBe(true);

    stream.close();
  }, 120000);

  it('page reload reconstructs the identical view from the GET endpoints', async () => {
    const client = api();

    // streamed view built incrementally
    let streamed: ViewModel = emptyView();
    const [stateA, sceneA, planA, libraryA] = await Promise.all([
      client.getState(), client.getScene(), client.getPlan(), client.getLibrary(),
    ]);
    streamed = applySnapshots(streamed, stateA, sceneA, planA, libraryA);
    const stream = client.connectStream((frame) => {
      streamed = applyFrame(streamed, frame);
    });
    await new Promise((resolve) => setTimeout(resolve, 200));

    await client.submitTask('put the apple on the plate');
    await client.waitForSettle();
    await new Promise((resolve) => setTimeout(resolve, 300));
    // plan/library come from GETs on state changes, as the console does
    streamed = {
      ...streamed,
      plan: await client.getPlan(),
      library: await client.getLibrary(),
    };
    stream.close();

    // "reload": rebuild purely from the GET endpoints
    let reloaded: ViewModel = emptyView();
    const [stateB, sceneB, planB, libraryB] = await Promise.all([
      client.getState(), client.getScene(), client.getPlan(), client.getLibrary(),
    ]);
    reloaded = applySnapshots(reloaded, stateB, sceneB, planB, libraryB);

    const normalize = (v: ViewModel) => {
      const c = comparableView(v) as { scene: SceneSnapshot | null };
      return { ...c, scene: c.scene ? roundScene(c.scene) : null };
    };
    expect(normalize(streamed)).toEqual(normalize(reloaded));
  }, 60000);
});
