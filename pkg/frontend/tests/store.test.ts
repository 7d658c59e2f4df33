import { describe, expect, it } from 'vitest';

import {
  applyFrame,
  applySnapshots,
  comparableView,
  emptyView,
  LOG_TAIL_LIMIT,
  setConnected,
} from '../src/store.js';
import type { SceneSnapshot, ServerFrame, SessionState } from '../src/types.js';

const state: SessionState = {
  phase: 'executing',
  cursor: [1, 2],
  pending_question: null,
  recording_id: null,
  proposed_skill_name: null,
  last_outcome: null,
};

const scene: SceneSnapshot = {
  lateral_axis: '+y',
  robot: { base: [-0.8, 0, 0], ee: [-0.5, 0, 0.9], aperture: 1, held: null, waist: 0 },
  objects: [
    {
      id: 'oven1', name: 'oven', position: [0.5, 0.5, 0.9], size: [0.5, 0.4, 0.3],
      fixed: true, articulated: true, door_angle: 0, open_angle: 1.57,
      handle: [0.3, 0.6, 1.0], axis_position: [0.3, 0.6, 0.76], latched: false, powered: false,
    },
    {
      id: 'apple1', name: 'apple', position: [0.1, -0.3, 0.77], size: [0.07, 0.07, 0.06],
      fixed: false, articulated: false, door_angle: 0, open_angle: null,
      handle: null, axis_position: null, latched: false, powered: false,
    },
  ],
};

describe('view model reducer', () => {
  it('installs snapshots', () => {
    const view = applySnapshots(emptyView(), state, scene,
      { task_text: 'x', horizon: 'short', subtasks: [], dsl: '' }, { skills: [] });
    expect(view.phase).toBe('executing');
    expect(view.cursor).toEqual([1, 2]);
    expect(view.scene?.objects).toHaveLength(2);
  });

  it('state frames update only session fields', () => {
    let view = applySnapshots(emptyView(), state, scene,
      { task_text: null, horizon: null, subtasks: [], dsl: '' }, { skills: [] });
    const frame: ServerFrame = {
      type: 'state', phase: 'paused', cursor: [0, 1], pending_question: null,
      recording_id: 'rec-0001', proposed_skill_name: 'open_oven_handle',
      last_outcome: null,
    };
    view = applyFrame(view, frame);
    expect(view.phase).toBe('paused');
    expect(view.recordingId).toBe('rec-0001');
    expect(view.scene).not.toBeNull();
  });

  it('scene deltas move only the named objects', () => {
    let view = applySnapshots(emptyView(), state, scene,
      { task_text: null, horizon: null, subtasks: [], dsl: '' }, { skills: [] });
    view = applyFrame(view, {
      type: 'scene_delta',
      t: 1.5,
      robot: { base: [-0.2, 0, 0], ee: [0.3, 0.6, 1.0], aperture: 0, held: 'door:oven1', waist: 0 },
      changed_objects: [{
        id: 'oven1', position: [0.5, 0.5, 0.9],
        state: { door_angle: 1.57, latched: false, powered: false },
      }],
    });
    const oven = view.scene!.objects.find((o) => o.id === 'oven1')!;
    const apple = view.scene!.objects.find((o) => o.id === 'apple1')!;
    expect(oven.door_angle).toBeCloseTo(1.57);
    expect(apple.position).toEqual([0.1, -0.3, 0.77]);
    expect(view.scene!.robot.ee).toEqual([0.3, 0.6, 1.0]);
  });

  it('question frames surface the banner', () => {
    const view = applyFrame(emptyView(), { type: 'question', text: 'which one?' });
    expect(view.question).toBe('which one?');
  });

  it('log tail is bounded', () => {
    let view = emptyView();
    for (let i = 0; i < LOG_TAIL_LIMIT + 20; i += 1) {
      view = applyFrame(view, { type: 'log', record: { i } });
    }
    expect(view.logTail).toHaveLength(LOG_TAIL_LIMIT);
    expect(view.logTail[0]).toContain('"i":20');
  });

  it('frame-built and snapshot-built views agree on comparable fields', () => {
    let streamed = applySnapshots(emptyView(), state, scene,
      { task_text: null, horizon: null, subtasks: [], dsl: '' }, { skills: [] });
    streamed = applyFrame(streamed, {
      type: 'scene_delta', t: 2.0,
      robot: { ...scene.robot, ee: [0.0, 0.1, 1.0] },
      changed_objects: [{
        id: 'apple1', position: [0.2, 0.2, 0.8],
        state: { door_angle: 0, latched: false, powered: false },
      }],
    });
    const reloadedScene: SceneSnapshot = JSON.parse(JSON.stringify(scene));
    reloadedScene.robot.ee = [0.0, 0.1, 1.0];
    reloadedScene.objects[1].position = [0.2, 0.2, 0.8];
    const reloaded = applySnapshots(emptyView(), state, reloadedScene,
      { task_text: null, horizon: null, subtasks: [], dsl: '' }, { skills: [] });
    expect(comparableView(setConnected(streamed, false)))
      .toEqual(comparableView(reloaded));
  });
});
