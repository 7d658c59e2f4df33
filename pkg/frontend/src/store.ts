// View model: a pure reducer over server frames and GET snapshots. The UI
// renders only what the server sent; reloading rebuilds the identical view
// from the GET endpoints.

import type {
  LibrarySnapshot,
  PlanSnapshot,
  SceneSnapshot,
  ServerFrame,
  SessionState,
} from './types.js';

export interface ViewModel {
  phase: string;
  cursor: [number, number];
  question: string | null;
  recordingId: string | null;
  proposedSkillName: string | null;
  lastOutcome: SessionState['last_outcome'];
  scene: SceneSnapshot | null;
  plan: PlanSnapshot | null;
  library: LibrarySnapshot;
  logTail: string[];
  connected: boolean;
}

export const LOG_TAIL_LIMIT = 50;

export function emptyView(): ViewModel {
  return {
    phase: 'idle',
    cursor: [0, 0],
    question: null,
    recordingId: null,
    proposedSkillName: null,
    lastOutcome: null,
    scene: null,
    plan: null,
    library: { skills: [] },
    logTail: [],
    connected: false,
  };
}

/** Install the authoritative snapshots (initial load and reload). */
export function applySnapshots(
  view: ViewModel,
  state: SessionState,
  scene: SceneSnapshot,
  plan: PlanSnapshot,
  library: LibrarySnapshot,
): ViewModel {
  return {
    ...view,
    phase: state.phase,
    cursor: state.cursor,
    question: state.pending_question,
    recordingId: state.recording_id,
    proposedSkillName: state.proposed_skill_name,
    lastOutcome: state.last_outcome,
    scene,
    plan,
    library,
  };
}

export function applyFrame(view: ViewModel, frame: ServerFrame): ViewModel {
  switch (frame.type) {
    case 'state':
      return {
        ...view,
        phase: frame.phase,
        cursor: frame.cursor,
        question: frame.pending_question,
        recordingId: frame.recording_id,
        proposedSkillName: frame.proposed_skill_name,
        lastOutcome: frame.last_outcome,
      };
    case 'scene_delta': {
      if (!view.scene) return view;
      const objects = view.scene.objects.map((obj) => {
        const delta = frame.changed_objects.find((d) => d.id === obj.id);
        if (!delta) return obj;
        return {
          ...obj,
          position: delta.position,
          door_angle: delta.state.door_angle,
          latched: delta.state.latched,
          powered: delta.state.powered,
        };
      });
      return { ...view, scene: { ...view.scene, robot: frame.robot, objects } };
    }
    case 'log': {
      const line = JSON.stringify(frame.record);
      const tail = [...view.logTail, line];
      if (tail.length > LOG_TAIL_LIMIT) tail.splice(0, tail.length - LOG_TAIL_LIMIT);
      return { ...view, logTail: tail };
    }
    case 'question':
      return { ...view, question: frame.text };
    default:
      return view;
  }
}

export function setConnected(view: ViewModel, connected: boolean): ViewModel {
  return { ...view, connected };
}

/** Fields that must agree between a frame-built view and a reloaded one. */
export function comparableView(view: ViewModel): unknown {
  return {
    phase: view.phase,
    cursor: view.cursor,
    question: view.question,
    recordingId: view.recordingId,
    lastOutcome: view.lastOutcome,
    scene: view.scene,
    plan: view.plan,
    library: view.library,
  };
}
