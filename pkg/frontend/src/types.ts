// Wire types mirroring the session service's endpoints and stream frames.

export interface RobotSnapshot {
  base: [number, number, number];
  ee: [number, number, number];
  aperture: number;
  held: string | null;
  waist: number;
}

export interface SceneObject {
  id: string;
  name: string;
  position: [number, number, number];
  size: [number, number, number];
  fixed: boolean;
  articulated: boolean;
  door_angle: number;
  open_angle: number | null;
  handle: [number, number, number] | null;
  axis_position: [number, number, number] | null;
  latched: boolean;
  powered: boolean;
}

export interface SceneSnapshot {
  lateral_axis: string;
  robot: RobotSnapshot;
  objects: SceneObject[];
}

export interface TaskOutcome {
  task_text: string;
  executable: boolean;
  success: boolean;
  failure_reason: string | null;
}

export interface SessionState {
  phase: string;
  cursor: [number, number];
  pending_question: string | null;
  recording_id: string | null;
  proposed_skill_name: string | null;
  last_outcome: TaskOutcome | null;
}

export interface PlanSubtask {
  description: string;
  motions: string[];
  skill_name: string | null;
}

export interface PlanSnapshot {
  task_text: string | null;
  horizon: string | null;
  subtasks: PlanSubtask[];
  dsl: string;
}

export interface LibrarySnapshot {
  skills: { name: string; file: string; created_at: string; version: number }[];
}

export interface ObjectDelta {
  id: string;
  position: [number, number, number];
  state: { door_angle: number; latched: boolean; powered: boolean };
}

export type ServerFrame =
  | ({ type: 'state' } & SessionState)
  | { type: 'scene_delta'; t: number; robot: RobotSnapshot; changed_objects: ObjectDelta[] }
  | { type: 'log'; record: Record<string, unknown> }
  | { type: 'question'; text: string };

export interface DemoSampleFrame {
  type: 'demo_sample';
  t: number;
  x: number;
  y: number;
  z: number;
  aperture: number;
}

export type ClientFrame = DemoSampleFrame | { type: 'demo_end' };
