"""Shared exhaustive-enumeration driver for the session state machine."""

import copy
import json

from hrcbot.library import InMemorySkillLibrary
from hrcbot.scene import build_kitchen_scene, scene_to_dict
from hrcbot.session import Session, SessionError, SessionRejection

COMMANDS = (
    "submit_ok", "submit_hard", "submit_unknown", "submit_ambiguous",
    "clarify", "pause", "resume", "tick", "demo_start", "demo_feed",
    "demo_end", "commit",
)

DEMO_POINTS = ([-0.50, 0.00, 0.95], [-0.45, 0.05, 0.97], [-0.40, 0.10, 0.99])


def apply_command(session: Session, command: str) -> None:
    try:
        if command == "submit_ok":
            session.submit_task("Open the microwave")
        elif command == "submit_hard":
            session.submit_task("Open the oven")
        elif command == "submit_unknown":
            session.submit_task("juggle the cutlery")
        elif command == "submit_ambiguous":
            session.submit_task("pick the bottle")
        elif command == "clarify":
            session.clarify("bottle1")
        elif command == "pause":
            session.pause()
        elif command == "resume":
            session.resume()
        elif command == "tick":
            session.tick()
        elif command == "demo_start":
            session.demo_start()
        elif command == "demo_feed":
            k = len(session._demo_samples)
            session.feed_demo_sample(0.1 * k, DEMO_POINTS[k % 3])
        elif command == "demo_end":
            session.demo_end()
        elif command == "commit":
            session.commit_skill()
    except (SessionRejection, SessionError):
        pass


def state_key(session: Session) -> tuple:
    return (
        session.phase,
        session.cursor,
        session.plan.to_text() if session.plan else None,
        session.pending_question,
        session.pending_recording.recording_id if session.pending_recording else None,
        len(session._demo_samples),
        tuple(session.library.names()),
        json.dumps(scene_to_dict(session.scene), sort_keys=True),
        json.dumps(session.sim.state.snapshot(), sort_keys=True),
    )


def enumerate_transitions(depth: int = 6) -> set:
    """Every (phase, event, phase) reachable by command sequences of the given
    length, deduplicating identical session states between levels."""
    root = Session(build_kitchen_scene(), InMemorySkillLibrary())
    seen = {state_key(root)}
    frontier = [root]
    observed: set = set()
    for _ in range(depth):
        next_frontier = []
        for state in frontier:
            for command in COMMANDS:
                branch = copy.deepcopy(state)
                before = len(branch.transitions)
                apply_command(branch, command)
                observed.update(branch.transitions[before:])
                key = state_key(branch)
                if key not in seen:
                    seen.add(key)
                    next_frontier.append(branch)
        frontier = next_frontier
    return observed
