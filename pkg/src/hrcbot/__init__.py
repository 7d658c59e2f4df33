"""Desk-scale human-robot collaboration sandbox.

Plans kitchen manipulation tasks over a small motion-function library,
grounds them in synthetic perception, executes them in a deterministic
kinematic simulator, and learns new skills from demonstrated trajectories.
"""

__version__ = "0.1.0"
