"""Command line: simulate one task, benchmark a suite, teach skills, serve the console.

    hrcbot simulate --scene kitchen --task "Warm up the apple" --dmp-lib ./lib --seed 3 --noise 0.011
    hrcbot bench --tasks suite.json --trials 23 --seed 7 --noise 0.011 --out report.csv
    hrcbot teach --scene kitchen --dmp-lib ./lib
    hrcbot study --scene kitchen --seconds 5 --noise 0.011 --seed 1 --figure study.png
    hrcbot serve --scene kitchen --dmp-lib ./lib --port 8765
    hrcbot init-scene --out kitchen.json

`bench --tasks builtin:kitchen7` runs the seven-task kitchen suite; the HRC
rows teach their skills into --dmp-lib first if it is empty. Reports land as
CSV plus an aligned text table, with a metrics figure rendered next to them
unless --no-figures is passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .harness import (
    default_suite,
    emit_report,
    load_suite,
    perception_discrepancy_study,
    run_experiment,
)
from .library import SkillLibrary
from .perception import DetectorConfig, ground_truth_view, perceive
from .plan import ClarificationNeeded, PlanError
from .planner import plan_task
from .scene import build_kitchen_scene, resolve_scene, save_scene
from .session import Session
from .simulator import SimConfig, Simulator
from .teaching import teach_kitchen_skills


def _add_scene_arg(parser):
    parser.add_argument("--scene", default="kitchen",
                        help="scene JSON path or built-in name (default: kitchen)")


def cmd_simulate(args) -> int:
    scene = resolve_scene(args.scene)
    library = SkillLibrary(args.dmp_lib) if args.dmp_lib else None
    detector = DetectorConfig(noise_half_width=args.noise, miss_probability=args.miss)
    rng = np.random.default_rng(args.seed)
    view = perceive(scene, rng, detector) if args.noise or args.miss else ground_truth_view(scene)
    try:
        plan = plan_task(args.task, view, library=library,
                         check_obstacles=args.check_obstacles)
    except ClarificationNeeded as err:
        print(f"clarification needed: {err.question}")
        return 2
    except PlanError as err:
        print(f"planning failed: {err}")
        return 2
    print(plan.to_text(), end="")
    sim = Simulator(scene, library=library, config=SimConfig())
    outcome = sim.run_plan(plan)
    if args.log:
        Path(args.log).write_text(sim.event_log_text(), encoding="utf-8")
        print(f"event log: {args.log}")
    print(f"executed: {outcome.executed}  success: {outcome.task_success}")
    if outcome.failure_reason:
        print(f"failure: {outcome.failure_reason}")
    return 0 if outcome.task_success else 1


def _ensure_taught(library_dir: str) -> None:
    library = SkillLibrary(library_dir)
    if not all(library.has(n) for n in ("open_oven_handle", "close_oven", "open_cabinet")):
        teach_kitchen_skills(build_kitchen_scene(), library)


def cmd_bench(args) -> int:
    if args.tasks == "builtin:kitchen7":
        if not args.dmp_lib:
            print("builtin:kitchen7 needs --dmp-lib for its HRC rows", file=sys.stderr)
            return 2
        _ensure_taught(args.dmp_lib)
        specs = default_suite(dmp_library=args.dmp_lib, noise=args.noise,
                              miss=args.miss)
    else:
        specs = load_suite(args.tasks)
        if args.noise is not None:
            for spec in specs:
                spec.noise_half_width = args.noise
    report = run_experiment(specs, n_trials=args.trials, base_seed=args.seed)
    out = Path(args.out)
    out.write_text(emit_report(report, "csv"), encoding="utf-8")
    text = emit_report(report, "text")
    out.with_suffix(".txt").write_text(text, encoding="utf-8")
    print(text, end="")
    print(f"csv: {out}")
    if not args.no_figures:
        from .plots import metrics_figure

        figure = metrics_figure(report, out.with_suffix(".png"))
        print(f"figure: {figure}")
    return 0


def cmd_teach(args) -> int:
    scene = resolve_scene(args.scene)
    library = SkillLibrary(args.dmp_lib)
    taught = teach_kitchen_skills(scene, library, replace=args.replace)
    for name in taught:
        print(f"taught: {name}")
    return 0


def cmd_study(args) -> int:
    detector = DetectorConfig(noise_half_width=args.noise)
    stats = perception_discrepancy_study(
        args.scene, n_seconds=args.seconds, seed=args.seed, detector=detector
    )
    print(f"detections: {stats.n_detections}")
    print(f"min:    {stats.minimum * 1000:.2f} mm")
    print(f"median: {stats.median * 1000:.2f} mm")
    print(f"max:    {stats.maximum * 1000:.2f} mm")
    if args.out:
        lines = ["discrepancy_m"] + [f"{v:.9f}" for v in stats.samples]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"csv: {args.out}")
    if args.figure:
        from .plots import discrepancy_figure

        discrepancy_figure(stats, args.figure, band=(0.010, 0.012))
        print(f"figure: {args.figure}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    scene = resolve_scene(args.scene)
    session = Session(scene, SkillLibrary(args.dmp_lib))
    print(f"session console on http://{args.host}:{args.port}")
    serve(session, host=args.host, port=args.port, motion_delay=args.motion_delay)
    return 0


def cmd_init_scene(args) -> int:
    save_scene(build_kitchen_scene(), args.out)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrcbot", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="plan and execute one task")
    _add_scene_arg(p)
    p.add_argument("--task", required=True)
    p.add_argument("--dmp-lib", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--miss", type=float, default=0.0)
    p.add_argument("--log", default=None, help="write the JSON-lines event log here")
    p.add_argument("--check-obstacles", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run a task suite and report the three metrics")
    p.add_argument("--tasks", required=True,
                   help="suite JSON, or builtin:kitchen7")
    p.add_argument("--trials", type=int, default=23)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--noise", type=float, default=0.011)
    p.add_argument("--miss", type=float, default=0.02)
    p.add_argument("--out", default="report.csv")
    p.add_argument("--dmp-lib", default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("teach", help="record the scripted appliance demonstrations")
    _add_scene_arg(p)
    p.add_argument("--dmp-lib", required=True)
    p.add_argument("--replace", action="store_true")
    p.set_defaults(func=cmd_teach)

    p = sub.add_parser("study", help="perception discrepancy statistics")
    _add_scene_arg(p)
    p.add_argument("--seconds", type=float, default=5.0)
    p.add_argument("--noise", type=float, default=0.011)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write raw samples CSV here")
    p.add_argument("--figure", default=None, help="write a histogram PNG here")
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("serve", help="HTTP console service for one session")
    _add_scene_arg(p)
    p.add_argument("--dmp-lib", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--motion-delay", type=float, default=0.02)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("init-scene", help="write the built-in kitchen scene JSON")
    p.add_argument("--out", default="kitchen.json")
    p.set_defaults(func=cmd_init_scene)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
