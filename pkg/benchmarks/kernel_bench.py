#!/usr/bin/env python3
"""Compare the compiled and pure-Python progress kernels.

The simulator's hot loop is the per-event advance/min scan over a VM's
running slots: every arrival or completion charges elapsed work against
each slot and re-derives the next completion estimate, so scan cost is
quadratic in the number of concurrent cloudlets. This script times

  * the raw kernel pair on a large slot buffer,
  * a scheduler driven through a staggered-arrival storm, and
  * the bundled 160-cloudlet scenario end to end,

once per backend (the pure-Python twin is forced via STRATUS_PURE_PYTHON)
and prints the speedups.
"""

import argparse
import json
import os
import subprocess
import sys
import time


def bench_raw_kernels(slots, events):
    from array import array

    from stratus import backend

    buf = array("d", [1e12 + i for i in range(slots)])
    t0 = time.perf_counter()
    for _ in range(events):
        backend.advance_equal(buf, slots, 0.25, 1e-9)
        backend.min_active(buf, slots)
    return time.perf_counter() - t0


def bench_scheduler_storm(count):
    from stratus import Cloudlet, CloudletScheduler, SchedulerPolicy

    sched = CloudletScheduler(SchedulerPolicy.TIME_SHARED, 1000.0, 1)
    clock = 0.0
    t0 = time.perf_counter()
    for i in range(count):
        sched.advance(clock)
        sched.submit(Cloudlet(i, 1000.0 + i), clock)
        sched.next_completion_dt()
        clock += 1e-4
    while True:
        dt = sched.next_completion_dt()
        if dt is None:
            break
        clock += dt
        sched.advance(clock)
    return time.perf_counter() - t0


def bench_scenario():
    from stratus.scenario import bundled_scenario_path, parse_scenario, run_scenario

    config = parse_scenario(bundled_scenario_path("scenario_b"))
    t0 = time.perf_counter()
    run_scenario(config)
    return time.perf_counter() - t0


def worker(args):
    from stratus import backend_name

    results = {
        "backend": backend_name(),
        "raw_kernels_s": bench_raw_kernels(args.slots, args.events),
        "scheduler_storm_s": bench_scheduler_storm(args.storm),
        "scenario_b_s": bench_scenario(),
    }
    print(json.dumps(results))


def spawn(pure, argv):
    env = dict(os.environ)
    if pure:
        env["STRATUS_PURE_PYTHON"] = "1"
    else:
        env.pop("STRATUS_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, __file__, "--worker", *argv],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--slots", type=int, default=20000)
    parser.add_argument("--events", type=int, default=2000)
    parser.add_argument("--storm", type=int, default=3000)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()
    if args.worker:
        worker(args)
        return
    argv = ["--slots", str(args.slots), "--events", str(args.events),
            "--storm", str(args.storm)]
    compiled = spawn(False, argv)
    pure = spawn(True, argv)
    if compiled["backend"] == pure["backend"]:
        print("warning: compiled extension unavailable, both runs used the "
              f"{pure['backend']} backend", file=sys.stderr)
    print(f"{'benchmark':<28}{compiled['backend']:>12}{pure['backend']:>12}{'speedup':>10}")
    for key, label in (("raw_kernels_s", f"raw kernels ({args.slots} slots)"),
                       ("scheduler_storm_s", f"arrival storm ({args.storm})"),
                       ("scenario_b_s", "scenario_b end-to-end")):
        ratio = pure[key] / compiled[key] if compiled[key] else float("nan")
        print(f"{label:<28}{compiled[key]:>11.3f}s{pure[key]:>11.3f}s{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
