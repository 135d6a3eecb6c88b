"""Timing comparison of the jitted kernel backend against its numpy twins.

The backend is frozen per process at import, so each backend runs in a child
process with DISPERSIA_BACKEND set; the parent prints a side-by-side table.

    python benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

TASKS = ("phase-batch", "bound-scan", "ei-loop", "lri-loop")


def run_task(name, repeat):
    import numpy as np

    from dispersia.integrators import SolveConfig, StepperKind, solve
    from dispersia.model import (
        DispersiveModel,
        eval_phase_factored,
        verify_phase_lower_bound,
    )
    from dispersia.spectral import Grid, InitialDataSpec, PotentialSpec

    model = DispersiveModel(3, (1.0, -1.0), 1.5, 2.0**-6)
    if name == "phase-batch":
        rng = np.random.default_rng(7)
        xi1 = rng.uniform(-8.0, 8.0, 1_000_000)
        xi2 = rng.uniform(-8.0, 8.0, 1_000_000)
        job = lambda: eval_phase_factored(model, xi1, xi2)
    elif name == "bound-scan":
        axis = np.linspace(-8.0, 8.0, 600)
        job = lambda: verify_phase_lower_bound(model, 2.0, axis, axis)
    else:
        scheme = StepperKind.EI if name == "ei-loop" else StepperKind.LRI
        cfg = SolveConfig(
            model=DispersiveModel(2, (1.0,), 1.0, 2.0**-4),
            grid=Grid(16.0, 4096),
            potential=PotentialSpec.gaussian(-1.0, 8.0),
            initial=InitialDataSpec.gaussian(),
            scheme=scheme,
            tau=2.5e-3,
            z_final=1.0,
        )
        job = lambda: solve(cfg)

    job()  # warm: jit compile / fft plan, not billed
    best = min(_timed(job) for _ in range(repeat))
    return best


def _timed(job):
    t0 = time.perf_counter()
    job()
    return time.perf_counter() - t0


def worker(repeat):
    from dispersia._kernels import active_backend_name

    print(f"backend {active_backend_name()}", flush=True)
    for name in TASKS:
        print(f"{name} {run_task(name, repeat):.6f}", flush=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="best-of repetitions")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.worker:
        worker(args.repeat)
        return 0

    results = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, DISPERSIA_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--worker", "--repeat", str(args.repeat)],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            print(f"{backend}: failed\n{proc.stderr}", file=sys.stderr)
            return 1
        rows = dict(line.split() for line in proc.stdout.splitlines())
        assert rows.pop("backend") == backend
        results[backend] = {k: float(v) for k, v in rows.items()}

    width = max(len(t) for t in TASKS)
    print(f"{'task':<{width}}  {'numpy':>10}  {'numba':>10}  speedup")
    for name in TASKS:
        np_t, nb_t = results["numpy"][name], results["numba"][name]
        print(f"{name:<{width}}  {np_t:>9.4f}s  {nb_t:>9.4f}s  {np_t / nb_t:>6.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
