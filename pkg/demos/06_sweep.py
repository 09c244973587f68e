"""Enumerate every small finite instance and look for counterexamples.

A red flag is an instance that meets the hypotheses yet lacks a unique
common fixed point, has a rate at or above the threshold, or breaks the
per-step rate inequality along its orbit.  A deliberately wrong rate
function shows the sweep catching a broken implementation.
"""
import time

from gmetricfp import r_vetro
from gmetricfp.oracle import enumerate_tables, theorem_sweep

for n in (1, 2, 3):
    print(f"G-metric tables on {n} points (default value grid): {len(enumerate_tables(n))}")

for mode in ("vetro", "abbas"):
    start = time.perf_counter()
    rep = theorem_sweep(mode)
    print(f"{mode}: {rep.instances} instances, {rep.hypotheses_met} meet hypotheses, "
          f"{len(rep.red_flags)} red flags ({time.perf_counter() - start:.1f}s)")

rep = theorem_sweep("vetro", rate_fn=lambda theta, delta: r_vetro(theta, delta, 1.0) / 10, crosscheck=False)
print(f"with a rate ten times too small: {len(rep.red_flags)} red flags")
print("first:", rep.red_flags[0]["problems"])
