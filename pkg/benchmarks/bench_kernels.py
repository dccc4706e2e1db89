#!/usr/bin/env python
"""Compare the compiled pair-product kernel against the pure-python one.

The kernel is chosen at import time, so this script re-runs itself in a
subprocess with BLOCKDMRG_PURE_PYTHON=1 to get the fallback numbers, then
prints both side by side.  Timings cover a middle-bond effective-
Hamiltonian application on a Heisenberg ladder at a few bond dimensions.
"""

import json
import os
import subprocess
import sys
import time


def measure(bonds, reps):
    from blockdmrg import random_mps
    from blockdmrg.btensor import kernel_backend
    from blockdmrg.models import build_heisenberg, make_lattice, site_basis, terms_to_mpo
    from blockdmrg.netops import (apply_effective_h, build_left_env,
                                  build_right_env, left_edge, right_edge,
                                  two_site_tensor)

    lat = make_lattice("square", 2, 8)
    terms = build_heisenberg(lat, j1=1.0, j2=0.5)
    h = terms_to_mpo(terms, "spin", lat.n_sites)
    phys, _ = site_basis("spin")
    n = lat.n_sites
    j = n // 2
    rows = []
    for m in bonds:
        psi = random_mps(phys, n, (0,), m, seed=1)
        left = left_edge(psi, h)
        for i in range(j):
            left = build_left_env(left, psi.sites[i], h.sites[i])
        right = right_edge(psi, h)
        for i in range(n - 1, j + 1, -1):
            right = build_right_env(right, psi.sites[i], h.sites[i])
        theta = two_site_tensor(psi, j)
        apply_effective_h(left, right, h.sites[j], h.sites[j + 1], theta)
        t0 = time.perf_counter()
        for _ in range(reps):
            apply_effective_h(left, right, h.sites[j], h.sites[j + 1], theta)
        rows.append({"kernel": kernel_backend(), "bond": max(psi.bond_dims()),
                     "seconds": (time.perf_counter() - t0) / reps})
    return rows


def main():
    bonds = [int(b) for b in sys.argv[1:]] or [16, 32, 64]
    reps = 5
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(measure(bonds, reps)))
        return
    here = measure(bonds, reps)
    env = dict(os.environ, BLOCKDMRG_PURE_PYTHON="1", _BENCH_CHILD="1")
    out = subprocess.run([sys.executable, __file__] + [str(b) for b in bonds],
                         env=env, capture_output=True, text=True, check=True)
    there = json.loads(out.stdout.strip().splitlines()[-1])
    print(f"{'bond':>6} {'kernel':>10} {'sec/apply':>12}   "
          f"{'kernel':>10} {'sec/apply':>12} {'speedup':>8}")
    for a, b in zip(here, there):
        speed = b["seconds"] / a["seconds"] if a["seconds"] else float("inf")
        print(f"{a['bond']:>6} {a['kernel']:>10} {a['seconds']:>12.6f}   "
              f"{b['kernel']:>10} {b['seconds']:>12.6f} {speed:>7.2f}x")


if __name__ == "__main__":
    main()
