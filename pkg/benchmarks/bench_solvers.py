#!/usr/bin/env python3
"""Benchmark the compiled alternation kernels against the numpy fallback.

Runs the same solves through ``secalign._kernels`` (if built) and
``secalign._kernels_py`` and reports wall time per solve plus the final
leakage of each path, which should agree to floating-point noise.

Usage: python benchmarks/bench_solvers.py [--da 4] [--seeds 5] [--max-iter 2000]
"""

import argparse
import importlib
import time

import numpy as np

from secalign.channel import generate_channels, parse_config_text
from secalign.linalg import STREAM_INIT, fix_phase, random_orthonormal, random_unit_vector, stream_rng

CONFIG = "Ma=12 Nb=2 da={da} K=4 Mk=9 Nk=4 dk=2 L=16"


def _backends():
    backends = {}
    try:
        backends["ext"] = importlib.import_module("secalign._kernels")
    except ImportError:
        print("compiled extension not built; benchmarking the fallback only")
    backends["python"] = importlib.import_module("secalign._kernels_py")
    return backends


def _initial_filters(config, seed):
    rng = stream_rng(seed, STREAM_INIT, 0)
    ub0 = fix_phase(random_unit_vector(rng, config.Nb))
    uk0 = [fix_phase(random_orthonormal(rng, nk, d)) for nk, d in zip(config.Nk, config.dk)]
    return ub0, uk0


def bench(args):
    config, _ = parse_config_text(CONFIG.format(da=args.da))
    cases = []
    for seed in range(args.seeds):
        channels = generate_channels(config, seed)
        ub0, uk0 = _initial_filters(config, seed)
        u_svd, _, vh_svd = np.linalg.svd(channels.Hba)
        ub = fix_phase(u_svd[:, 0])
        va = fix_phase(vh_svd[0].conj())
        cases.append((channels, ub0, uk0, ub.conj() @ channels.Hba, va))

    results = {}
    for name, mod in _backends().items():
        t0 = time.perf_counter()
        lm_leaks = []
        for channels, ub0, uk0, _, _ in cases:
            out = mod.lm_alternate(
                channels.Hba, list(channels.Hka), list(config.dk),
                ub0, uk0, config.da, args.max_iter, args.tol,
            )
            lm_leaks.append(out[3][-1])
        t_lm = time.perf_counter() - t0

        t0 = time.perf_counter()
        meb_leaks = []
        for channels, _, uk0, m0, va in cases:
            out = mod.meb_alternate(
                m0, list(channels.Hka), list(config.dk),
                va, uk0, config.da, args.max_iter, args.tol,
            )
            meb_leaks.append(out[3][-1])
        t_meb = time.perf_counter() - t0
        results[name] = (t_lm, t_meb, lm_leaks, meb_leaks)

    print(f"config: {config.to_text()}  seeds: {args.seeds}  max_iter: {args.max_iter}")
    print(f"{'backend':>8}  {'LM s/solve':>11}  {'MEB s/solve':>12}")
    for name, (t_lm, t_meb, _, _) in results.items():
        print(f"{name:>8}  {t_lm / args.seeds:>11.4f}  {t_meb / args.seeds:>12.4f}")
    if len(results) == 2:
        ext, py = results["ext"], results["python"]
        print(f"speedup: LM {py[0] / ext[0]:.1f}x, MEB {py[1] / ext[1]:.1f}x")
        lm_dev = max(abs(a - b) for a, b in zip(ext[2], py[2]))
        meb_dev = max(abs(a - b) for a, b in zip(ext[3], py[3]))
        print(f"final-leakage deviation between backends: LM {lm_dev:.3e}, MEB {meb_dev:.3e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--da", type=int, default=4)
    parser.add_argument("--seeds", type=int, default=5)
    parser.add_argument("--max-iter", type=int, default=2000)
    parser.add_argument("--tol", type=float, default=1e-12)
    bench(parser.parse_args())


if __name__ == "__main__":
    main()
