"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_core.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from hsfrac import _backend, _pycore
from hsfrac._rules import profile_rules


def cases():
    rng = np.random.default_rng(0)
    psi = np.exp(rng.uniform(-8, 20, 20000))
    rules = profile_rules(1.3)
    f = rng.normal(size=(20000, 15))
    h = rng.uniform(1e-3, 1.0, 20000)
    return {
        "profile_batch (20k psi, s=1.3, N=2)": lambda mod: mod.profile_batch(psi, 1.3, 2, *rules),
        "gk15_reduce (20k panels)": lambda mod: mod.gk15_reduce(f, h),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    core = _backend.compiled_module()
    if core is None:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")
    print(f"{'case':40s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pycore), number=1, repeat=args.repeat)) * 1e3
        if core is None:
            print(f"{name:40s} {t_py:12.2f} {'-':>14s} {'-':>8s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(core), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {t_py:12.2f} {t_c:14.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
