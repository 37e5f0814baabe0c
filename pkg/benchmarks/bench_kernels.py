"""Compare the numba and pure-numpy kernel backends on representative workloads.

Run with ``python benchmarks/bench_kernels.py``. Each workload is timed with both
backends in the same process by swapping the dispatch names in ``plectica._kernels``.
"""

from __future__ import annotations

import argparse
import random
import timeit

import numpy as np

from plectica import _kernels
from plectica.laurent import MultivarLaurent, RingSpecDelta
from plectica.lubin_tate import LubinTatePoly, lt_add_law
from plectica.padic import PadicRingSpec


def _laurent_products(n_terms: int):
    spec = PadicRingSpec(3, 2, None, 4)
    ring = RingSpecDelta.standard(spec, 2, 6, 40, spec.prec)
    rng = random.Random(0)

    def rand():
        return MultivarLaurent.from_terms(
            ring, [((rng.randrange(-3, 8), rng.randrange(-3, 8)), spec.random(rng)) for _ in range(n_terms)]
        )

    x, y = rand(), rand()
    return lambda: x * y


def _group_law():
    f = LubinTatePoly.default(PadicRingSpec(3, 1, None, 6))
    return lambda: lt_add_law.__wrapped__(f, 12, 6)


def _rref():
    M = np.random.default_rng(0).integers(0, 5, size=(120, 160))
    return lambda: _kernels.rref(M, 5)


WORKLOADS = {
    "laurent_mul": lambda: _laurent_products(60),
    "lt_add_law": _group_law,
    "rref_120x160": _rref,
}


def _use(backend: str) -> None:
    suffix = "numba" if backend == "numba" else "numpy"
    for name in ("box_mul", "dense_mul", "rref"):
        setattr(_kernels, name, getattr(_kernels, f"{name}_{suffix}"))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = ["numpy"] + (["numba"] if _kernels.USE_NUMBA else [])
    print(f"{'workload':<16}" + "".join(f"{b:>12}" for b in backends))
    for name, make in WORKLOADS.items():
        row = []
        for backend in backends:
            _use(backend)
            fn = make()
            fn()  # compile / warm caches
            row.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)))
        print(f"{name:<16}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row))


if __name__ == "__main__":
    main()
