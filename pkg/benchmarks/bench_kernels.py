"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--samples 2000]
"""
import argparse
import timeit

import numpy as np

from nlglrt._backend import KERNELS


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def cases(samples):
    rng = np.random.default_rng(0)
    r = crandn(rng, 4, 48)
    hpd = r @ r.conj().T
    z = crandn(rng, 4, samples)
    return {
        "gram 4x48": lambda k: k.gram(r),
        "hpd_inverse 4x4": lambda k: k.hpd_inverse(hpd, 0.0, False),
        f"sliding_trace M=4 k=48 L={samples}": lambda k: k.sliding_trace(z, 48, 1e-9, True),
        f"sliding_trace M=8 k=128 L={samples}": lambda k: k.sliding_trace(
            np.vstack([z, z[::-1] * 1j]), 128, 1e-9, True
        ),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--samples", type=int, default=2000)
    args = parser.parse_args(argv)

    names = sorted(KERNELS)
    print(f"{'kernel':40s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.samples).items():
        times = {}
        for name in names:
            kern = KERNELS[name]
            number = 1
            while timeit.timeit(lambda: fn(kern), number=number) < 0.2:
                number *= 2
            times[name] = min(timeit.repeat(lambda: fn(kern), number=number, repeat=args.repeat)) / number
        row = f"{label:40s}" + "".join(f"{times[n] * 1e6:12.1f}us" for n in names)
        if len(names) > 1:
            row += f"   {times['python'] / times['compiled']:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
