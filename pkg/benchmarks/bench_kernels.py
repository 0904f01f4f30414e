"""Time the scan kernels: compiled extension vs pure Python.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--scale N]

Builds one large surface document and one large machine document from the
seeded generator, then times ``scan_surface`` and ``segment_specials`` from
both backends over identical inputs and prints the speedup.
"""

from __future__ import annotations

import argparse
import timeit

from llmon import _scan_py
from llmon.machine import SpecialTokenRegistry, print_machine
from llmon.randgen import rand_document
from llmon.surface import print_surface

try:
    from llmon import _scan as _compiled
except ImportError:
    _compiled = None


def build_inputs(scale: int) -> tuple[str, str]:
    docs = [rand_document(seed) for seed in range(scale)]
    surface = "\n".join(print_surface(d) for d in docs)
    machine = "\n".join(print_machine(d) for d in docs)
    return surface, machine


def time_call(fn, *args, repeat: int) -> float:
    timer = timeit.Timer(lambda: fn(*args))
    number = max(1, timer.autorange()[0] // 5)
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=int, default=200, help="documents per corpus")
    args = ap.parse_args()

    surface, machine = build_inputs(args.scale)
    strings = SpecialTokenRegistry.build()._scan[0]
    print(f"surface corpus: {len(surface):,} chars")
    print(f"machine corpus: {len(machine):,} chars")
    print()

    cases = [
        ("scan_surface", "scan_surface", (surface,)),
        ("segment_specials", "segment_specials", (machine, strings)),
    ]
    header = f"{'kernel':<18} {'python':>12} {'c':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, name, call_args in cases:
        py = time_call(getattr(_scan_py, name), *call_args, repeat=args.repeat)
        if _compiled is None:
            print(f"{label:<18} {py * 1e3:>10.2f}ms {'n/a':>12} {'n/a':>9}")
            continue
        cc = time_call(getattr(_compiled, name), *call_args, repeat=args.repeat)
        assert getattr(_compiled, name)(*call_args) == getattr(_scan_py, name)(
            *call_args
        ), f"{name}: backends disagree"
        print(f"{label:<18} {py * 1e3:>10.2f}ms {cc * 1e3:>10.2f}ms {py / cc:>8.1f}x")
    if _compiled is None:
        print("\ncompiled kernel not built; showing pure-Python timings only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
