"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernel.py [--repeat N] [--json]
"""

import argparse
import json
import random
import time

from qserre import kernel
from qserre.cartan import symmetrize
from qserre.solutions import p_basis_family, taylor_family
from qserre.verifier import evaluate, lemma2_shape, prefactored_shape, serre_shape


def sparse(rng, n, span):
    return {rng.randrange(-span, span): rng.randrange(-99, 99) or 1 for _ in range(n)}


def workloads():
    rng = random.Random(0)
    a, b = sparse(rng, 2000, 1 << 30), sparse(rng, 2000, 1 << 30)
    fs = [sparse(rng, 40, 1 << 12) for _ in range(4)]
    b2 = symmetrize([[2, -1], [-2, 2]])
    g2 = symmetrize([[2, -1], [-3, 2]])
    return [
        ("mul 2000x2000", lambda: kernel.mul(a, b)),
        ("mul bounded", lambda: kernel.mul(a, b, kmax=0)),
        ("mul_many 4x40", lambda: kernel.mul_many(fs)),
        ("lemma2 m=-4", lambda: evaluate(lemma2_shape(-4))),
        ("serre taylor B2 W=20", lambda: evaluate(serre_shape(taylor_family(b2), 1, 0), window=20)),
        ("prefactored P1 G2 a=-3", lambda: evaluate(prefactored_shape(p_basis_family(g2, 1), 1, 0))),
    ]


def timeit(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--skip-slow", action="store_true", help="leave out the G2 prefactored sum")
    args = ap.parse_args(argv)
    backends = kernel.available_backends()
    rows = []
    for name, fn in workloads():
        if args.skip_slow and name.startswith("prefactored"):
            continue
        times, results = {}, []
        for be in backends:
            kernel.set_backend(be)
            reps = 1 if name.startswith("prefactored") else args.repeat
            times[be], out = timeit(fn, reps)
            results.append(out.polynomial if hasattr(out, "polynomial") else out)
        kernel.set_backend("auto")
        same = all(r == results[0] for r in results)
        rows.append({"workload": name, "seconds": times, "results_equal": same})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'workload':26s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup  equal")
    for r in rows:
        t = r["seconds"]
        sp = t["python"] / t["cython"] if "cython" in t and t["cython"] > 0 else float("nan")
        print(f"{r['workload']:26s}" + "".join(f"{t[b]:12.4f}" for b in backends)
              + f"{sp:9.1f}x  {r['results_equal']}")


if __name__ == "__main__":
    main()
