"""Time the numba and numpy CRF kernels on random problems of tagger-like size.

    python3 benchmarks/bench_kernels.py [--labels 60] [--length 25] [--repeat 200]
"""

import argparse
import timeit

import numpy as np

from snacstag.tagger import _kernels
from snacstag.tagger.crf import transition_mask


def make_problem(rng, n_labels, length, n_features, active):
    labels = ["O", "I"] + [f"B-L{k}" for k in range(n_labels - 2)]
    allowed, start_ok = transition_mask(labels)
    W = rng.normal(0, 0.1, (n_labels, n_features))
    trans = np.where(allowed, rng.normal(0, 0.1, (n_labels, n_labels)), -np.inf)
    start = np.where(start_ok, rng.normal(0, 0.1, n_labels), -np.inf)
    end = rng.normal(0, 0.1, n_labels)
    ids = np.concatenate([np.sort(rng.choice(n_features, active, replace=False))
                          for _ in range(length)]).astype(np.int64)
    vals = np.ones(len(ids))
    offsets = np.arange(0, length * active + 1, active, dtype=np.int64)
    return W, ids, vals, offsets, trans, start, end


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--labels", type=int, default=60)
    ap.add_argument("--length", type=int, default=25)
    ap.add_argument("--features", type=int, default=50_000)
    ap.add_argument("--active", type=int, default=40)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    W, ids, vals, offsets, trans, start, end = make_problem(
        rng, args.labels, args.length, args.features, args.active)
    emit = _kernels.emissions_np(W, ids, vals, offsets)
    coef = rng.normal(size=emit.shape)
    grad = np.zeros_like(W)

    impls = {"numpy": (_kernels.emissions_np, _kernels.forward_backward_np,
                       _kernels.viterbi_np, _kernels.scatter_grad_np)}
    if _kernels.HAS_NUMBA:
        impls["numba"] = _kernels._build_numba()
    else:
        print("numba unavailable or disabled; timing numpy only")

    cases = {
        "emissions": lambda k: k[0](W, ids, vals, offsets),
        "forward_backward": lambda k: k[1](emit, trans, start, end),
        "viterbi": lambda k: k[2](emit, trans, start, end),
        "scatter_grad": lambda k: k[3](grad, ids, vals, offsets, coef),
    }
    print(f"labels={args.labels} length={args.length} active features/token={args.active}")
    print(f"{'kernel':<18}" + "".join(f"{name:>14}" for name in impls) + f"{'speedup':>10}")
    for case, fn in cases.items():
        times = {}
        for name, kernels in impls.items():
            fn(kernels)  # warm-up, triggers compilation
            times[name] = min(timeit.repeat(lambda: fn(kernels), number=args.repeat,
                                            repeat=3)) / args.repeat
        row = f"{case:<18}" + "".join(f"{1e6 * t:>12.1f}us" for t in times.values())
        if "numba" in times:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
