"""Compare the compiled and pure-Python numeric backends.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Times a dense matmul, one forward+backward pass of the default tanh network
and a short L-BFGS training run, on each available backend, and checks the
backends agree bit for bit.
"""

import argparse
import time
import timeit

from pathloss_ann import data, mlp, numeric, optimizer
from pathloss_ann.mlp import NetworkConfig
from pathloss_ann.numeric import Rng, uniform


def cases():
    rng = Rng(1)
    a = uniform(rng, -1, 1, 200, 200)
    b = uniform(rng, -1, 1, 200, 200)
    split = data.split(data.generate(data.preset("area-b-analog")), 0)
    t = data.fit_transform(split.learn)
    x, y = t.apply(split.learn), split.learn.targets()
    net = mlp.init_weights(NetworkConfig(hidden_layers=1, hidden_nodes=40), Rng(2))
    deep = mlp.init_weights(NetworkConfig(hidden_layers=6, hidden_nodes=40, activation="relu"), Rng(3))

    def step(n):
        pred, trace = mlp.forward(n, x)
        return mlp.backward(n, trace, x, y)

    def short_train():
        return optimizer.train(net, x, y, optimizer.OptimizerConfig(max_iterations=20))[0]

    return {
        "matmul 200x200": lambda: numeric.matmul(a, b),
        f"fwd+bwd tanh 1x40, N={x.rows}": lambda: step(net),
        f"fwd+bwd relu 6x40, N={x.rows}": lambda: step(deep),
        "L-BFGS 20 iterations, tanh 1x40": short_train,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = numeric.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the python backend is available")
    work = cases()
    results = {}
    print(f"{'case':<38}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in work.items():
        times = {}
        for b in backends:
            with numeric.use_backend(b):
                results[(name, b)] = fn()
                times[b] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        row = f"{name:<38}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)
    if len(backends) > 1:
        same = all(results[(n, "python")] == results[(n, "cython")] for n in work)
        print(f"backends bit-identical: {same}")


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"total {time.perf_counter() - t0:.1f} s")
