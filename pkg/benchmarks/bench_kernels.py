"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--step] [--json out.json]

Kernel timings call both modules directly. ``--step`` also times a full
training step of the desk model in a subprocess per backend, since the
backend is fixed at import.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from teachlab.numerics import _pykernels

try:
    from teachlab.numerics import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    # Shapes seen in the desk model: attention scores, LN rows, MLP activations, logits.
    scores = rng.normal(size=(32 * 4 * 8, 40))
    rows = rng.normal(size=(32 * 40, 32))
    gamma, beta = rng.normal(size=32), rng.normal(size=32)
    act = rng.normal(size=32 * 40 * 128)
    logits = rng.normal(size=(32 * 8, 19))
    targets = rng.integers(0, 19, size=32 * 8).astype(np.int64)
    weights = np.ones(32 * 8)
    words = ["".join(rng.choice(list("abcdefgh"), size=rng.integers(1, 9))) for _ in range(512)]

    def lev(k):
        return lambda: [k.levenshtein(a, b) for a, b in zip(words, words[1:])]

    def soft_bw(k):
        y = k.softmax_rows(scores)
        return lambda: k.softmax_rows_backward(y, scores)

    def ln_bw(k):
        _, xhat, rstd = k.layer_norm_rows(rows, gamma, beta, 1e-5)
        return lambda: k.layer_norm_rows_backward(rows, xhat, rstd, gamma)

    def gelu_bw(k):
        _, t = k.gelu(act)
        return lambda: k.gelu_backward(act, t, act)

    return {
        "softmax_rows": lambda k: (lambda: k.softmax_rows(scores)),
        "softmax_rows_backward": soft_bw,
        "layer_norm_rows": lambda k: (lambda: k.layer_norm_rows(rows, gamma, beta, 1e-5)),
        "layer_norm_rows_backward": ln_bw,
        "gelu": lambda k: (lambda: k.gelu(act)),
        "gelu_backward": gelu_bw,
        "cross_entropy_rows": lambda k: (lambda: k.cross_entropy_rows(logits, targets, weights)),
        "levenshtein x511": lev,
    }


STEP_SNIPPET = """
import time, numpy as np
from teachlab.model import ModelConfig
from teachlab.curriculum import ScheduleParams
from teachlab.training import RunConfig, Trainer
from teachlab.numerics.kernels import BACKEND
cfg = RunConfig(model=ModelConfig(E_s=32, patch_h=32, patch_w=4, S=8, vocab_size=19, decoder_kind="ar_decoder"),
                schedule=ScheduleParams(kind="loss_aware"), alphabet="abcdefghijklmnop", steps=1, eval_every=1)
tr = Trainer(cfg)
rng = np.random.default_rng(0)
images = rng.random((32, 32, 128))
ids = np.zeros((32, 8), np.int64); ids[:, 0] = 1; ids[:, 1:5] = rng.integers(3, 19, (32, 4)); ids[:, 5] = 2
tr.step(images, ids)
t = time.perf_counter()
for _ in range({n}):
    tr.step(images, ids)
print(BACKEND, (time.perf_counter() - t) / {n} * 1000)
"""


def time_step(pure: bool, n: int):
    env = dict(os.environ, TEACHLAB_THREADS="1")
    if pure:
        env["TEACHLAB_PURE_PYTHON"] = "1"
    else:
        env.pop("TEACHLAB_PURE_PYTHON", None)
    out = subprocess.run([sys.executable, "-c", STEP_SNIPPET.format(n=n)], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--step", action="store_true", help="also time a full training step per backend")
    ap.add_argument("--step-iters", type=int, default=20)
    ap.add_argument("--json", help="write results to this file")
    args = ap.parse_args(argv)

    if _ckernels is None:
        print("compiled kernels not built; only the numpy fallback is available", file=sys.stderr)
    rng = np.random.default_rng(0)
    results = {}
    print(f"{'kernel':<26} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for name, make in cases(rng).items():
        py = min(timeit.repeat(make(_pykernels), number=1, repeat=args.repeat)) * 1000
        cy = min(timeit.repeat(make(_ckernels), number=1, repeat=args.repeat)) * 1000 if _ckernels else float("nan")
        results[name] = {"python_ms": py, "cython_ms": cy}
        print(f"{name:<26} {py:>10.3f} {cy:>10.3f} {py / cy:>7.2f}x")

    if args.step:
        for pure in (True, False):
            backend, ms = time_step(pure, args.step_iters)
            results[f"train_step[{backend}]"] = {"ms": ms}
            print(f"train step, {backend:<7} backend: {ms:.1f} ms")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
            fh.write("\n")


if __name__ == "__main__":
    main()
