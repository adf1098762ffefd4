"""Compare the three-dimensional 5_2 state integral with its one-dimensional
reduction on random balanced shapes.

For each shape the script prints the raw relative difference, the relative
difference of the moduli and the difference left after the quadratic level
P = -2 (1 - 2 a3)^2 + 4 (a1 - c2)(c1 - b2) is applied to the direct value.
"""
import argparse
import random
from importlib import resources

from teichtqft import codec, state
from teichtqft.errors import TqftError
from teichtqft.qdilog import QDilogParams


def random_shape(rng):
    while True:
        a1, a3 = rng.uniform(0.03, 0.45), rng.uniform(0.03, 0.45)
        c2 = 2 * a3 - a1
        c1, b2 = rng.uniform(0.03, 0.45), rng.uniform(0.03, 0.45)
        b3 = c1 + b2
        a = (a1, 0.5 - b2 - c2, a3)
        b = (0.5 - a1 - c1, b2, b3)
        c = (c1, c2, 0.5 - a3 - b3)
        if min(a + b + c) > 0.03:
            return a, b, c


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    p = QDilogParams(args.b)
    tri = codec.parse((resources.files("teichtqft") / "data" / "five2.tri").read_text())
    print("a, b, c, raw, modulus, after level")
    for _ in range(args.count):
        a, b, c = random_shape(rng)
        try:
            direct = state.partition_function(tri, state.five2_shape(a, b, c), p).value
            red = state.z52_reduced(a, b, c, p).value
        except TqftError as e:
            print(f"{a} {b} {c}: skipped ({e})")
            continue
        level = -2 * (1 - 2 * a[2]) ** 2 + 4 * (a[0] - c[1]) * (c[0] - b[1])
        fixed = state.apply_level(direct, level, p.hbar)
        fmt = lambda t: "(" + ", ".join(f"{x:.3f}" for x in t) + ")"  # noqa: E731
        print(f"{fmt(a)} {fmt(b)} {fmt(c)}  {abs(direct - red) / abs(red):.2e}  "
              f"{abs(abs(direct) - abs(red)) / abs(red):.1e}  {abs(fixed - red) / abs(red):.1e}")


if __name__ == "__main__":
    main()
