"""Smoke test for the pywmnc extension module.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python3 python/smoke_test.py` from the repository root.
"""

import math
import pathlib
import random
import sys

import pywmnc

ROOT = pathlib.Path(__file__).resolve().parent.parent


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def check(name, ok):
    print(("ok   " if ok else "FAIL ") + name)
    return ok


def main():
    results = []

    plane = pywmnc.MetricSpace.euclidean(2)
    a = pywmnc.DiscreteMeasure(plane, [[0, 0]])
    b = pywmnc.DiscreteMeasure(plane, [[3, 4]])
    results.append(check("dirac distance", all(
        pywmnc.w1(a, b, m) == 5.0 for m in ("auto", "primal", "dual"))))

    line = pywmnc.MetricSpace.real_line()
    p = pywmnc.DiscreteMeasure(line, [0, 1, 3], [0.25, 0.25, 0.5])
    q = pywmnc.DiscreteMeasure(line, [1, 2, 6], [0.5, 0.25, 0.25])
    t = pywmnc.transport(p, q)
    results.append(check("line transport", close(t["value"], 1.25) and abs(t["gap"]) < 1e-9))
    results.append(check("coupling shape", len(t["coupling"]) == 3))

    try:
        from scipy.stats import wasserstein_distance
    except ImportError:
        wasserstein_distance = None
    if wasserstein_distance is not None:
        rng = random.Random(7)
        ok = True
        for _ in range(50):
            xs = [rng.uniform(-5, 5) for _ in range(rng.randint(1, 8))]
            ys = [rng.uniform(-5, 5) for _ in range(rng.randint(1, 8))]
            wx = [rng.uniform(0.1, 1) for _ in xs]
            wy = [rng.uniform(0.1, 1) for _ in ys]
            mine = pywmnc.w1(
                pywmnc.DiscreteMeasure(line, xs, wx, renormalize=True),
                pywmnc.DiscreteMeasure(line, ys, wy, renormalize=True),
                "primal",
            )
            ok &= close(mine, wasserstein_distance(xs, ys, wx, wy), 1e-8)
        results.append(check("agrees with scipy on the line", ok))

    m = pywmnc.DiscreteMeasure.read(ROOT / "data" / "p_line.json")
    results.append(check("roundtrip", pywmnc.DiscreteMeasure.from_dict(m.to_dict()).weights == m.weights))

    try:
        pywmnc.DiscreteMeasure.from_dict({"space": {"kind": "real_line"}, "support": [0, 1], "weights": [1]})
        results.append(check("bad input raises", False))
    except ValueError:
        results.append(check("bad input raises", True))

    fam = pywmnc.Family({"builtin": "counterexample", "M": 1.0, "horizon": 40})
    mnc = fam.mnc(k=2)
    results.append(check("counterexample mnc", close(mnc["mnc"]["bracket"]["lower"], 1.0)
                         and close(mnc["mnc"]["bracket"]["upper"], 1.0) and mnc["replay_ok"]))
    ui = fam.ui()
    results.append(check("counterexample ui", ui["bracket"]["lower"] == 0.0 and ui["bracket"]["upper"] == 0.0))
    results.append(check("counterexample check", pywmnc.counterexample(2.0, 50)["passed"]))

    linear = pywmnc.Family({"builtin": "dirac_sequence", "sequence": "linear", "horizon": 20})
    upper = linear.ui()["bracket"]["upper"]
    results.append(check("infinite upper is a string", upper == "inf" or math.isinf(float(upper))))

    report = pywmnc.Family.read(ROOT / "data" / "spike.json").verify()
    results.append(check("spike verify", report["passed"] and report["tight"]))

    failed = results.count(False)
    print(f"{len(results) - failed} passed, {failed} failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
