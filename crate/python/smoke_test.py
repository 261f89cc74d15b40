"""Smoke test for the pynehari extension module.

Build first:
    cargo build --release -p nehari-py --features extension-module
then run:
    python3 python/smoke_test.py
The script copies target/release/libpynehari.so to a temporary directory as
pynehari.so and imports it from there.
"""

import json
import math
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    lib = ROOT / "target" / "release" / "libpynehari.so"
    if not lib.exists():
        sys.exit(f"{lib} not found; build with --features extension-module first")
    tmp = pathlib.Path(tempfile.mkdtemp())
    shutil.copy(lib, tmp / "pynehari.so")
    sys.path.insert(0, str(tmp))
    import pynehari

    return pynehari


def main():
    nh = load()

    t = nh.nodes(401)
    sine = [math.sin(math.pi * x) for x in t]
    sine[0] = sine[-1] = 0.0
    assert abs(nh.norm_w1p(sine, 2.0) - math.pi / math.sqrt(2.0)) < 1e-5

    u = nh.invert_j([1.0] * 401, 2.0)
    assert max(abs(a - x * (1 - x) / 2) for a, x in zip(u, t)) < 1e-12

    eig = nh.eigen(2.0)
    assert sorted(eig) == ["c_p", "lambda_p", "p"]
    assert abs(eig["lambda_p"] - math.pi**2) < 1e-4

    cubic = nh.Nonlinearity.power_sum([(1.0, 3.0)])
    assert json.loads(cubic.to_json()) == {"variant": "power_sum", "terms": [[1.0, 3.0]]}
    assert cubic.f(2.0) == 8.0 and cubic.F(2.0) == 4.0

    assert abs(nh.capital_phi(0.25, 2.0) - 1 / 48) < 1e-10
    rep = nh.check_hypotheses(cubic, 2.0, 0.25, 1.0, 120.0)
    assert rep["h1_pass"] and rep["h2_pass"] and rep["h2prime_pass"] is False

    res = nh.solve(cubic, 2.0, 1.0, 120.0)
    assert res.converged and 1.0 < res.norm < 120.0
    assert abs(res.projection_factors[-1] - 1.0) < 1e-6
    assert res.report()["cone"]["member"]

    oracle = nh.shoot(cubic, 2.0, 1.0, 100.0)
    diff = [a - b for a, b in zip(res.solution, oracle["solution"])]
    assert nh.norm_w1p(diff, 2.0) < 1e-4

    assert nh.check_cone(res.solution, 2.0)["member"]
    assert nh.harnack(u, 2.0)["status"] == "holds"

    zero = nh.solve(nh.Nonlinearity.power_sum([]), 2.0, 1.0, 120.0)
    assert not zero.converged
    assert zero.report()["status"]["kind"] == "projection_failed"

    try:
        nh.invert_j([1.0] * 400, 2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("even grid accepted")

    print(f"pynehari smoke test passed: |u| = {res.norm:.10f}, {res.iters} iterations")


if __name__ == "__main__":
    main()
