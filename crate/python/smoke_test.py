"""Smoke test for the compiled extension.

Build and run from the repository root:

    cargo build --release -p coarse-manifold-py --features extension-module
    cp target/release/libcoarse_manifold_py.so python/coarse_manifold_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import coarse_manifold_py as cm


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    toy = cm.CoarseModel.toy()
    y = toy.evaluate([0.2, 0.2, 0.1])
    assert all(close(u, v, 1e-15) for u, v in zip(y, [-0.1, -0.06, 0.24]))

    model, report = toy.fit(
        "stable",
        [0.0, 0.0, 0.0],
        [[-0.2, -0.2], [-0.2, 0.2], [0.2, -0.2], [0.2, 0.2]],
        degree=2,
        k_max=3,
        eps_q=0.05,
        tol=1e-4,
    )
    assert json.loads(report)["converged"]
    a02 = model.coefficient(0, [0, 2])
    a21 = model.coefficient(0, [2, 1])
    print(f"toy fit: a02={a02:.5f} a21={a21:.5f}")
    assert close(a02, -4 / 7, 5e-3) and close(a21, 32 / 119, 5e-3)

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "toy.json")
        model.save(path)
        again = cm.ManifoldModel.load(path)
        assert again.q == model.q
        assert cm.ManifoldModel.from_json(model.to_json()).basis == cm.basis(2, 2)

    mf = cm.CoarseModel.meanfield(beta=20.7)
    sp = mf.fixed_point([0.31, 0.04, 0.65], tol=1e-12)
    print("mean-field saddle:", [round(v, 4) for v in sp.x], sp.stability)
    assert sp.stability == "saddle"
    for got, want in zip(sp.x, [0.2924, 0.0294, 0.6492]):
        assert close(got, want, 1e-3)

    stable = cm.ode_manifold("stable")
    c2 = stable.coefficient(0, [2])
    print(f"ODE stable h1 z^2: {c2:.4f}")
    assert close(c2, -4.6775, 0.05)

    fitted, _ = mf.fit("stable", sp.x, [[z] for z in (-0.005, -0.003, -0.001, 0.001, 0.003, 0.005)], outer_radius=0.03)
    assert close(fitted.coefficient(0, [2]), c2, 0.05 * abs(c2))

    kmc = cm.CoarseModel.kmc(width=16, height=16, realizations=4, horizon=0.1)
    a = kmc.evaluate([0.3, 0.03, 0.65])
    assert a == kmc.evaluate([0.3, 0.03, 0.65])
    assert all(v >= 0 for v in a) and sum(a) <= 1 + 1e-12

    try:
        mf.evaluate([0.1, 0.2])
    except ValueError as e:
        print("dimension error:", e)
    else:
        raise AssertionError("expected ValueError")

    assert not math.isnan(sp.residual_norm)
    print("smoke test passed")


if __name__ == "__main__":
    main()
