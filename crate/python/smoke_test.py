"""Smoke test for the pyspikeslab extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""
import json
import math
import random

import pyspikeslab as ss


def main():
    prior = ss.SasPrior(0.1, "laplace:1")
    assert 0.0 < prior.weight(0.0) < prior.weight(3.0) < 1.0
    assert abs(prior.l_value(2.0) + prior.weight(2.0) - 1.0) < 1e-12
    assert prior.median(0.3) == 0.0
    assert prior.median(6.0) > 0.0

    assert abs(ss.oracle_threshold(1000, 10) - math.sqrt(2 * math.log(100))) < 1e-12
    assert abs(ss.lambda_boundary([0.0]) - 0.5) < 1e-15

    rng = random.Random(1)
    x = [rng.gauss(0, 1) for _ in range(200)] + [6.0] * 5
    fit = ss.mmle(x)
    assert 1 / len(x) <= fit["alpha"] <= 1
    lv = ss.l_values(x)
    assert lv[-1] < 0.05 and min(lv[:200]) > 0.05

    w = [0.0] * (len(x[:8]) + 1)
    sub = ss.subset_l_values(x[:8], w)
    assert len(sub) == 8 and all(0 <= v <= 1 for v in sub)

    assert set(range(200, 205)) <= set(ss.bh(x, 0.1))

    r = ss.risk(1000, 10, 1.0, replicates=20, seed=3)
    assert 0 <= r["fnr"] <= 1

    n, p = 60, 8
    X = [[rng.gauss(0, 1) for _ in range(p)] for _ in range(n)]
    theta = [4.0, 0, 0, -4.0, 0, 0, 0, 0]
    y = [sum(a * b for a, b in zip(row, theta)) + rng.gauss(0, 1) for row in X]
    vb = ss.vb_fit(X, y)
    assert vb.gamma[0] > 0.9 and vb.gamma[3] > 0.9
    assert all(b >= a - 1e-9 for a, b in zip(vb.elbo_trace, vb.elbo_trace[1:]))

    csv, summary = ss.run_experiment("contraction", {"ns": "256,512,1024"})
    assert csv.splitlines()[0].startswith("experiment,n,alpha_prior")
    assert json.loads(summary)["kind"] == "contraction"

    print("pyspikeslab smoke test passed")


if __name__ == "__main__":
    main()
