"""Smoke test for the subquad extension: exact values on tiny graphs,
a couple of seeded estimates, and the error types."""

import math

import subquad


def main():
    k3 = subquad.Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert k3.n == 3 and k3.max_degree == 2 and sorted(k3.neighbors(0)) == [1, 2]

    hc = subquad.Model.hardcore(k3, 1.0)
    assert hc.partition_function() == 4.0
    assert abs(hc.marginals(0)[1] - 0.25) < 1e-12

    rep = hc.count(eps=0.1, mode="aggregate", seed=7)
    assert rep["schema"] == 1 and abs(math.log(rep["z_hat"]) - math.log(4.0)) <= 0.1, rep["z_hat"]
    again = hc.count(eps=0.1, mode="aggregate", seed=7)
    assert again["z_hat"] == rep["z_hat"]

    saw = hc.count(eps=0.1, mode="saw", seed=3)
    assert abs(math.log(saw["z_hat"]) - math.log(4.0)) <= 0.1

    counts = hc.sample(0, trials=20000, batch=True, seed=1)
    assert sum(counts) == 20000 and abs(counts[1] / 20000 - 0.25) < 0.02, counts
    assert hc.sample(1, trials=10, pins={0: 1}) == [10, 0]

    ising = subquad.Model.ising(subquad.Graph(4, [(0, 1), (1, 2), (2, 3), (3, 0)]), 0.9)
    z = ising.partition_function()
    est = ising.count(eps=0.1, seed=2)["z_hat"]
    assert abs(math.log(est / z)) <= 0.1, (est, z)

    hyper = subquad.Model.hyper_is(6, 4, [[0, 1, 2, 3], [2, 3, 4, 5], [0, 1, 4, 5]])
    assert hyper.partition_function() == 54.0
    try:
        hyper.count(eps=0.1)
        raise AssertionError("hypergraph outside the proven regime must need an override")
    except subquad.RegimeError:
        pass

    est = hc.saw_estimate(0, budget=8.0, delta=0.3, seed=0)
    assert 0.0 <= est["p"] <= 1.0

    size, depth = subquad.complete_tree_boundary(3, 0.3, 1000.0)
    assert size <= 3 * 1000.0 ** (1 - math.log(1 / 0.7) / math.log(3 / 0.7))

    checks = subquad.verify("boundary")
    assert all(c["passed"] for c in checks), checks

    try:
        subquad.Graph(2, [(0, 0)])
        raise AssertionError("self-loop accepted")
    except ValueError:
        pass

    print("smoke ok")


if __name__ == "__main__":
    main()
