"""Minimal end-to-end check of the Python bindings."""

import math

import isocert


def main():
    g = isocert.Measure("gauss")
    assert abs(g.cdf(0.0) - 0.5) < 1e-12
    assert abs(g.tilde_profile([0.5])[0] - 1.0 / math.sqrt(2.0 * math.pi)) < 1e-10

    assert abs(isocert.cost_value(1.0, 1.5, 2.0) - 1.7189514164974602) < 1e-9
    conj = isocert.conjugate("c:1:1.5", [0.0, 2.5, 5.0])
    dual = [isocert.cost_value(1.0, 3.0, x) for x in (0.0, 2.5, 5.0)]
    assert all(abs(a - b) <= 1e-4 * max(1.0, b) for a, b in zip(conj, dual))
    assert abs(isocert.phi(2.0) - math.exp(2.0)) < 1e-5 * math.exp(2.0)

    assert g.check(cost="quadratic:0.5", k=2.0)["verdict"] == "FINITE"
    assert isocert.Measure("exp").check(cost="quadratic:0.5")["verdict"] == "DIVERGENT_LIKELY"

    try:
        isocert.eval_expr("log(x)", -1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected a domain error")

    print("smoke test passed")


if __name__ == "__main__":
    main()
