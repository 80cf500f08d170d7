"""Smoke test for the qmcube_py extension module.

Build first:  pip install --no-build-isolation -e crates/python
"""

import math

import qmcube_py as q


def main():
    tol = q.Tolerance(1e-3, 0.0)
    assert tol.value(1.0, 1.0) == 0.0
    assert tol.optimal_estimate(0.0, 1.0) == 0.5

    r = q.integrate(lambda x: x[0] * x[1], 2, tol, seed=3)
    assert r.tolerance_met, r
    assert abs(r.v_hat - 0.25) <= 1e-3, r
    print("integrate x*y:", r)

    r = q.integrate(lambda x: 1.0 + math.sin(2 * math.pi * x[0]), 1, tol, family="lattice")
    assert abs(r.v_hat - 1.0) <= 1e-3, r

    try:
        q.integrate(lambda x: 1 / 0, 1, tol)
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("integrand exception was swallowed")

    try:
        q.Tolerance(0.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("zero tolerance accepted")

    r = q.mvn_probability([[1.0, 0.5], [0.5, 1.0]], [0.0, 0.0], q.Tolerance(1e-4))
    assert abs(r.v_hat - 1 / 3) <= 1e-4, r
    print("bivariate orthant:", r)

    plain = q.asian_price(q.Tolerance(0.02), control_variate=False, seed=1)
    cv = q.asian_price(q.Tolerance(0.02), control_variate=True, seed=1)
    assert abs(plain.v_hat - cv.v_hat) <= 0.04
    print("asian n plain/cv:", plain.n, cv.n)

    for j, ref, v_hat, t, n in q.sobol_indices(q.Tolerance(0.01)):
        print(f"S_{j}: ref={ref:.4f} v_hat={v_hat:.4f} tol={t:.3f} n={n}")

    pts = q.points("digital", 3, 8, seed=5)
    assert len(pts) == 8 and all(0.0 <= c < 1.0 for p in pts for c in p)
    assert q.fwht([1.0, 1.0, 1.0, 1.0])[0] == 1.0

    for name, passed, report in q.selftest(seed=2):
        print(name, "ok" if passed else "FAILED", report)
        assert passed
    print("smoke test passed")


if __name__ == "__main__":
    main()
