"""Local CP / local P tests and the torus minimizer."""

import numpy as np
import pytest

from divq import (
    MasterEquationForm,
    MinimizerOptions,
    TorusPoint,
    XShapeParams,
    classify,
    local_cp,
    local_p,
    p_value,
)
from divq.divisibility import _p_evaluator, torus_minimize

from tests.conftest import brute_p_min, random_hermitian, random_master, x_master

# Dense-grid angles shared by the minimizer-coverage tests (the package
# evaluator is evaluated on this grid as a brute-force floor).
_N_DENSE = 512
_TT, _BB = np.meshgrid(np.linspace(0.0, np.pi, _N_DENSE),
                       np.linspace(0.0, 2 * np.pi, _N_DENSE, endpoint=False),
                       indexing="ij")


def dense_grid_min(m: MasterEquationForm) -> float:
    return float(_p_evaluator(m)(_TT, _BB).min())


def test_p_value_zero_generator():
    m = MasterEquationForm(np.zeros((2, 2)), np.zeros((3, 3)))
    for pt in (TorusPoint(0.0, 0.0), TorusPoint(1.0, 2.0),
               TorusPoint(np.pi, 5.0)):
        assert p_value(m, pt) == 0.0


def test_p_value_identity_dissipator():
    # R = 2, S = 0; at theta = pi/2: 2p = R + (D11 - R/2) = 2 + 0 = 2.
    m = MasterEquationForm(np.zeros((2, 2)), np.eye(3))
    assert p_value(m, TorusPoint(np.pi / 2, 0.0)) == pytest.approx(2.0,
                                                                   abs=1e-12)


def test_p_value_x_boundary_point():
    # 2p = 2 + (0 - 1) - 1 = 0 at theta = pi/2, beta = 0.
    m = x_master(XShapeParams(0.0, 1.0, 1.0, 1.0))
    assert p_value(m, TorusPoint(np.pi / 2, 0.0)) == pytest.approx(0.0,
                                                                   abs=1e-12)


def test_p_value_ignores_hamiltonian(rng):
    d = random_hermitian(rng, 3)
    pts = [TorusPoint(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi))
           for _ in range(5)]
    base = MasterEquationForm(np.zeros((2, 2)), d)
    for _ in range(100):
        h = random_hermitian(rng, 2)
        h -= np.trace(h) / 2 * np.eye(2)
        m = MasterEquationForm(h, d)
        for pt in pts:
            assert abs(p_value(m, pt) - p_value(base, pt)) <= 1e-15


def test_p_value_periodicity(rng):
    m = random_master(rng)
    for _ in range(20):
        th = rng.uniform(0, np.pi)
        be = rng.uniform(0, 2 * np.pi)
        assert p_value(m, TorusPoint(th, be + 2 * np.pi)) == pytest.approx(
            p_value(m, TorusPoint(th, be)), abs=1e-12)
        assert p_value(m, TorusPoint(th + 2 * np.pi, be)) == pytest.approx(
            p_value(m, TorusPoint(th, be)), abs=1e-12)
        # sphere identification: (-theta, beta) ~ (theta, beta + pi)
        assert p_value(m, TorusPoint(-th, be)) == pytest.approx(
            p_value(m, TorusPoint(th, be + np.pi)), abs=1e-12)


def test_local_p_zero_dissipator_any_hamiltonian(rng):
    h = random_hermitian(rng, 2)
    h -= np.trace(h) / 2 * np.eye(2)
    ok, (point, minimum) = local_p(MasterEquationForm(h, np.zeros((3, 3))))
    assert ok
    assert minimum == pytest.approx(0.0, abs=1e-12)


def test_local_p_x_boundary_minimum_location():
    ok, (point, minimum) = local_p(x_master(XShapeParams(0.0, 1.0, 1.0, 1.0)))
    assert ok
    assert minimum == pytest.approx(0.0, abs=1e-9)
    assert point.theta == pytest.approx(np.pi / 2, abs=1e-3)


def test_local_p_matches_physical_sandwich(rng):
    """The torus minimum equals the minimum of 2 <psi|L[|phi><phi|]|psi>
    computed with the independent applier on a dense grid."""
    for _ in range(30):
        m = random_master(rng)
        _, (_, minimum) = local_p(m)
        brute = brute_p_min(m, n=256)
        scale = max(1.0, float(np.max(np.abs(m.d))))
        assert minimum <= brute + 1e-9
        assert abs(minimum - brute) <= 5e-3 * scale


def test_local_p_matches_dense_grid(rng):
    """Minimizer-coverage run against a 512 x 512 brute-force grid."""
    mismatches = 0
    for _ in range(1000):
        m = random_master(rng)
        ok, (_, minimum) = local_p(m)
        floor = dense_grid_min(m)
        scale = max(1.0, float(np.max(np.abs(m.d))))
        # the refined minimum may not sit above the dense grid's floor
        assert minimum <= floor + 1e-12
        assert floor - minimum <= 5e-3 * scale
        if abs(floor) <= 5e-4 * scale:
            continue  # boundary band at grid resolution
        mismatches += ok != (floor >= -1e-6)
    assert mismatches == 0


def test_local_cp_zero():
    ok, witness = local_cp(MasterEquationForm(np.zeros((2, 2)),
                                              np.zeros((3, 3))))
    assert ok and witness is None


def test_local_cp_x_witness():
    ok, witness = local_cp(x_master(XShapeParams(-0.5, 2.0, 2.0, 1.0)))
    assert not ok
    assert witness.indices == (0,)
    assert witness.value == -0.5


def test_local_cp_random_psd(rng):
    from divq import eigen_psd
    for _ in range(100):
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        d = b.conj().T @ b
        m = MasterEquationForm(np.zeros((2, 2)), d)
        ok, _ = local_cp(m)
        assert ok
        assert eigen_psd(d).is_psd


def test_classify_identity_dissipator():
    v = classify(MasterEquationForm(np.zeros((2, 2)), np.eye(3)))
    assert v.locally_cp and v.locally_p
    assert v.cp_witness is None and v.p_witness is None
    assert v.cp_margin == pytest.approx(1.0, abs=1e-12)
    assert not v.cp_marginal and not v.p_marginal


def test_classify_p_not_cp():
    v = classify(x_master(XShapeParams(-0.5, 2.0, 2.0, 1.0)))
    assert not v.locally_cp and v.locally_p
    assert v.cp_witness.indices == (0,)
    assert v.cp_margin == pytest.approx(-0.5, abs=1e-12)
    assert v.p_margin > 0


def test_classify_neither():
    # X-shaped with D22 D33 < (|D23| - D11)^2 and D11 < |D23|
    v = classify(x_master(XShapeParams(-0.5, 1.0, 1.0, 1.0)))
    assert not v.locally_cp and not v.locally_p
    assert v.p_witness is not None
    point, value = v.p_witness
    assert value == v.p_margin < 0
    assert p_value(x_master(XShapeParams(-0.5, 1.0, 1.0, 1.0)),
                   point) == pytest.approx(value, abs=1e-9)


def test_classify_zero_generator_is_cp():
    v = classify(MasterEquationForm(np.zeros((2, 2)), np.zeros((3, 3))))
    assert v.locally_cp and v.locally_p
    assert v.cp_marginal and v.p_marginal


def test_cp_implies_p(rng):
    """Complete positivity implies positivity on random PSD dissipators.

    classify() itself raises on any violation; coarse minimizer settings
    keep the large run cheap without weakening the check (a coarser grid
    can only overestimate the minimum, never fake a violation).
    """
    opts = MinimizerOptions(grid=16, starts=2)
    for _ in range(10_000):
        b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        m = MasterEquationForm(np.zeros((2, 2)), b.conj().T @ b)
        v = classify(m, opts)
        assert v.locally_cp and v.locally_p


def p_positive_instance(rng):
    """A generator exactly on or just inside the P region.

    Adding c * identity to D shifts the p functional by the constant c,
    so shifting a random D up by its own violation lands on the boundary.
    """
    g = random_hermitian(rng, 3)
    _, (_, minimum) = local_p(MasterEquationForm(np.zeros((2, 2)), g))
    lift = -minimum / 2.0 + rng.uniform(0.0, 0.2)
    d = g + lift * np.eye(3)
    m = MasterEquationForm(np.zeros((2, 2)), d)
    _, (_, shifted) = local_p(m)
    return m, shifted


def test_identity_shift_moves_minimum_by_constant(rng):
    for _ in range(20):
        g = random_hermitian(rng, 3)
        c = rng.uniform(-1.0, 1.0)
        _, (_, base) = local_p(MasterEquationForm(np.zeros((2, 2)), g))
        _, (_, moved) = local_p(
            MasterEquationForm(np.zeros((2, 2)), g + c * np.eye(3)))
        assert moved == pytest.approx(base + 2 * c, abs=1e-9)


def test_p_region_is_convex(rng):
    """min_p is concave in D, so P-verdicts survive convex combination."""
    for _ in range(50):
        a, ma = p_positive_instance(rng)
        b, mb = p_positive_instance(rng)
        assert ma >= -1e-9 and mb >= -1e-9
        lam = rng.uniform()
        mid = MasterEquationForm(np.zeros((2, 2)),
                                 lam * a.d + (1 - lam) * b.d)
        _, (_, mm) = local_p(mid)
        assert mm >= lam * ma + (1 - lam) * mb - 1e-9


def test_torus_minimize_linear_batch():
    """Three direction functionals with known minima, solved in lockstep."""
    a = np.array([0.7, -0.3, 1.1])
    b = np.array([0.4, 1.2, 0.05])
    c = np.array([2.0, 0.0, -1.0])

    def f(theta, beta):
        e3 = np.cos(theta)
        e1 = np.sin(theta) * np.cos(beta)
        return c + a * e3 + b * e1

    values, theta, beta = torus_minimize(f, n=3, grid=48, starts=4)
    want = c - np.hypot(a, b)
    np.testing.assert_allclose(values, want, atol=1e-9)
    # verify the reported minimizers by direct evaluation
    np.testing.assert_allclose(f(theta, beta), values, atol=1e-12)
    assert np.all(theta >= 0) and np.all(theta <= np.pi)
    assert np.all(beta >= 0) and np.all(beta < 2 * np.pi)


def test_torus_minimize_respects_ftol():
    calls = []

    def f(theta, beta):
        calls.append(1)
        return np.cos(theta) * 0 + np.sin(beta) + 2.0

    values, _, _ = torus_minimize(f, n=1, grid=32, starts=2, ftol=1e-12)
    assert values[0] == pytest.approx(1.0, abs=1e-9)


def test_minimizer_defaults():
    opts = MinimizerOptions()
    assert opts.grid == 64
    assert opts.starts == 8
    assert opts.tol == 1e-9
    assert opts.ftol == 1e-12


def test_p_value_rejects_qutrit(rng):
    m = random_master(rng, dim=3)
    with pytest.raises(ValueError, match="qubit"):
        p_value(m, TorusPoint(0.3, 0.4))
