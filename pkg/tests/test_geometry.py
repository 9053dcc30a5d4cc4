"""Metric, convexity-constant, and inequality-certificate tests."""

import numpy as np
import pytest

from gradflow import (
    CanonicalGradientSystem,
    Diagonalisation,
    MetricContext,
    check_contraction,
    check_geodesic_convexity,
    check_strong_monotonicity,
    convexity_constants,
    default_theta_grid,
    essential_range_check,
    exact_flow,
    metric_distance,
    nonreversible_three_state,
    operator_norm,
    real_diagonalise,
    reversible_three_state,
    synthesize_canonical,
)

from conftest import make_diagonalisation


def test_distance_euclidean_case():
    ctx = MetricContext.from_transform(np.eye(2))
    assert metric_distance(ctx, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)


def test_distance_weighted_transform():
    ctx = MetricContext.from_transform(np.diag([2.0, 1.0]))
    # |diag(2,1) (1,1)| = sqrt(4 + 1)
    assert metric_distance(ctx, [0.0, 0.0], [1.0, 1.0]) == pytest.approx(np.sqrt(5.0))


def test_distance_vanishes_only_on_diagonal(rng):
    ctx = MetricContext.from_diagonalisation(make_diagonalisation(rng, 4))
    x = rng.standard_normal(4)
    assert metric_distance(ctx, x, x) == 0.0
    y = x + 1e-3 * rng.standard_normal(4)
    assert metric_distance(ctx, x, y) > 0.0


def test_metric_axioms_on_samples(rng):
    ctx = MetricContext.from_diagonalisation(make_diagonalisation(rng, 5, cond=40.0))
    for _ in range(50):
        a, b, c = rng.standard_normal((3, 5))
        dab = metric_distance(ctx, a, b)
        assert dab == pytest.approx(metric_distance(ctx, b, a), rel=1e-12)
        assert dab <= (metric_distance(ctx, a, c)
                       + metric_distance(ctx, c, b)) * (1.0 + 1e-12)


def test_metric_bounds_against_euclidean(rng):
    diag = make_diagonalisation(rng, 5, cond=100.0)
    ctx = MetricContext.from_diagonalisation(diag)
    for _ in range(100):
        a, b = rng.standard_normal((2, 5))
        gap = np.linalg.norm(b - a)
        d = metric_distance(ctx, a, b)
        assert gap / ctx.inverse_norm <= d * (1.0 + 1e-10)
        assert d <= ctx.transform_norm * gap * (1.0 + 1e-10)


def test_constants_for_identity_transform():
    diag = Diagonalisation(np.eye(2), np.array([-1.0, -2.0]))
    cc = convexity_constants(diag)
    assert cc.sup_eigenvalue == -1.0
    assert cc.flat_factor == pytest.approx(1.0)
    assert cc.geodesic_factor == pytest.approx(1.0)
    assert cc.flat_lambda == pytest.approx(1.0)
    assert cc.geodesic_lambda == pytest.approx(1.0)


def test_constants_for_weighted_transform():
    # norms are 2 and 1; negative spectrum takes the inverse-norm branch:
    # flat modulus 1, transferred to 1/4 in the metric
    diag = Diagonalisation(np.diag([2.0, 1.0]), np.array([-1.0, -1.0]))
    cc = convexity_constants(diag)
    assert cc.flat_lambda == pytest.approx(1.0)
    assert cc.geodesic_lambda == pytest.approx(0.25)


def test_constants_vanish_for_generator_spectrum():
    diag = real_diagonalise(reversible_three_state().matrix)
    cc = convexity_constants(diag)
    assert cc.sup_eigenvalue == pytest.approx(0.0, abs=1e-12)
    assert abs(cc.geodesic_lambda) <= 1e-12


def test_constants_direct_equals_transferred_in_both_regimes(rng):
    for _ in range(20):
        dim = int(rng.integers(2, 10))
        diag = make_diagonalisation(rng, dim, cond=10.0 ** rng.uniform(0.0, 3.0))
        for branch in ("negative", "positive"):
            if branch == "negative":
                shifted = diag.eigenvalues - np.max(diag.eigenvalues) - 1.0
            else:
                shifted = diag.eigenvalues - np.min(diag.eigenvalues) + 1.0
            cc = convexity_constants(Diagonalisation(diag.transform, shifted))
            nv = operator_norm(diag.transform)
            nvi = operator_norm(np.linalg.inv(diag.transform))
            if cc.flat_lambda > 0.0:
                composed = cc.flat_lambda / nv ** 2
            else:
                composed = cc.flat_lambda * nvi ** 2
            assert composed == pytest.approx(cc.geodesic_lambda, rel=1e-10)
            # non-positive spectrum forces a non-negative geodesic modulus
            if np.max(shifted) <= 0.0:
                assert cc.geodesic_lambda >= 0.0


def test_monotonicity_holds_at_true_modulus():
    # equality case: unit curvature saturates the bound with modulus 1
    flat = CanonicalGradientSystem(np.eye(2), np.eye(2), np.zeros(2))
    assert check_strong_monotonicity(flat, 1.0, samples=500, seed=1) == 0.0
    gs = CanonicalGradientSystem(np.eye(2), np.diag([1.0, 2.0]), np.zeros(2))
    assert check_strong_monotonicity(gs, 1.0, samples=500, seed=1) == 0.0


def test_monotonicity_detects_overstated_modulus():
    gs = CanonicalGradientSystem(np.eye(2), np.diag([1.0, 2.0]), np.zeros(2))
    violation = check_strong_monotonicity(gs, 1.5, samples=2000, seed=1)
    # worst case 0.5 |dx|^2 along the soft axis; pairs reach |dx| close to 2
    assert violation > 0.1


def test_geodesic_defect_vanishes_at_endpoints(rng):
    diag = make_diagonalisation(rng, 3)
    gs = synthesize_canonical(diag)
    ctx = MetricContext.from_diagonalisation(diag)
    lam = convexity_constants(diag).geodesic_lambda
    assert check_geodesic_convexity(gs, ctx, lam, samples=200,
                                    theta_grid=[0.0, 1.0], seed=3) == 0.0


def test_geodesic_equality_case_at_midpoint():
    # identity transform, unit curvature: the inequality is tight for modulus 1
    diag = Diagonalisation(np.eye(2), np.array([-1.0, -1.0]))
    gs = synthesize_canonical(diag)
    ctx = MetricContext.from_diagonalisation(diag)
    defect = check_geodesic_convexity(gs, ctx, 1.0, samples=500,
                                      theta_grid=[0.5], seed=4)
    assert defect <= 1e-12


def test_geodesic_certificate_for_three_state_system():
    diag = real_diagonalise(nonreversible_three_state().matrix)
    gs = synthesize_canonical(diag)
    ctx = MetricContext.from_diagonalisation(diag)
    lam = convexity_constants(diag).geodesic_lambda
    assert check_geodesic_convexity(gs, ctx, lam, samples=1000, seed=5) <= 1e-9


def test_geodesic_certificate_for_random_systems(rng):
    for seed in range(10):
        diag = make_diagonalisation(rng, int(rng.integers(2, 8)),
                                    cond=10.0 ** rng.uniform(0.0, 2.0))
        gs = synthesize_canonical(diag)
        ctx = MetricContext.from_diagonalisation(diag)
        lam = convexity_constants(diag).geodesic_lambda
        scale = operator_norm(gs.hessian) + abs(lam) * ctx.transform_norm ** 2
        assert (check_geodesic_convexity(gs, ctx, lam, samples=300, seed=seed)
                <= 1e-9 * max(scale, 1.0))


def test_default_theta_grid_probes_midpoint():
    grid = default_theta_grid()
    assert grid.size == 13
    assert grid[0] == 0.0 and grid[10] == 1.0
    assert 0.499 in grid and 0.501 in grid


def test_contraction_tight_for_diagonal_flow():
    # identity transform: modulus equals the slowest decay rate exactly
    diag = Diagonalisation(np.eye(2), np.array([-1.0, -0.3]))
    ctx = MetricContext.from_diagonalisation(diag)
    defect = check_contraction(diag, ctx, 0.3, pairs=300,
                               times=(0.5, 2.0), seed=6)
    assert defect <= 1e-12


def test_contraction_at_time_zero():
    diag = Diagonalisation(np.diag([2.0, 1.0]), np.array([-1.0, 1.0]))
    ctx = MetricContext.from_diagonalisation(diag)
    assert check_contraction(diag, ctx, -2.0, pairs=100, times=(0.0,),
                             seed=7) <= 1e-12


def test_contraction_nonexpansive_for_generators():
    for factory in (reversible_three_state, nonreversible_three_state):
        diag = real_diagonalise(factory().matrix)
        ctx = MetricContext.from_diagonalisation(diag)
        assert check_contraction(diag, ctx, 0.0, pairs=200,
                                 times=(0.1, 1.0, 10.0), seed=8) <= 1e-12


def test_exact_propagator_distance_identity(rng):
    """Sharper than the contraction bound: mode-wise decay of the distance."""
    diag = make_diagonalisation(rng, 4, cond=30.0)
    ctx = MetricContext.from_diagonalisation(diag)
    for _ in range(20):
        x1, x2 = rng.standard_normal((2, 4))
        t = float(rng.uniform(0.0, 2.0))
        moved = metric_distance(ctx, exact_flow(diag, x1, t),
                                exact_flow(diag, x2, t))
        modes = diag.transform @ (x1 - x2)
        expected = np.sqrt(np.sum(np.exp(2.0 * t * diag.eigenvalues) * modes ** 2))
        assert moved == pytest.approx(expected, rel=1e-9)


def test_essential_range_check_cases():
    eye = np.eye(3)
    assert essential_range_check(Diagonalisation(eye, np.array([0.0, -3.0, -6.0])))
    assert not essential_range_check(Diagonalisation(np.eye(2), np.array([1.0, -1.0])))
    assert essential_range_check(Diagonalisation(np.eye(2), np.array([0.0, 0.0])))
    assert essential_range_check(Diagonalisation(np.eye(2), np.array([3.0, 1.0])),
                                 spectrum_bound=3.0)


def test_metric_context_validates():
    with pytest.raises(ValueError):
        MetricContext.from_transform(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        MetricContext(np.eye(2), 0.5, 0.5)
