import math

import pytest
from scipy.optimize import brentq

from merosin.errors import EvaluationError, NonConvergenceError, ValidationError
from merosin.rootkit import Bracket, RootMethod, bisect, newton_hybrid, solve2d


def test_bracket_requires_sign_change_and_order():
    with pytest.raises(ValidationError):
        Bracket.of(lambda x: x * x + 1, -1.0, 1.0)
    with pytest.raises(ValidationError):
        Bracket(2.0, 1.0, -1.0, 1.0)


def test_bracket_rejects_nan_endpoint():
    with pytest.raises(EvaluationError):
        Bracket.of(lambda x: math.nan if x > 0.5 else x - 0.3, 0.0, 1.0)


def test_bisect_finds_sqrt2():
    fn = lambda x: x * x - 2.0
    result = bisect(fn, Bracket.of(fn, 0.0, 2.0))
    assert abs(result.root - math.sqrt(2.0)) < 1e-12
    assert result.method is RootMethod.BISECTION


def test_newton_hybrid_converges_fast():
    fn = lambda x: math.cos(x) - x
    dfn = lambda x: -math.sin(x) - 1.0
    result = newton_hybrid(fn, dfn, Bracket.of(fn, 0.0, 1.0))
    assert abs(result.root - 0.7390851332151607) < 1e-11
    assert abs(result.residual) <= 1e-11
    assert result.iterations < 20


def test_newton_hybrid_survives_useless_derivative():
    fn = lambda x: x ** 3 - 2.0
    result = newton_hybrid(fn, lambda x: 0.0, Bracket.of(fn, 0.0, 2.0))
    assert abs(result.root - 2.0 ** (1.0 / 3.0)) < 1e-11


def test_newton_hybrid_reports_exhausted_budget():
    fn = lambda x: x ** 3 - 2.0
    with pytest.raises(NonConvergenceError):
        newton_hybrid(fn, lambda x: 3 * x * x, Bracket.of(fn, 0.0, 2.0), tol_x=0.0, tol_f=0.0, max_iter=3)


def test_solve2d_circle_and_diagonal():
    F = lambda u, v: (u * u + v * v - 4.0, u - v)
    u, v = solve2d(F, (1.0, 2.0))
    assert abs(u - math.sqrt(2.0)) < 1e-8
    assert abs(v - math.sqrt(2.0)) < 1e-8


def test_solve2d_without_real_root_fails():
    with pytest.raises(NonConvergenceError):
        solve2d(lambda u, v: (u * u + 1.0, v), (0.5, 0.5), max_iter=50)


def test_bisect_reference_cases():
    linear = lambda x: x - 1.0
    assert bisect(linear, Bracket.of(linear, 0.0, 2.0)).root == 1.0

    cube = lambda x: math.sin(x) - x ** 3
    x0 = bisect(cube, Bracket.of(cube, 0.5, 1.0)).root
    assert abs(x0 - brentq(cube, 0.5, 1.0, xtol=1e-15)) < 1e-11
    assert abs(x0 - 0.9286263) < 1e-5

    cos_line = lambda p: math.cos(p) - 2.0 * math.pi * p
    p = bisect(cos_line, Bracket.of(cos_line, 0.1, 0.2)).root
    assert abs(p - brentq(cos_line, 0.1, 0.2, xtol=1e-15)) < 1e-11
    assert abs(p - 0.157193) < 1e-5


def test_newton_hybrid_reference_cases():
    square = lambda x: x * x - 2.0
    result = newton_hybrid(square, lambda x: 2.0 * x, Bracket.of(square, 1.0, 2.0), tol_f=1e-15)
    assert abs(result.root - math.sqrt(2.0)) < 1e-12

    x_star_eq = lambda x: x * math.cos(x) + math.sin(x) - 2.0 * x ** 3
    x_star_slope = lambda x: 2.0 * math.cos(x) - x * math.sin(x) - 6.0 * x * x
    x_star = newton_hybrid(x_star_eq, x_star_slope, Bracket.of(x_star_eq, 0.8, 0.9)).root
    assert abs(x_star - brentq(x_star_eq, 0.8, 0.9, xtol=1e-15)) < 1e-10
    assert abs(x_star - 0.872117) < 1e-5

    flip = lambda y: y * math.cosh(y) + math.sinh(y) - 2.0 * y ** 3
    flip_slope = lambda y: 2.0 * math.cosh(y) + y * math.sinh(y) - 6.0 * y * y
    y1 = newton_hybrid(flip, flip_slope, Bracket.of(flip, 3.5, 4.0)).root
    assert abs(y1 - brentq(flip, 3.5, 4.0, xtol=1e-15)) < 1e-10
    assert abs(y1 - 3.85298) < 1e-4


def test_newton_hybrid_stays_inside_the_bracket():
    # Newton from the midpoint of [-0.5, 5] overshoots far outside for atan
    seen = []

    def fn(x):
        seen.append(x)
        return math.atan(x)

    b = Bracket.of(fn, -0.5, 5.0)
    seen.clear()
    result = newton_hybrid(fn, lambda x: 1.0 / (1.0 + x * x), b)
    assert abs(result.root) < 1e-11
    assert seen
    assert all(-0.5 <= x <= 5.0 for x in seen)


def test_root_finders_are_deterministic():
    fn = lambda x: x * math.cos(x) + math.sin(x) - 2.0 * x ** 3
    dfn = lambda x: 2.0 * math.cos(x) - x * math.sin(x) - 6.0 * x * x
    b = Bracket.of(fn, 0.8, 0.9)
    assert newton_hybrid(fn, dfn, b) == newton_hybrid(fn, dfn, b)
    assert bisect(fn, b) == bisect(fn, b)
    F = lambda y, lam: (math.sinh(y) - y * (y * y - lam), y * math.cosh(y) - math.sinh(y) - 2.0 * y ** 3)
    assert solve2d(F, (4.7, 10.0)) == solve2d(F, (4.7, 10.0))


def test_newton_hybrid_wide_tol_x_still_meets_residual():
    fn = lambda x: 1e3 * (x * x - 2.0)
    result = newton_hybrid(fn, lambda x: 0.0, Bracket.of(fn, 1.0, 2.0), tol_x=1e-6)
    assert abs(result.residual) <= 1e-11
    assert result.residual == fn(result.root)


def test_newton_hybrid_returns_best_endpoint_when_floats_run_out():
    # near sqrt(2) neighbouring floats differ by ~6e-10 in fn, so tol_f is out of reach
    fn = lambda x: 1e6 * (x * x - 2.0)
    result = newton_hybrid(fn, lambda x: 2e6 * x, Bracket.of(fn, 1.0, 2.0), tol_x=1e-6)
    assert result.residual == fn(result.root)
    assert abs(result.residual) < 1e-9
    assert abs(result.root - math.sqrt(2.0)) < 1e-15


def test_solve2d_reference_cases():
    u, v = solve2d(lambda u, v: (u - 1.0, v - 2.0), (0.0, 0.0))
    assert abs(u - 1.0) <= 1e-10 and abs(v - 2.0) <= 1e-10

    fold = lambda y, lam: (math.sinh(y) - y * (y * y - lam), y * math.cosh(y) - math.sinh(y) - 2.0 * y ** 3)
    y2, lam2 = solve2d(fold, (4.7, 10.0))
    assert abs(y2 - 4.735) < 1e-2 and abs(lam2 - 10.40) < 1e-2
    assert abs(y2 - brentq(lambda y: fold(y, 0.0)[1], 4.5, 5.0, xtol=1e-15)) < 1e-8

    flip = lambda y, lam: (math.sinh(y) - y * (y * y - lam), y * math.cosh(y) + math.sinh(y) - 2.0 * y ** 3)
    y1, lam1 = solve2d(flip, (3.9, 9.0))
    assert abs(y1 - 3.855) < 1e-2 and abs(lam1 - 8.74) < 1e-2
    assert abs(y1 - brentq(lambda y: flip(y, 0.0)[1], 3.5, 4.0, xtol=1e-15)) < 1e-8
