"""
Bracketed scalar root finders and a small 2D Newton solver.

Every constant and fixed point in the package is computed through these
three entry points, so they are deterministic and never step outside the
bracket they are given.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from merosin.errors import EvaluationError, NonConvergenceError, ValidationError

logger = logging.getLogger(__name__)

TOL_X = 1e-12
TOL_F = 1e-11
MAX_ITER = 200


class RootMethod(Enum):
    BISECTION = "bisection"
    NEWTON_BISECTION_HYBRID = "newton_bisection_hybrid"


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError(f"bracket needs lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if not self.f_lo * self.f_hi < 0:
            raise ValidationError(
                f"no sign change on [{self.lo!r}, {self.hi!r}]: f(lo)={self.f_lo!r}, f(hi)={self.f_hi!r}"
            )

    @classmethod
    def of(cls, fn, lo, hi):
        """Build a bracket by evaluating fn at both ends."""
        return cls(lo, hi, _checked(fn, lo), _checked(fn, hi))


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int
    method: RootMethod


def _checked(fn, x):
    value = float(fn(x))
    if math.isnan(value):
        raise EvaluationError(f"function returned NaN at x={x!r}")
    return value


def _no_midpoint(lo, hi):
    mid = 0.5 * (lo + hi)
    return mid <= lo or mid >= hi


def bisect(fn, b, tol_x=TOL_X):
    """
    Plain bisection on a validated bracket.

    Stops when the bracket is no wider than tol_x, when fn hits zero exactly
    at a midpoint, or when no float lies strictly inside the bracket.
    """
    lo, hi, f_lo = b.lo, b.hi, b.f_lo
    iterations = 0
    while hi - lo > tol_x and not _no_midpoint(lo, hi):
        mid = 0.5 * (lo + hi)
        f_mid = _checked(fn, mid)
        iterations += 1
        if f_mid == 0.0:
            return RootResult(mid, 0.0, iterations, RootMethod.BISECTION)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    return RootResult(root, _checked(fn, root), iterations, RootMethod.BISECTION)


def newton_hybrid(fn, dfn, b, tol_x=TOL_X, tol_f=TOL_F, max_iter=MAX_ITER):
    """
    Safeguarded Newton iteration.

    A Newton step is taken only when it lands strictly inside the current
    bracket; otherwise the bracket is bisected. Every iterate therefore
    stays inside the initial bracket.

    Success means |fn(root)| <= tol_f. The one exception is a bracket that
    has shrunk to adjacent floats: the endpoint with the smaller residual
    is returned.

    Args:
        fn (callable): function whose root is sought
        dfn (callable): derivative of fn
        b (Bracket): initial sign-change bracket
        tol_x (float): bracket width below which only bisection steps are taken
        tol_f (float): residual target |fn(root)| <= tol_f
        max_iter (int): iteration budget

    Returns:
        RootResult: root, residual and iteration count

    Raises:
        NonConvergenceError: the budget ran out first
    """
    lo, hi, f_lo, f_hi = b.lo, b.hi, b.f_lo, b.f_hi
    x = 0.5 * (lo + hi)
    for iteration in range(1, max_iter + 1):
        fx = _checked(fn, x)
        if abs(fx) <= tol_f:
            return RootResult(x, fx, iteration, RootMethod.NEWTON_BISECTION_HYBRID)
        if (fx < 0) == (f_lo < 0):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        if _no_midpoint(lo, hi):
            # adjacent floats: keep the better end
            best, f_best = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
            return RootResult(best, f_best, iteration, RootMethod.NEWTON_BISECTION_HYBRID)
        x_new = math.nan
        if hi - lo > tol_x:
            slope = float(dfn(x))
            if slope != 0.0 and math.isfinite(slope):
                x_new = x - fx / slope
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    raise NonConvergenceError(
        f"newton_hybrid did not reach |f| <= {tol_f:g} in {max_iter} iterations (bracket [{lo!r}, {hi!r}])"
    )


def _jacobian(F, u, v, fu):
    """Forward-difference Jacobian with step 1e-7·max(1, |coordinate|)."""
    hu = 1e-7 * max(1.0, abs(u))
    hv = 1e-7 * max(1.0, abs(v))
    col_u = (np.asarray(F(u + hu, v), dtype=float) - fu) / hu
    col_v = (np.asarray(F(u, v + hv), dtype=float) - fu) / hv
    return np.column_stack((col_u, col_v))


def solve2d(F, seed, tol=1e-10, max_iter=MAX_ITER, damped=True):
    """
    Newton's method for two equations in two unknowns.

    The Jacobian is estimated by forward differences. With damped=True each
    step is halved until the sup-norm residual decreases.

    Returns:
        tuple: (u, v) with ||F(u, v)||_inf <= tol

    Raises:
        NonConvergenceError: singular Jacobian, non-finite residual or
            exhausted iteration budget
    """
    u, v = (float(c) for c in seed)
    fu = np.asarray(F(u, v), dtype=float)
    for _ in range(max_iter):
        norm = float(np.max(np.abs(fu)))
        if not math.isfinite(norm):
            raise NonConvergenceError(f"solve2d residual is not finite at ({u!r}, {v!r})")
        if norm <= tol:
            return u, v
        J = _jacobian(F, u, v, fu)
        try:
            du, dv = np.linalg.solve(J, -fu)
        except np.linalg.LinAlgError:
            raise NonConvergenceError(f"solve2d hit a singular Jacobian at ({u!r}, {v!r})")
        if not (math.isfinite(du) and math.isfinite(dv)):
            raise NonConvergenceError(f"solve2d produced a non-finite step at ({u!r}, {v!r})")
        alpha = 1.0
        while True:
            u_new, v_new = u + alpha * du, v + alpha * dv
            f_new = np.asarray(F(u_new, v_new), dtype=float)
            new_norm = float(np.max(np.abs(f_new)))
            if not damped or (math.isfinite(new_norm) and new_norm < norm) or alpha < 1e-10:
                break
            alpha *= 0.5
        if damped and not (math.isfinite(new_norm) and new_norm < norm):
            raise NonConvergenceError(f"solve2d stalled at ({u!r}, {v!r}) with residual {norm:g}")
        u, v, fu = u_new, v_new, f_new
    raise NonConvergenceError(f"solve2d did not reach residual {tol:g} in {max_iter} iterations")
