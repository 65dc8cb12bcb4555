"""
Bifurcation constants, fixed points, 2-cycles and singular values of f_λ.

The constant ladder is

    0 < λ** <= λ* < λ̂ < 1 < λ₁ < λ₂

and every rung is obtained from a one-dimensional equation solved with
rootkit.newton_hybrid on a fixed bracket. On the imaginary axis the
fixed points of −h_λ are exactly the 2-periodic points of h_λ, and y is
such a point precisely when λ = y² − sinh y / y.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from merosin.errors import NonConvergenceError, ValidationError
from merosin.family import ParamPoint, eval_f_prime, eval_h_prime, phi_big, psi_cap, psi_low, x0
from merosin.rootkit import TOL_F, TOL_X, Bracket, bisect, newton_hybrid, solve2d

logger = logging.getLogger(__name__)

INDIFFERENCE_TOL = 1e-6
SUPERATTRACTING_TOL = 1e-12
BOUNDARY_TOL = 1e-9
DEFAULT_N_MAX = 32


class Stability(Enum):
    ATTRACTING = "attracting"
    REPELLING = "repelling"
    RATIONALLY_INDIFFERENT = "rationally_indifferent"
    SUPERATTRACTING = "superattracting"


class Axis(Enum):
    REAL = "real"
    IMAG = "imag"
    COMPLEX = "complex"


@dataclass(frozen=True)
class Location:
    """A point tagged with the invariant line it lives on."""
    axis: Axis
    coordinate: float | complex

    @classmethod
    def real(cls, x):
        return cls(Axis.REAL, float(x))

    @classmethod
    def imag(cls, y):
        return cls(Axis.IMAG, float(y))

    @property
    def point(self):
        if self.axis is Axis.REAL:
            return complex(self.coordinate, 0.0)
        if self.axis is Axis.IMAG:
            return complex(0.0, self.coordinate)
        return complex(self.coordinate)


@dataclass(frozen=True)
class FixedPointRecord:
    """
    A fixed point (cycle_length 1) or a 2-cycle (cycle_length 2).

    For a 2-cycle of h_λ the location is the positive ordinate y of the
    cycle {iy, −iy}, multiplier is the cycle multiplier and map_multiplier
    the multiplier of −h_λ at y (its square is the cycle multiplier).
    """
    location: Location
    multiplier: float | complex
    stability: Stability
    cycle_length: int = 1
    map_multiplier: float | None = None


def classify_multiplier(m):
    modulus = abs(m)
    if modulus <= SUPERATTRACTING_TOL:
        return Stability.SUPERATTRACTING
    if abs(modulus - 1.0) <= INDIFFERENCE_TOL:
        return Stability.RATIONALLY_INDIFFERENT
    return Stability.ATTRACTING if modulus < 1.0 else Stability.REPELLING


@dataclass(frozen=True)
class BifurcationConstants:
    lambda_2star: float
    lambda_star: float
    lambda_hat: float
    lambda_1: float
    lambda_2: float
    witness_x_star: float
    witness_p_2star: float
    witness_y1: float
    witness_y2: float
    witness_t_hat: float = field(default=math.nan)

    def ladder(self):
        """The ordered rungs, with λ = 1 included."""
        return (
            ("lambda_2star", self.lambda_2star),
            ("lambda_star", self.lambda_star),
            ("lambda_hat", self.lambda_hat),
            ("one", 1.0),
            ("lambda_1", self.lambda_1),
            ("lambda_2", self.lambda_2),
        )

    def ladder_violations(self):
        """Names of adjacent rung pairs that break 0 < λ** <= λ* < λ̂ < 1 < λ₁ < λ₂."""
        rungs = self.ladder()
        problems = [] if rungs[0][1] > 0 else ["lambda_2star>0"]
        for (name_a, a), (name_b, b) in zip(rungs, rungs[1:]):
            ok = a <= b if name_a == "lambda_2star" else a < b
            if not ok:
                problems.append(f"{name_a}<{name_b}")
        return problems

    def parabolic_values(self):
        return (self.lambda_star, 1.0, self.lambda_1, self.lambda_2)

    def is_parabolic(self, lam):
        return any(abs(lam - v) <= BOUNDARY_TOL for v in self.parabolic_values())


# --- equations behind the constants -------------------------------------

def _x_star_eq(x):
    # φ(x) = −1 with denominators cleared
    return x * math.cos(x) + math.sin(x) - 2.0 * x ** 3


def _x_star_slope(x):
    return 2.0 * math.cos(x) - x * math.sin(x) - 6.0 * x * x


def _p_2star_eq(p):
    return math.cos(p) - 2.0 * math.pi * p


def _p_2star_slope(p):
    return -math.sin(p) - 2.0 * math.pi


def _t_hat_eq(t):
    return math.cos(t) - 2.0 * t * t


def _t_hat_slope(t):
    return -math.sin(t) - 4.0 * t


def flip_equation(y):
    # multiplier of −h equals −1 on the reflection branch
    return y * math.cosh(y) + math.sinh(y) - 2.0 * y ** 3


def _flip_slope(y):
    return 2.0 * math.cosh(y) + y * math.sinh(y) - 6.0 * y * y


def fold_equation(y):
    # multiplier of −h equals +1 on the reflection branch
    return y * math.cosh(y) - math.sinh(y) - 2.0 * y ** 3


def _fold_slope(y):
    return y * math.sinh(y) - 6.0 * y * y


def reflection_lambda(y):
    """The λ for which y > 0 is a fixed point of −h_λ: λ = y² − sinh y / y."""
    return y * y - math.sinh(y) / y


def reflection_multiplier(y):
    """Multiplier of −h_λ at one of its fixed points y, for the matching λ."""
    return (y * math.cosh(y) - 2.0 * y ** 3) / math.sinh(y)


def _solve(name, fn, dfn, lo, hi, tol_x=TOL_X, tol_f=TOL_F):
    try:
        result = newton_hybrid(fn, dfn, Bracket.of(fn, lo, hi), tol_x=tol_x, tol_f=tol_f)
    except (ValidationError, NonConvergenceError) as e:
        raise NonConvergenceError(f"could not solve for {name}: {e}") from e
    logger.debug(f"{name} = {result.root!r} ({result.iterations} iterations, residual {result.residual:.3g})")
    return result.root


@lru_cache(maxsize=8)
def compute_constants(tol_x=TOL_X, tol_f=TOL_F):
    """
    Solve for the whole bifurcation ladder.

    Raises:
        NonConvergenceError: a bracket failed, or the computed ladder is out
            of order; the message names the constant
    """
    x_star = _solve("x_star", _x_star_eq, _x_star_slope, 0.8, 0.9, tol_x, tol_f)
    p_2star = _solve("p_2star", _p_2star_eq, _p_2star_slope, 0.1, 0.2, tol_x, tol_f)
    t_hat = _solve("lambda_hat", _t_hat_eq, _t_hat_slope, 0.5, 0.8, tol_x, tol_f)
    # the flip equation has a second root near 1.265 whose λ is below 1
    y1 = _solve("lambda_1", flip_equation, _flip_slope, 3.5, 4.0, tol_x, tol_f)
    y2 = _solve("lambda_2", fold_equation, _fold_slope, 4.5, 5.0, tol_x, tol_f)

    constants = BifurcationConstants(
        lambda_2star=psi_low(p_2star),
        lambda_star=psi_cap(x_star),
        lambda_hat=psi_cap(t_hat),
        lambda_1=reflection_lambda(y1),
        lambda_2=reflection_lambda(y2),
        witness_x_star=x_star,
        witness_p_2star=p_2star,
        witness_y1=y1,
        witness_y2=y2,
        witness_t_hat=t_hat,
    )
    problems = constants.ladder_violations()
    if problems:
        raise NonConvergenceError(f"bifurcation ladder out of order: {', '.join(problems)}")
    logger.info(
        f"Constants: lambda** = {constants.lambda_2star:.6g}, lambda* = {constants.lambda_star:.6g}, "
        f"lambda_hat = {constants.lambda_hat:.6g}, lambda_1 = {constants.lambda_1:.6g}, "
        f"lambda_2 = {constants.lambda_2:.6g}"
    )
    return constants


# --- fixed points and cycles --------------------------------------------

def _real_record(x, p):
    m = eval_f_prime(x, p).value.real
    return FixedPointRecord(Location.real(x), m, classify_multiplier(m))


def nonzero_real_fixed_point(p):
    """x_λ in (0, x₀), the positive root of Ψ(x) = λ, for 0 < λ < 1."""
    if not p.lam < 1.0:
        raise ValidationError(f"x_lambda exists only for lambda < 1, got {p.lam!r}")

    def g(x):
        return psi_cap(x) - p.lam

    def dg(x):
        return (x * math.cos(x) - math.sin(x) - 2.0 * x ** 3) / (x * x) if x else 0.0

    return _solve("x_lambda", g, dg, 0.0, x0())


def real_fixed_points(p):
    """Fixed points of f_λ on ℝ: always 0, plus ±x_λ when λ < 1."""
    records = [_real_record(0.0, p)]
    if p.lam < 1.0 - BOUNDARY_TOL:
        x = nonzero_real_fixed_point(p)
        records.append(_real_record(x, p))
        records.append(_real_record(-x, p))
    return records


def _solve_phi(lam):
    # sinh y = y(λ − y²) on (0, √λ) is Φ(y) = λ
    def g(y):
        return phi_big(y) - lam

    def dg(y):
        return (2.0 * y ** 3 - math.sinh(y) + y * math.cosh(y)) / (y * y) if y else 0.0

    return _solve("r_lambda", g, dg, 0.0, math.sqrt(lam), tol_f=1e-14)


def imag_fixed_points(p):
    """Fixed points of h_λ: 0 always, plus the repellers ±r_λ when λ > 1."""
    m0 = eval_h_prime(0.0, p).value
    records = [FixedPointRecord(Location.imag(0.0), m0, classify_multiplier(m0))]
    if p.lam > 1.0:
        r = _solve_phi(p.lam)
        for y in (r, -r):
            m = eval_h_prime(y, p).value
            records.append(FixedPointRecord(Location.imag(y), m, classify_multiplier(m)))
    return records


def invariant_disk_radius(p):
    """Radius r_λ of the disc D(0, r_λ) that lies in the basin of 0 (λ > 1)."""
    if p.lam <= 1.0:
        raise ValidationError(f"the invariant disc needs lambda > 1, got {p.lam!r}")
    return _solve_phi(p.lam)


def _cycle_record(y):
    m = reflection_multiplier(y)
    cycle_m = m * m
    return FixedPointRecord(Location.imag(y), cycle_m, classify_multiplier(cycle_m), 2, m)


def _reflection_roots(p, c):
    lam = p.lam

    def g(y):
        return reflection_lambda(y) - lam

    def dg(y):
        return 2.0 * y - (y * math.cosh(y) - math.sinh(y)) / (y * y)

    if abs(lam - c.lambda_1) <= BOUNDARY_TOL:
        inner = c.witness_y1
    else:
        inner = _solve("a_lambda_2", g, dg, p.pole_ordinate, c.witness_y2)

    upper = c.witness_y2 + 1.0
    while g(upper) >= 0.0:
        upper += 1.0
    outer = _solve("r_lambda_2", g, dg, c.witness_y2, upper)
    return inner, outer


def imag_two_cycles(p, c=None):
    """
    2-cycles {iy, −iy} of f_λ on the imaginary axis.

    Returns the attracting/repelling pair (a_{λ,2}, r_{λ,2}) below λ₂, the
    single indifferent ordinate y_λ at λ₂ and nothing above it.
    """
    c = c or compute_constants()
    if p.lam > c.lambda_2 + BOUNDARY_TOL:
        return []
    if abs(p.lam - c.lambda_2) <= BOUNDARY_TOL:
        return [_cycle_record(c.witness_y2)]
    inner, outer = _reflection_roots(p, c)
    return [_cycle_record(inner), _cycle_record(outer)]


def preimage_of_repeller(p, c=None):
    """
    r'_{λ,2}: the preimage under −h_λ of r_{λ,2} that lies in (√λ, c_λ).

    At λ = λ₂ this is y'_λ, the preimage of y_λ. Together with r_{λ,2} it
    bounds the interval whose h-orbits settle on the imaginary 2-cycle.
    """
    c = c or compute_constants()
    cycles = imag_two_cycles(p, c)
    if not cycles or p.lam < c.lambda_1 - BOUNDARY_TOL:
        raise ValidationError(f"r'_(lambda,2) is defined for lambda in [lambda_1, lambda_2], got {p.lam!r}")
    target = cycles[-1].location.coordinate
    lam = p.lam

    def k(y):
        # −h(y) = target with the denominator cleared
        return math.sinh(y) - target * (y * y - lam)

    def dk(y):
        return math.cosh(y) - 2.0 * target * y

    return _solve("r_prime_lambda_2", k, dk, p.pole_ordinate, imaginary_critical_point(p))


def attractor_inventory(p, c=None):
    """Every non-repelling fixed point or cycle the orbit classifier targets."""
    c = c or compute_constants()
    records = real_fixed_points(p) + imag_two_cycles(p, c)
    return [r for r in records if r.stability is not Stability.REPELLING]


# --- singular values ------------------------------------------------------

@dataclass(frozen=True)
class SingularValueCatalog:
    real_critical_indices: tuple
    real_critical_points: tuple
    real_critical_values: tuple
    imag_critical_points: tuple
    imag_critical_values: tuple
    asymptotic_values: tuple = (0j,)


def real_critical_point(p, n):
    """p_{λ,n} in (nπ, (n+1)π) for n >= 0, from (x²+λ) cos x = 2x sin x."""
    if n < 0:
        return -real_critical_point(p, -n - 1)
    lam = p.lam

    def g(x):
        return math.cos(x) - 2.0 * x * math.sin(x) / (x * x + lam)

    lo, hi = n * math.pi, (n + 1) * math.pi
    try:
        return bisect(g, Bracket.of(g, lo, hi)).root
    except ValidationError as e:
        raise NonConvergenceError(f"could not bracket p_(lambda,{n}): {e}") from e


def imaginary_critical_point(p):
    """c_λ > √λ, from (λ − y²) cosh y + 2y sinh y = 0 divided through by cosh y."""
    lam = p.lam

    def g(y):
        return lam - y * y + 2.0 * y * math.tanh(y)

    def dg(y):
        return -2.0 * y + 2.0 * math.tanh(y) + 2.0 * y / math.cosh(y) ** 2

    return _solve("c_lambda", g, dg, p.pole_ordinate, 2.0 + math.sqrt(1.0 + lam))


def singular_values(p, n_max=DEFAULT_N_MAX):
    if n_max < 1:
        raise ValidationError(f"n_max must be at least 1, got {n_max!r}")
    positive = [real_critical_point(p, n) for n in range(n_max + 1)]
    indices = tuple(range(-n_max, n_max + 1))
    points = tuple(positive[n] if n >= 0 else -positive[-n - 1] for n in indices)
    values = tuple(math.cos(x) / (2.0 * x) for x in points)

    c_lam = imaginary_critical_point(p)
    v = math.cosh(c_lam) / (2.0 * c_lam)
    return SingularValueCatalog(
        real_critical_indices=indices,
        real_critical_points=points,
        real_critical_values=values,
        imag_critical_points=(-c_lam, c_lam),
        imag_critical_values=(complex(0.0, v), complex(0.0, -v)),
    )


def critical_point_order(p):
    """
    Sign of x_λ − p_{λ,0} for λ in (λ*, 1): +1 below λ̂, 0 at λ̂, −1 above.
    """
    x = nonzero_real_fixed_point(p)
    gap = x - real_critical_point(p, 0)
    if abs(gap) <= BOUNDARY_TOL:
        return 0
    return 1 if gap > 0 else -1


def real_singularities_in_disk(p, n_max=DEFAULT_N_MAX):
    """Whether every real critical value and the value 0 lie inside D(0, r_λ)."""
    r = invariant_disk_radius(p)
    catalog = singular_values(p, n_max)
    return max(abs(v) for v in catalog.real_critical_values) < r


def _scaled_critical_numerator(lam):
    def F(u, v):
        if abs(v) > 300.0:
            return (math.inf, math.inf)
        z = complex(u, v)
        numerator = (z * z + lam) * np.cos(z) - 2.0 * z * np.sin(z)
        scale = (1.0 + u * u + v * v + lam) * math.cosh(v)
        w = complex(numerator) / scale
        return (w.real, w.imag)
    return F


def offaxis_critical_search(p, n_seeds=1000, seed=0, box=(0.1, 10.0)):
    """
    Run damped Newton on f'_λ = 0 from random off-axis seeds.

    The numerator (z²+λ) cos z − 2z sin z is divided by (1+|z|²+λ)·cosh(Im z)
    so the residual is O(1) everywhere. Seeds that fail to converge are
    dropped.

    Returns:
        list: complex roots that were reached
    """
    rng = np.random.default_rng(seed)
    F = _scaled_critical_numerator(p.lam)
    roots = []
    for u, v in rng.uniform(box[0], box[1], size=(n_seeds, 2)):
        try:
            ru, rv = solve2d(F, (u, v), tol=1e-10, max_iter=60)
        except NonConvergenceError:
            continue
        roots.append(complex(ru, rv))
    logger.debug(f"Off-axis critical search: {len(roots)} of {n_seeds} seeds converged")
    return roots


# --- regime map -------------------------------------------------------------

class RegimeId(Enum):
    CHAOTIC = "0 < lambda <= lambda**"
    BELOW_PERIOD_DOUBLING = "lambda** < lambda < lambda*"
    PERIOD_DOUBLING = "lambda = lambda*"
    REAL_PAIR = "lambda* < lambda < 1"
    PITCHFORK = "lambda = 1"
    ORIGIN_ONLY = "1 < lambda < lambda_1"
    IMAG_PARABOLIC = "lambda in {lambda_1, lambda_2}"
    ORIGIN_AND_CYCLE = "lambda_1 < lambda < lambda_2"
    ORIGIN_COMPLETE = "lambda > lambda_2"


REGIME_NOTES = {
    RegimeId.CHAOTIC: "f is chaotic on [-f(p), f(p)]; no Siegel discs or Herman rings; "
                      "the real line and its preimages lie in J",
    RegimeId.BELOW_PERIOD_DOUBLING: "no Siegel discs or Herman rings; preimages of the zeros n*pi lie in J",
    RegimeId.PERIOD_DOUBLING: "F contains the parabolic domains of -x* and x* and their preimages",
    RegimeId.REAL_PAIR: "A1(-x_lambda) and A1(x_lambda) lie in F; preimages of n*pi lie in J",
    RegimeId.PITCHFORK: "F contains the parabolic domains of 0 and their preimages",
    RegimeId.ORIGIN_ONLY: "A1(0) lies in F; J is the boundary of A1(0)",
    RegimeId.IMAG_PARABOLIC: "F is A1(0) plus the parabolic domains of the 2-periodic points +-i*y_lambda "
                             "and their preimages; J is the boundary of A1(0)",
    RegimeId.ORIGIN_AND_CYCLE: "F = A1(0) union A2(i*a_(lambda,2)); J = closure of the escaping set",
    RegimeId.ORIGIN_COMPLETE: "F = A1(0), completely invariant; J = closure of the escaping set",
}


@dataclass(frozen=True)
class RegimeDescriptor:
    regime_id: RegimeId
    expected_attractors: tuple
    notes: str


def _regime_id(lam, c):
    def at(v):
        return abs(lam - v) <= BOUNDARY_TOL

    if lam <= c.lambda_2star + BOUNDARY_TOL:
        return RegimeId.CHAOTIC
    if at(c.lambda_star):
        return RegimeId.PERIOD_DOUBLING
    if lam < c.lambda_star:
        return RegimeId.BELOW_PERIOD_DOUBLING
    if at(1.0):
        return RegimeId.PITCHFORK
    if lam < 1.0:
        return RegimeId.REAL_PAIR
    if at(c.lambda_1) or at(c.lambda_2):
        return RegimeId.IMAG_PARABOLIC
    if lam < c.lambda_1:
        return RegimeId.ORIGIN_ONLY
    if lam < c.lambda_2:
        return RegimeId.ORIGIN_AND_CYCLE
    return RegimeId.ORIGIN_COMPLETE


def regime(p, c=None):
    """Place λ in exactly one row of the regime table."""
    if not isinstance(p, ParamPoint):
        p = ParamPoint(p)
    c = c or compute_constants()
    regime_id = _regime_id(p.lam, c)
    return RegimeDescriptor(regime_id, tuple(attractor_inventory(p, c)), REGIME_NOTES[regime_id])
