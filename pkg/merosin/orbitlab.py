"""
Orbit iteration and classification for f_λ.

An orbit ends in one of four ways: it settles on an attractor from the
inventory, it escapes, it lands on a pole, or it runs out of iterations
(Undecided). There are two implementations of the same rules:
iterate_orbit follows one seed in plain Python, classify_array advances a
whole numpy batch of seeds in lock step and is what the renderer uses.
"""
import logging
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from merosin.errors import ValidationError
from merosin.family import OVERFLOW_ORDINATE, POLE_EPS, EvalKind, ParamPoint, eval_f, eval_f_prime, f_array, h_array
from merosin.paramlab import (
    Axis,
    BOUNDARY_TOL,
    attractor_inventory,
    compute_constants,
    imaginary_critical_point,
    invariant_disk_radius,
    nonzero_real_fixed_point,
    real_critical_point,
)
from merosin.rootkit import Bracket, bisect

logger = logging.getLogger(__name__)

ATTR_EPS = 1e-9
MAX_ITER = 10_000
PARABOLIC_ATTR_EPS = 1e-5
PARABOLIC_MAX_ITER = 1_000_000
ESCAPE_STEPS = 3


class AttractorId(Enum):
    ORIGIN = "origin"
    REAL_FIXED_PLUS = "real_fixed_plus"
    REAL_FIXED_MINUS = "real_fixed_minus"
    IMAG_TWO_CYCLE = "imag_two_cycle"


class BasinLabel(IntEnum):
    """Per-seed label; the first four mirror AttractorId."""
    ORIGIN = 0
    REAL_FIXED_PLUS = 1
    REAL_FIXED_MINUS = 2
    IMAG_TWO_CYCLE = 3
    ESCAPED = 4
    POLE_HIT = 5
    UNDECIDED = 6

    def negated(self):
        """Label of −z given the label of z."""
        return _NEGATED.get(self, self)

    def conjugated(self):
        """Label of conj(z); every attractor in the inventory is conjugation-invariant."""
        return self


_NEGATED = {
    BasinLabel.REAL_FIXED_PLUS: BasinLabel.REAL_FIXED_MINUS,
    BasinLabel.REAL_FIXED_MINUS: BasinLabel.REAL_FIXED_PLUS,
}

LABEL_FOR_ATTRACTOR = {a: BasinLabel[a.name] for a in AttractorId}


class OrbitStatus(Enum):
    CONVERGED_TO = "ConvergedTo"
    ESCAPED = "Escaped"
    POLE_HIT = "PoleHit"
    UNDECIDED = "Undecided"


LABEL_FOR_STATUS = {
    OrbitStatus.ESCAPED: BasinLabel.ESCAPED,
    OrbitStatus.POLE_HIT: BasinLabel.POLE_HIT,
    OrbitStatus.UNDECIDED: BasinLabel.UNDECIDED,
}


@dataclass(frozen=True)
class OrbitOptions:
    max_iter: int = MAX_ITER
    attr_eps: float = ATTR_EPS
    escape_radius: float = 1e3
    escape_steps: int = ESCAPE_STEPS

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be at least 1, got {self.max_iter!r}")
        if not self.attr_eps > 0:
            raise ValidationError(f"attr_eps must be positive, got {self.attr_eps!r}")

    @classmethod
    def for_parameter(cls, p, c=None, max_iter=None):
        """Default options for λ, with the slow-convergence settings at parabolic λ."""
        c = c or compute_constants()
        radius = max(1e3, 10.0 * p.pole_ordinate)
        if c.is_parabolic(p.lam):
            return cls(max_iter or PARABOLIC_MAX_ITER, PARABOLIC_ATTR_EPS, radius)
        return cls(max_iter or MAX_ITER, ATTR_EPS, radius)


@dataclass(frozen=True)
class OrbitOutcome:
    status: OrbitStatus
    iterations: int
    final_value: complex
    attractor_id: AttractorId | None = None

    @property
    def label(self):
        if self.status is OrbitStatus.CONVERGED_TO:
            return LABEL_FOR_ATTRACTOR[self.attractor_id]
        return LABEL_FOR_STATUS[self.status]


@dataclass(frozen=True)
class Target:
    """An attractor as the classifier sees it: a fixed point, or the pair {q, −q}."""
    attractor_id: AttractorId
    point: complex
    cycle: bool = False

    @property
    def label(self):
        return LABEL_FOR_ATTRACTOR[self.attractor_id]


def targets_from_inventory(records):
    targets = []
    for record in records:
        location = record.location
        if record.cycle_length == 2:
            targets.append(Target(AttractorId.IMAG_TWO_CYCLE, location.point, cycle=True))
        elif location.axis is Axis.REAL:
            x = location.coordinate
            if x == 0.0:
                targets.append(Target(AttractorId.ORIGIN, 0j))
            elif x > 0:
                targets.append(Target(AttractorId.REAL_FIXED_PLUS, location.point))
            else:
                targets.append(Target(AttractorId.REAL_FIXED_MINUS, location.point))
    return targets


def _cycle_reached(z, history, q, eps):
    d_plus, d_minus = abs(z - q), abs(z + q)
    if min(d_plus, d_minus) >= eps or len(history) < 3:
        return False
    near_plus = d_plus <= d_minus
    # history[-1] is the previous iterate; sides must alternate
    for k, w in enumerate(reversed(history)):
        side_plus = abs(w - q) <= abs(w + q)
        if side_plus == (near_plus if k % 2 else not near_plus):
            continue
        return False
    return True


def _reached(z, history, targets, eps):
    for target in targets:
        if target.cycle:
            if _cycle_reached(z, history, target.point, eps):
                return target
        elif abs(z - target.point) < eps:
            return target
    return None


def iterate_orbit(z0, p, attractors, opts=None):
    """
    Follow the orbit of z0 until it is classified.

    Args:
        z0 (complex): seed
        p (ParamPoint): parameter
        attractors (list): FixedPointRecord inventory for this λ
        opts (OrbitOptions): budget and tolerances, defaults for λ if None

    Returns:
        OrbitOutcome: Undecided when the budget runs out
    """
    opts = opts or OrbitOptions.for_parameter(p)
    targets = targets_from_inventory(attractors)
    z = complex(z0)
    history = deque(maxlen=3)
    rises = 0
    for n in range(opts.max_iter + 1):
        target = _reached(z, history, targets, opts.attr_eps)
        if target is not None:
            return OrbitOutcome(OrbitStatus.CONVERGED_TO, n, z, target.attractor_id)
        if n == opts.max_iter:
            break
        result = eval_f(z, p)
        if result.kind is EvalKind.OVERFLOW:
            return OrbitOutcome(OrbitStatus.ESCAPED, n, z)
        if result.kind is EvalKind.POLE_PROXIMITY:
            return OrbitOutcome(OrbitStatus.POLE_HIT, n, z)
        z_new = result.value
        rises = rises + 1 if abs(z_new) > abs(z) else 0
        history.append(z)
        z = z_new
        if abs(z) > opts.escape_radius and rises >= opts.escape_steps:
            return OrbitOutcome(OrbitStatus.ESCAPED, n + 1, z)
    return OrbitOutcome(OrbitStatus.UNDECIDED, opts.max_iter, z)


def classify_real_orbit(x0, p, c=None, opts=None):
    """iterate_orbit for a real seed against the inventory for λ."""
    c = c or compute_constants()
    return iterate_orbit(complex(float(x0), 0.0), p, attractor_inventory(p, c), opts or OrbitOptions.for_parameter(p, c))


def classify_imag_orbit(y0, p, c=None, opts=None):
    """Classify the seed iy0; its orbit is the h_λ-orbit of y0 carried on the imaginary axis."""
    c = c or compute_constants()
    return iterate_orbit(complex(0.0, float(y0)), p, attractor_inventory(p, c), opts or OrbitOptions.for_parameter(p, c))


def expected_real_attractor(x, p, c=None):
    """
    Attractor a real seed must reach: the origin for λ > 1, and for
    λ in (λ*, 1) x_λ or −x_λ by the sign of f_λ(x). None elsewhere.
    """
    c = c or compute_constants()
    if p.lam > 1.0 + BOUNDARY_TOL:
        return AttractorId.ORIGIN
    if c.lambda_star + BOUNDARY_TOL < p.lam < 1.0 - BOUNDARY_TOL:
        fx = eval_f(x, p).value.real
        if fx > 0:
            return AttractorId.REAL_FIXED_PLUS
        if fx < 0:
            return AttractorId.REAL_FIXED_MINUS
        return None
    return None


def classify_array(seeds, p, attractors, opts=None):
    """
    Vectorised iterate_orbit over an array of seeds.

    Every seed evolves independently, so a seed's result does not depend
    on the batch it is in.

    Returns:
        tuple: (labels uint8, iterations int64, final values complex128),
            each shaped like the flattened seeds
    """
    opts = opts or OrbitOptions.for_parameter(p)
    targets = targets_from_inventory(attractors)
    z = np.array(seeds, dtype=np.complex128).ravel()
    count = z.size
    labels = np.full(count, BasinLabel.UNDECIDED, dtype=np.uint8)
    iterations = np.full(count, opts.max_iter, dtype=np.int64)
    final = z.copy()

    idx = np.arange(count)
    history = np.full((3, count), np.nan, dtype=np.complex128)
    rises = np.zeros(count, dtype=np.int64)
    lam = p.lam

    def settle(mask, label, n, values):
        labels[idx[mask]] = label
        iterations[idx[mask]] = n
        final[idx[mask]] = values[mask]

    with np.errstate(all='ignore'):
        for n in range(opts.max_iter + 1):
            if idx.size == 0:
                break
            settled = np.zeros(idx.size, dtype=bool)
            for target in targets:
                hit = ~settled & _array_reached(target, z, history, n, opts.attr_eps)
                settle(hit, target.label, n, z)
                settled |= hit
            if n == opts.max_iter:
                final[idx[~settled]] = z[~settled]
                break

            over = ~settled & (~np.isfinite(z) | (np.abs(z.imag) > OVERFLOW_ORDINATE))
            z_new = f_array(z, lam)
            # NaN past the overflow check means the pole guard fired
            pole = ~settled & ~over & np.isnan(z_new)
            settle(over, BasinLabel.ESCAPED, n, z)
            settle(pole, BasinLabel.POLE_HIT, n, z)

            new_mod = np.abs(z_new)
            rises = np.where(new_mod > np.abs(z), rises + 1, 0)
            live = ~(settled | over | pole)
            escaped = live & (new_mod > opts.escape_radius) & (rises >= opts.escape_steps)
            settle(escaped, BasinLabel.ESCAPED, n + 1, z_new)

            keep = live & ~escaped
            history = np.vstack((z, history[0], history[1]))[:, keep]
            z = z_new[keep]
            rises = rises[keep]
            idx = idx[keep]
    return labels, iterations, final


def _array_reached(target, z, history, n, eps):
    if not target.cycle:
        return np.abs(z - target.point) < eps
    if n < 3:
        return np.zeros(z.size, dtype=bool)
    q = target.point
    d_plus, d_minus = np.abs(z - q), np.abs(z + q)
    near_plus = d_plus <= d_minus
    hit = np.minimum(d_plus, d_minus) < eps
    for k in range(3):
        side_plus = np.abs(history[k] - q) <= np.abs(history[k] + q)
        hit &= side_plus == (near_plus if k % 2 else ~near_plus)
    return hit


def classify_seeds(seeds, p, c=None, opts=None):
    """Batch classification of complex seeds as BasinLabel values, in input order."""
    c = c or compute_constants()
    labels, _, _ = classify_array(seeds, p, attractor_inventory(p, c), opts or OrbitOptions.for_parameter(p, c))
    return [BasinLabel(int(v)) for v in labels]


def symmetry_violations(seeds, p, c=None, opts=None):
    """
    Count seeds whose classification does not commute with z ↦ −z and z ↦ conj z.

    Returns:
        dict: {"negation": count, "conjugation": count}
    """
    seeds = np.asarray(seeds, dtype=np.complex128).ravel()
    c = c or compute_constants()
    labels, _, _ = classify_array(
        np.concatenate((seeds, -seeds, np.conj(seeds))),
        p,
        attractor_inventory(p, c),
        opts or OrbitOptions.for_parameter(p, c),
    )
    base, neg, conj = np.split(labels, 3)
    negation = sum(1 for a, b in zip(base, neg) if BasinLabel(int(a)).negated() != BasinLabel(int(b)))
    conjugation = sum(1 for a, b in zip(base, conj) if BasinLabel(int(a)).conjugated() != BasinLabel(int(b)))
    return {"negation": negation, "conjugation": conjugation}


# --- chaos certificate ------------------------------------------------------

@dataclass(frozen=True)
class ChaosCertificate:
    """
    Turbulence check on [0, π]: J = [0, p_λ], K = [p_λ, π].

    f_λ increases on J and decreases on K with f(0) = f(π) = 0, so
    f(J) = f(K) = [0, f(p_λ)] and both cover J ∪ K exactly when f(p_λ) >= π.
    """
    lam: float
    p_lambda: float
    f_at_p: float
    J: tuple
    K: tuple
    f_J: tuple
    f_K: tuple
    covered: bool


def chaos_certificate(p):
    p_lambda = real_critical_point(p, 0)
    f_at_p = math.cos(p_lambda) / (2.0 * p_lambda)
    return ChaosCertificate(
        lam=p.lam,
        p_lambda=p_lambda,
        f_at_p=f_at_p,
        J=(0.0, p_lambda),
        K=(p_lambda, math.pi),
        f_J=(0.0, f_at_p),
        f_K=(0.0, f_at_p),
        covered=f_at_p >= math.pi,
    )


# --- bifurcation scan ------------------------------------------------------

class ScanAxis(Enum):
    REAL = "real"
    IMAG = "imag"


class RowStatus(Enum):
    SAMPLED = "Sampled"
    ESCAPED = "Escaped"
    POLE_HIT = "PoleHit"


@dataclass(frozen=True)
class BifurcationRow:
    lam: float
    status: RowStatus
    ordinates: tuple


@dataclass(frozen=True)
class BifurcationTable:
    axis: ScanAxis
    rows: tuple

    def samples(self):
        """Flatten to (lambda, ordinate) pairs; None stands for an empty row."""
        for row in self.rows:
            if row.ordinates:
                for y in row.ordinates:
                    yield row.lam, y
            else:
                yield row.lam, None


def bifurcation_scan(axis, lam_lo, lam_hi, n_lambda, n_transient=1000, n_keep=64):
    """
    Iterate the map on one invariant axis over a grid of λ values.

    The real axis is seeded at the critical point p_{λ,0} and iterates f_λ;
    the imaginary axis is seeded at c_λ and iterates h_λ. Lanes that hit a
    pole or escape give rows with no ordinates.
    """
    axis = ScanAxis(axis)
    if not (math.isfinite(lam_lo) and math.isfinite(lam_hi) and 0 < lam_lo < lam_hi):
        raise ValidationError(f"scan range needs 0 < lo < hi, got {lam_lo!r}:{lam_hi!r}")
    if n_lambda < 1 or n_transient < 0 or n_keep < 1:
        raise ValidationError(
            f"scan needs n_lambda >= 1, n_transient >= 0 and n_keep >= 1, got {n_lambda}, {n_transient}, {n_keep}"
        )
    lams = np.linspace(lam_lo, lam_hi, n_lambda) if n_lambda > 1 else np.array([lam_lo])
    points = [ParamPoint(float(lam)) for lam in lams]

    if axis is ScanAxis.REAL:
        x = np.array([real_critical_point(q, 0) for q in points])
        kept = np.empty((n_keep, n_lambda))
        for n in range(n_transient + n_keep):
            x = np.sin(x) / (x * x + lams)
            if n >= n_transient:
                kept[n - n_transient] = x
        rows = tuple(BifurcationRow(float(lam), RowStatus.SAMPLED, tuple(kept[:, k])) for k, lam in enumerate(lams))
        return BifurcationTable(axis, rows)

    y = np.array([imaginary_critical_point(q) for q in points])
    status = np.full(n_lambda, RowStatus.SAMPLED, dtype=object)
    radius = np.maximum(1e3, 10.0 * np.sqrt(lams))
    rises = np.zeros(n_lambda, dtype=np.int64)
    kept = np.full((n_keep, n_lambda), np.nan)
    live = np.ones(n_lambda, dtype=bool)
    with np.errstate(all='ignore'):
        for n in range(n_transient + n_keep):
            pole = live & (np.abs(lams - y * y) < POLE_EPS * (1.0 + y * y))
            status[pole] = RowStatus.POLE_HIT
            live &= ~pole
            y_new = h_array(y, lams)
            overflow = live & np.isnan(y_new)
            rises = np.where(np.abs(y_new) > np.abs(y), rises + 1, 0)
            escaped = overflow | (live & (np.abs(y_new) > radius) & (rises >= ESCAPE_STEPS))
            status[escaped] = RowStatus.ESCAPED
            live &= ~escaped
            y = np.where(live, y_new, 0.0)
            if n >= n_transient:
                kept[n - n_transient] = np.where(live, y, np.nan)

    rows = []
    for k, lam in enumerate(lams):
        ordinates = tuple(kept[:, k]) if status[k] is RowStatus.SAMPLED else ()
        rows.append(BifurcationRow(float(lam), status[k], ordinates))
    escaped_rows = sum(1 for r in rows if r.status is not RowStatus.SAMPLED)
    logger.info(f"Imaginary scan over [{lam_lo}, {lam_hi}]: {escaped_rows} of {n_lambda} rows left the axis map")
    return BifurcationTable(axis, tuple(rows))


# --- period doubling ------------------------------------------------------

SCAN_POINTS = 10_000


@dataclass(frozen=True)
class ProbeSide:
    lam: float
    fixed_point: float
    fixed_multiplier: float
    cycle: tuple | None
    cycle_multiplier: float | None

    @property
    def has_cycle(self):
        return self.cycle is not None


@dataclass(frozen=True)
class PeriodDoublingReport:
    epsilon: float
    below: ProbeSide
    above: ProbeSide


def _second_iterate_roots(p):
    lam = p.lam

    def f(x):
        return math.sin(x) / (x * x + lam)

    def g(x):
        return f(f(x)) - x

    xs = np.pi * (np.arange(SCAN_POINTS) + 0.5) / SCAN_POINTS
    fx = np.sin(xs) / (xs * xs + lam)
    gx = np.sin(fx) / (fx * fx + lam) - xs
    roots = []
    for k in np.nonzero(np.sign(gx[:-1]) * np.sign(gx[1:]) < 0)[0]:
        roots.append(bisect(g, Bracket.of(g, float(xs[k]), float(xs[k + 1])), tol_x=1e-14).root)
    # points of period one are excluded
    return [r for r in roots if abs(f(r) - r) >= 1e-8]


def _probe_side(lam):
    p = ParamPoint(lam)
    x = nonzero_real_fixed_point(p)
    fixed_m = eval_f_prime(x, p).value.real
    roots = _second_iterate_roots(p)
    below = [r for r in roots if r < x]
    above = [r for r in roots if r > x]
    if not below or not above:
        return ProbeSide(lam, x, fixed_m, None, None)
    a, b = max(below), min(above)
    cycle_m = eval_f_prime(a, p).value.real * eval_f_prime(b, p).value.real
    return ProbeSide(lam, x, fixed_m, (a, b), cycle_m)


def period_doubling_probe(eps, c=None):
    """
    Look for a real 2-cycle around x_λ on each side of λ*.

    The roots of f²(x) − x on (0, π) are isolated by a sign scan on a uniform
    grid and refined by bisection.
    """
    c = c or compute_constants()
    if not 0 < eps < c.lambda_star / 2:
        raise ValidationError(f"eps must lie in (0, lambda*/2), got {eps!r}")
    report = PeriodDoublingReport(eps, _probe_side(c.lambda_star - eps), _probe_side(c.lambda_star + eps))
    logger.info(
        f"Period doubling probe eps={eps}: cycle below={report.below.has_cycle}, above={report.above.has_cycle}"
    )
    return report


# --- invariant disc and zero preimages ---------------------------------------

@dataclass(frozen=True)
class DiskBoundaryReport:
    radius: float
    max_ratio: float
    ratio_at_top: float


def disk_boundary_ratio(p, n_angles=10_000):
    """max over the circle |z| = r_λ of |f(z)|/r_λ, and the value at θ = π/2."""
    r = invariant_disk_radius(p)
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    z = r * np.exp(1j * theta)
    ratios = np.abs(f_array(z, p.lam)) / r
    top = abs(eval_f(complex(0.0, r), p).value) / r
    return DiskBoundaryReport(r, float(np.max(ratios)), top)


def disk_interior_outcomes(p, n=1000, seed=0, c=None):
    """Classify n seeds drawn uniformly from the open disc D(0, r_λ)."""
    c = c or compute_constants()
    r = invariant_disk_radius(p)
    rng = np.random.default_rng(seed)
    seeds = r * np.sqrt(rng.uniform(0.0, 1.0, n)) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, n))
    return classify_seeds(seeds, p, c)


def zero_preimage_outcomes(p, n_max=20, c=None):
    """Outcomes of the seeds nπ for |n| <= n_max, keyed by n."""
    c = c or compute_constants()
    inventory = attractor_inventory(p, c)
    opts = OrbitOptions.for_parameter(p, c)
    return {n: iterate_orbit(complex(n * math.pi, 0.0), p, inventory, opts) for n in range(-n_max, n_max + 1)}
