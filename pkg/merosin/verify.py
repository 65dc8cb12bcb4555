"""
The verify suite: every documented property of the family, run as named
checks that produce a machine-readable report.
"""
import dataclasses
import logging
import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from merosin.errors import MerosinError
from merosin.family import ParamPoint, eval_f_prime, phi_big, psi_cap, psi_low
from merosin.orbitlab import (
    AttractorId,
    BasinLabel,
    OrbitOptions,
    OrbitStatus,
    chaos_certificate,
    classify_array,
    classify_imag_orbit,
    disk_boundary_ratio,
    disk_interior_outcomes,
    expected_real_attractor,
    period_doubling_probe,
    symmetry_violations,
    zero_preimage_outcomes,
)
from merosin.paramlab import (
    RegimeId,
    attractor_inventory,
    flip_equation,
    fold_equation,
    imag_two_cycles,
    offaxis_critical_search,
    reflection_lambda,
    reflection_multiplier,
    regime,
)
from merosin.render import (
    RenderOptions,
    Window,
    basin_fractions,
    escaped_interior_fraction,
    mirror_mismatches,
    render_grid,
    row_fraction,
)
from merosin.rootkit import solve2d

logger = logging.getLogger(__name__)

FIGURE_WINDOW = (-1.5 * math.pi, 1.5 * math.pi, -2.0 * math.pi, 0.0)
SAMPLE_SEED = 20240101


@dataclass(frozen=True)
class CheckResult:
    check_name: str
    expected: object
    observed: object
    tolerance: float | None
    passed: bool

    def to_report(self):
        return {
            "check_name": self.check_name,
            "expected": self.expected,
            "observed": self.observed,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerifyContext:
    constants: object
    threads: int = 1

    def tampered(self, lambda_star):
        """A context whose λ* has been replaced, for the negative control."""
        return dataclasses.replace(self, constants=dataclasses.replace(self.constants, lambda_star=lambda_star))


def close(name, expected, observed, tol):
    return CheckResult(name, expected, observed, tol, bool(abs(observed - expected) <= tol))


def within(name, lo, hi, observed):
    return CheckResult(name, [lo, hi], observed, None, bool(lo <= observed <= hi))


def holds(name, expected, observed, passed):
    return CheckResult(name, expected, observed, None, bool(passed))


class CheckRegistry:
    """Named checks, each flagged as part of the fast suite or the full one only."""

    def __init__(self):
        self._checks = []

    def check(self, name, fast=True):
        def register(fn):
            self._checks.append((name, fast, fn))
            return fn
        return register

    def names(self, fast=False):
        return [name for name, is_fast, _ in self._checks if is_fast or not fast]

    def run(self, context, fast=True, only=None):
        results = []
        for name, is_fast, fn in self._checks:
            if (fast and not is_fast) or (only is not None and name not in only):
                continue
            start_time = time.time()
            try:
                outcome = fn(context)
            except MerosinError as e:
                logger.error(f"Check {name} raised: {str(e)}", exc_info=True)
                outcome = holds(name, "completes", str(e), False)
            outcome = outcome if isinstance(outcome, list) else [outcome]
            for result in outcome:
                level = logging.INFO if result.passed else logging.WARNING
                logger.log(level, f"{result.check_name}: {'pass' if result.passed else 'FAIL'}")
            logger.debug(f"{name} took {time.time() - start_time:.2f} seconds")
            results.extend(outcome)
        return results


def _oracle_root(fn, lo, hi, xtol=1e-10):
    return optimize.bisect(fn, lo, hi, xtol=xtol, maxiter=500)


def setup_checks(registry):
    """Register every check on the registry"""

    @registry.check("constants.ranges")
    def constants_ranges(ctx):
        c = ctx.constants
        return [
            within("constants.lambda_star_range", 0.112, 0.122, c.lambda_star),
            within("constants.lambda_2star_range", 0.0246, 0.0256, c.lambda_2star),
        ]

    @registry.check("constants.oracles")
    def constants_oracles(ctx):
        c = ctx.constants
        x_star = _oracle_root(lambda x: x * math.cos(x) + math.sin(x) - 2.0 * x ** 3, 0.8, 0.9)
        p_2star = _oracle_root(lambda t: math.cos(t) - 2.0 * math.pi * t, 0.1, 0.2)
        return [
            close("constants.lambda_star_oracle", psi_cap(x_star), c.lambda_star, 1e-9),
            close("constants.lambda_2star_oracle", psi_low(p_2star), c.lambda_2star, 1e-9),
        ]

    @registry.check("constants.ladder")
    def constants_ladder(ctx):
        problems = ctx.constants.ladder_violations()
        return holds("constants.ladder", "0 < l** <= l* < l^ < 1 < l1 < l2", problems or "ordered", not problems)

    @registry.check("constants.two_equation_systems")
    def constants_systems(ctx):
        c = ctx.constants
        results = []
        for name, equation, seed, value in (
            ("constants.lambda_1_system", flip_equation, (3.9, 8.8), c.lambda_1),
            ("constants.lambda_2_system", fold_equation, (4.7, 10.4), c.lambda_2),
        ):
            def F(y, lam, equation=equation):
                return (math.sinh(y) - y * (y * y - lam), equation(y))
            _, lam = solve2d(F, seed, tol=1e-10)
            results.append(close(name, lam, value, 1e-6))
        return results

    @registry.check("multipliers")
    def multipliers(ctx):
        c = ctx.constants
        at_x_star = eval_f_prime(c.witness_x_star, ParamPoint(c.lambda_star)).value.real
        cycles = imag_two_cycles(ParamPoint(9.5), c)
        a = cycles[0].location.coordinate
        a_oracle = _oracle_root(lambda y: reflection_lambda(y) - 9.5, math.sqrt(9.5), c.witness_y2)
        return [
            close("multiplier.x_star", -1.0, at_x_star, 1e-6),
            close("multiplier.fold", 1.0, reflection_multiplier(c.witness_y2), 1e-6),
            within("multiplier.cycle_at_9_5", 0.0, 1.0, cycles[0].multiplier),
            close("multiplier.a_at_9_5", a_oracle, a, 1e-2),
        ]

    @registry.check("real_dynamics")
    def real_dynamics(ctx):
        c = ctx.constants
        rng = np.random.default_rng(SAMPLE_SEED)
        results = []
        for lam in (1.2, 2.0, 5.0):
            p = ParamPoint(lam)
            seeds = rng.uniform(-50.0, 50.0, 1000)
            labels, _, final = classify_array(seeds, p, attractor_inventory(p, c), OrbitOptions.for_parameter(p, c))
            ok = np.all(labels == BasinLabel.ORIGIN) and np.all(np.abs(final) < 1e-9)
            results.append(holds(f"real_dynamics.origin_at_{lam}", "all ConvergedTo(origin)",
                                 int(np.count_nonzero(labels != BasinLabel.ORIGIN)), ok))
        for lam in (0.3, 0.5, 0.8):
            p = ParamPoint(lam)
            x_oracle = _oracle_root(lambda x: psi_cap(x) - lam, 1e-6, 0.93, xtol=1e-14)
            seeds = rng.uniform(-50.0, 50.0, 1000)
            labels, _, final = classify_array(seeds, p, attractor_inventory(p, c), OrbitOptions.for_parameter(p, c))
            misses = 0
            for x, label, z in zip(seeds, labels, final):
                expected = expected_real_attractor(float(x), p, c)
                if expected is None:
                    misses += 1
                    continue
                sign = 1.0 if expected is AttractorId.REAL_FIXED_PLUS else -1.0
                if BasinLabel(int(label)) != BasinLabel[expected.name] or abs(z - sign * x_oracle) > 1e-8:
                    misses += 1
            results.append(holds(f"real_dynamics.sign_split_at_{lam}", 0, misses, misses == 0))
        return results

    @registry.check("chaos_certificate")
    def chaos(ctx):
        results = []
        for lam, expected in ((0.005, True), (0.015, True), (0.0251, True), (0.03, False), (0.117, False), (1.0, False)):
            cert = chaos_certificate(ParamPoint(lam))
            results.append(holds(f"chaos_certificate.at_{lam}", expected, cert.covered, cert.covered is expected))
        return results

    @registry.check("period_doubling")
    def period_doubling(ctx):
        report = period_doubling_probe(0.005, ctx.constants)
        return [
            holds("period_doubling.cycle_below", True, report.below.has_cycle, report.below.has_cycle),
            holds("period_doubling.no_cycle_above", False, report.above.has_cycle, not report.above.has_cycle),
        ]

    @registry.check("imag_dynamics")
    def imag_dynamics(ctx):
        c = ctx.constants
        results = []
        cases = [(9.5, y, AttractorId.IMAG_TWO_CYCLE) for y in (4.0, 4.5, 5.0)]
        cases += [(9.5, 5.5, None)] + [(12.0, y, None) for y in (4.0, 6.0)]
        # 2 lies inside the invariant disc D(0, r_12), r_12 ≈ 2.96
        cases += [(12.0, 2.0, AttractorId.ORIGIN), (2.0, 0.5, AttractorId.ORIGIN)]
        for lam, y, expected in cases:
            outcome = classify_imag_orbit(y, ParamPoint(lam), c)
            if expected is None:
                ok = outcome.status is OrbitStatus.ESCAPED
                want = "Escaped"
            else:
                ok = outcome.status is OrbitStatus.CONVERGED_TO and outcome.attractor_id is expected
                want = f"ConvergedTo({expected.value})"
            results.append(holds(f"imag_dynamics.y_{y}_at_{lam}", want, outcome.label.name, ok))
        return results

    @registry.check("invariant_disk")
    def invariant_disk(ctx):
        c = ctx.constants
        results = []
        for lam in (1.5, 2.0, 5.0):
            p = ParamPoint(lam)
            report = disk_boundary_ratio(p)
            labels = disk_interior_outcomes(p, 1000, SAMPLE_SEED, c)
            outside = sum(1 for label in labels if label is not BasinLabel.ORIGIN)
            results += [
                holds(f"invariant_disk.boundary_at_{lam}", "<= 1 + 1e-12", report.max_ratio,
                      report.max_ratio <= 1.0 + 1e-12),
                close(f"invariant_disk.top_at_{lam}", 1.0, report.ratio_at_top, 1e-10),
                close(f"invariant_disk.phi_at_{lam}", lam, phi_big(report.radius), 1e-9),
                holds(f"invariant_disk.interior_at_{lam}", 0, outside, outside == 0),
            ]
        return results

    @registry.check("zero_preimages")
    def zero_preimages(ctx):
        outcomes = zero_preimage_outcomes(ParamPoint(2.0), 20, ctx.constants)
        bad = [n for n, o in outcomes.items() if o.attractor_id is not AttractorId.ORIGIN or o.iterations > 2]
        return holds("zero_preimages.at_2.0", "ConvergedTo(origin) within 2 steps", bad, not bad)

    @registry.check("regimes")
    def regimes(ctx):
        c = ctx.constants
        results = []
        for lam, expected in ((0.01, RegimeId.CHAOTIC), (9.5, RegimeId.ORIGIN_AND_CYCLE), (12.0, RegimeId.ORIGIN_COMPLETE),
                              (c.lambda_star, RegimeId.PERIOD_DOUBLING), (1.0, RegimeId.PITCHFORK)):
            got = regime(ParamPoint(lam), c).regime_id
            results.append(holds(f"regimes.at_{lam:.6g}", expected.name, got.name, got is expected))
        return results

    @registry.check("symmetry")
    def symmetry(ctx):
        rng = np.random.default_rng(SAMPLE_SEED)
        results = []
        for lam in (0.5, 2.0, 9.5, 12.0):
            seeds = rng.uniform(-5.0, 5.0, 1000) + 1j * rng.uniform(-5.0, 5.0, 1000)
            counts = symmetry_violations(seeds, ParamPoint(lam), ctx.constants)
            results.append(holds(f"symmetry.at_{lam}", {"negation": 0, "conjugation": 0}, counts,
                                 not any(counts.values())))
        return results

    @registry.check("critical_points_on_axes")
    def critical_points(ctx):
        results = []
        for lam in (0.5, 2.0):
            roots = offaxis_critical_search(ParamPoint(lam), 1000, SAMPLE_SEED)
            off_axis = [z for z in roots if min(abs(z.real), abs(z.imag)) > 1e-8]
            results.append(holds(f"critical_points_on_axes.at_{lam}", 0, len(off_axis), not off_axis))
        return results

    @registry.check("figures", fast=False)
    def figures(ctx):
        c = ctx.constants
        results = []
        for lam in (9.5, 12.0):
            window = Window(*FIGURE_WINDOW, 300, 200)
            grid = render_grid(ParamPoint(lam), window, RenderOptions(threads=ctx.threads), c)
            fractions = basin_fractions(grid)
            cycle_share = fractions[BasinLabel.IMAG_TWO_CYCLE]
            if lam < c.lambda_2:
                results.append(holds(f"figures.cycle_basin_at_{lam}", "> 0", cycle_share, cycle_share > 0))
            else:
                results.append(holds(f"figures.cycle_basin_at_{lam}", 0.0, cycle_share, cycle_share == 0))
            origin_share = fractions[BasinLabel.ORIGIN]
            axis_share = row_fraction(grid, 0, BasinLabel.ORIGIN)
            results += [
                holds(f"figures.origin_basin_at_{lam}", "> 0.5", origin_share, origin_share > 0.5),
                holds(f"figures.real_axis_row_at_{lam}", ">= 0.99", axis_share, axis_share >= 0.99),
                holds(f"figures.mirror_at_{lam}", 0, mirror_mismatches(grid), mirror_mismatches(grid) == 0),
            ]
        return results

    @registry.check("figures.determinism", fast=False)
    def determinism(ctx):
        window = Window(*FIGURE_WINDOW, 120, 80)
        p = ParamPoint(9.5)
        single = render_grid(p, window, RenderOptions(threads=1), ctx.constants)
        pooled = render_grid(p, window, RenderOptions(threads=max(2, ctx.threads)), ctx.constants)
        differing = int(np.count_nonzero(single.labels != pooled.labels))
        return holds("figures.determinism", 0, differing, differing == 0)

    @registry.check("figures.escape_coherence", fast=False)
    def escape_coherence(ctx):
        window = Window(*FIGURE_WINDOW, 75, 50).supersampled(4)
        grid = render_grid(ParamPoint(12.0), window, RenderOptions(threads=ctx.threads), ctx.constants)
        share = escaped_interior_fraction(grid, 8, 200, SAMPLE_SEED)
        return holds("figures.escape_coherence", ">= 0.95", share, share >= 0.95)


registry = CheckRegistry()
setup_checks(registry)


def run_verify(context, fast=False):
    """
    Run the suite.

    Returns:
        dict: report with "passed" and the per-check "checks" list
    """
    start_time = time.time()
    results = registry.run(context, fast=fast)
    failed = [r.check_name for r in results if not r.passed]
    logger.info(f"verify: {len(results) - len(failed)} of {len(results)} checks passed "
                f"in {time.time() - start_time:.1f} seconds")
    return {
        "suite": "fast" if fast else "full",
        "passed": not failed,
        "failed": failed,
        "checks": [r.to_report() for r in results],
    }
