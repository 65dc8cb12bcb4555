import math

import pytest

from merosin.errors import ValidationError
from merosin.family import ParamPoint, eval_h, phi_big, phi_small, psi_cap
from merosin.paramlab import (
    Axis,
    RegimeId,
    Stability,
    attractor_inventory,
    classify_multiplier,
    critical_point_order,
    imag_fixed_points,
    imag_two_cycles,
    imaginary_critical_point,
    invariant_disk_radius,
    offaxis_critical_search,
    preimage_of_repeller,
    real_critical_point,
    real_fixed_points,
    real_singularities_in_disk,
    reflection_lambda,
    regime,
    singular_values,
)


# --- constants -----------------------------------------------------------------

def test_constants_land_in_their_ranges(constants):
    assert constants.lambda_star == pytest.approx(0.117, abs=5e-3)
    assert constants.lambda_2star == pytest.approx(0.0251, abs=5e-4)
    assert constants.lambda_1 == pytest.approx(8.74, abs=5e-2)
    assert constants.lambda_2 == pytest.approx(10.40, abs=5e-2)
    assert constants.lambda_star < constants.lambda_hat < 1.0


def test_constants_ladder_holds(constants):
    assert constants.ladder_violations() == []
    assert [name for name, _ in constants.ladder()] == [
        "lambda_2star", "lambda_star", "lambda_hat", "one", "lambda_1", "lambda_2",
    ]


def test_constants_satisfy_defining_equations(constants):
    assert abs(phi_small(constants.witness_x_star) + 1.0) < 1e-9
    assert abs(psi_cap(constants.witness_x_star) - constants.lambda_star) < 1e-12
    assert abs(reflection_lambda(constants.witness_y1) - constants.lambda_1) < 1e-12
    assert abs(reflection_lambda(constants.witness_y2) - constants.lambda_2) < 1e-12
    assert constants.witness_y2 == pytest.approx(4.735, abs=5e-3)


def test_tampered_ladder_is_reported(constants):
    from dataclasses import replace

    broken = replace(constants, lambda_star=1.5)
    assert "lambda_hat<one" not in broken.ladder_violations()
    assert "lambda_star<lambda_hat" in broken.ladder_violations()


# --- multipliers -------------------------------------------------------------

@pytest.mark.parametrize("m, expected", [
    (0.0, Stability.SUPERATTRACTING),
    (0.5, Stability.ATTRACTING),
    (-1.0, Stability.RATIONALLY_INDIFFERENT),
    (1.0000005, Stability.RATIONALLY_INDIFFERENT),
    (2.0, Stability.REPELLING),
    (1j * 0.3, Stability.ATTRACTING),
])
def test_classify_multiplier(m, expected):
    assert classify_multiplier(m) is expected


# --- fixed points --------------------------------------------------------------

def test_real_fixed_points_above_one():
    records = real_fixed_points(ParamPoint(2.0))
    assert len(records) == 1
    assert records[0].multiplier == pytest.approx(0.5, abs=1e-15)
    assert records[0].stability is Stability.ATTRACTING


def test_real_fixed_points_below_one():
    origin, plus, minus = real_fixed_points(ParamPoint(0.5))
    assert origin.multiplier == pytest.approx(2.0)
    assert origin.stability is Stability.REPELLING
    assert plus.location.coordinate == pytest.approx(0.655, abs=1e-3)
    assert minus.location.coordinate == -plus.location.coordinate
    assert plus.stability is Stability.ATTRACTING
    assert plus.location.axis is Axis.REAL


def test_real_fixed_point_is_indifferent_at_lambda_star(constants):
    _, plus, minus = real_fixed_points(ParamPoint(constants.lambda_star))
    assert plus.location.coordinate == pytest.approx(constants.witness_x_star, abs=1e-9)
    for record in (plus, minus):
        assert abs(record.multiplier + 1.0) < 1e-6
        assert record.stability is Stability.RATIONALLY_INDIFFERENT


def test_imag_fixed_points():
    origin, r, minus_r = imag_fixed_points(ParamPoint(2.0))
    assert origin.multiplier == pytest.approx(0.5)
    assert r.location.coordinate == pytest.approx(0.923, abs=1e-3)
    assert abs(phi_big(r.location.coordinate) - 2.0) < 1e-9
    assert minus_r.location.coordinate == -r.location.coordinate
    assert r.stability is Stability.REPELLING

    (only,) = imag_fixed_points(ParamPoint(0.5))
    assert only.stability is Stability.REPELLING


def test_invariant_disk_radius():
    assert invariant_disk_radius(ParamPoint(2.0)) == pytest.approx(
        imag_fixed_points(ParamPoint(2.0))[1].location.coordinate, abs=1e-12
    )
    assert abs(invariant_disk_radius(ParamPoint(math.sinh(1.0) + 1.0)) - 1.0) < 1e-10
    assert 0 < invariant_disk_radius(ParamPoint(1.0 + 1e-6)) < 1e-2


@pytest.mark.parametrize("value", [0.5, 1.0])
def test_invariant_disk_needs_lambda_above_one(value):
    with pytest.raises(ValidationError):
        invariant_disk_radius(ParamPoint(value))


# --- imaginary 2-cycles -----------------------------------------------------------

def test_imag_two_cycles_between_lambda1_and_lambda2(constants):
    attracting, repelling = imag_two_cycles(ParamPoint(9.5), constants)
    assert attracting.cycle_length == 2
    assert attracting.location.axis is Axis.IMAG
    assert attracting.location.coordinate == pytest.approx(4.119, abs=1e-2)
    assert attracting.map_multiplier == pytest.approx(-0.428, abs=1e-2)
    assert 0.17 < attracting.multiplier < 0.19
    assert attracting.stability is Stability.ATTRACTING

    assert repelling.location.coordinate == pytest.approx(5.23, abs=2e-2)
    assert repelling.map_multiplier == pytest.approx(2.17, abs=5e-2)
    assert repelling.stability is Stability.REPELLING


def test_imag_two_cycle_is_a_period_two_orbit(constants):
    p = ParamPoint(9.5)
    for record in imag_two_cycles(p, constants):
        y = record.location.coordinate
        assert abs(eval_h(y, p).value + y) < 1e-8 * y


def test_imag_two_cycles_at_and_beyond_lambda2(constants):
    (parabolic,) = imag_two_cycles(ParamPoint(constants.lambda_2), constants)
    assert abs(parabolic.map_multiplier - 1.0) < 1e-6
    assert parabolic.stability is Stability.RATIONALLY_INDIFFERENT
    assert imag_two_cycles(ParamPoint(12.0), constants) == []


def test_imag_two_cycle_indifferent_at_lambda1(constants):
    inner = imag_two_cycles(ParamPoint(constants.lambda_1), constants)[0]
    assert inner.stability is Stability.RATIONALLY_INDIFFERENT
    assert abs(inner.map_multiplier + 1.0) < 1e-6


def test_preimage_of_repeller(constants):
    p = ParamPoint(9.5)
    attracting, repelling = imag_two_cycles(p, constants)
    r_prime = preimage_of_repeller(p, constants)
    assert p.pole_ordinate < r_prime < attracting.location.coordinate
    assert abs(-eval_h(r_prime, p).value - repelling.location.coordinate) < 1e-8


@pytest.mark.parametrize("value", [5.0, 12.0])
def test_preimage_of_repeller_outside_cycle_range(constants, value):
    with pytest.raises(ValidationError):
        preimage_of_repeller(ParamPoint(value), constants)


def test_attractor_inventory(constants):
    assert len(attractor_inventory(ParamPoint(0.5), constants)) == 2
    (origin,) = attractor_inventory(ParamPoint(2.0), constants)
    assert origin.location.coordinate == 0.0
    at_9_5 = attractor_inventory(ParamPoint(9.5), constants)
    assert [r.cycle_length for r in at_9_5] == [1, 2]


# --- singular values -----------------------------------------------------------

def test_critical_points_at_lambda_one():
    p = ParamPoint(1.0)
    assert real_critical_point(p, 0) == pytest.approx(0.798, abs=1e-3)
    assert imaginary_critical_point(p) == pytest.approx(2.39, abs=1e-2)


def test_singular_value_catalog():
    p = ParamPoint(1.0)
    catalog = singular_values(p, n_max=5)
    assert catalog.asymptotic_values == (0j,)
    assert catalog.real_critical_indices == tuple(range(-5, 6))
    for n, x in zip(catalog.real_critical_indices, catalog.real_critical_points):
        if n >= 0:
            assert n * math.pi < x < (n + 1) * math.pi
        else:
            assert catalog.real_critical_points[catalog.real_critical_indices.index(-n - 1)] == -x
    for x, v in zip(catalog.real_critical_points, catalog.real_critical_values):
        assert v == pytest.approx(math.cos(x) / (2 * x))
    c = catalog.imag_critical_points[1]
    assert catalog.imag_critical_values[0].imag == pytest.approx(math.cosh(c) / (2 * c))
    assert catalog.imag_critical_values[1] == -catalog.imag_critical_values[0]


def test_singular_values_need_positive_n_max():
    with pytest.raises(ValidationError):
        singular_values(ParamPoint(1.0), n_max=0)


def test_critical_point_order(constants):
    assert critical_point_order(ParamPoint(0.5)) == 1
    assert critical_point_order(ParamPoint(0.8)) == -1
    assert critical_point_order(ParamPoint(constants.lambda_hat)) == 0


def test_real_singular_values_inside_invariant_disk():
    assert real_singularities_in_disk(ParamPoint(5.0))


def test_offaxis_search_finds_only_axis_roots():
    roots = offaxis_critical_search(ParamPoint(2.0), n_seeds=40, seed=1)
    for z in roots:
        assert min(abs(z.real), abs(z.imag)) < 1e-6


# --- regimes -----------------------------------------------------------------

@pytest.mark.parametrize("value, expected", [
    (0.01, RegimeId.CHAOTIC),
    (0.05, RegimeId.BELOW_PERIOD_DOUBLING),
    (0.5, RegimeId.REAL_PAIR),
    (1.0, RegimeId.PITCHFORK),
    (5.0, RegimeId.ORIGIN_ONLY),
    (9.5, RegimeId.ORIGIN_AND_CYCLE),
    (12.0, RegimeId.ORIGIN_COMPLETE),
])
def test_regime_rows(constants, value, expected):
    assert regime(ParamPoint(value), constants).regime_id is expected


def test_regime_at_boundaries(constants):
    assert regime(constants.lambda_star, constants).regime_id is RegimeId.PERIOD_DOUBLING
    assert regime(constants.lambda_1, constants).regime_id is RegimeId.IMAG_PARABOLIC
    assert regime(constants.lambda_2, constants).regime_id is RegimeId.IMAG_PARABOLIC
    assert regime(constants.lambda_2star, constants).regime_id is RegimeId.CHAOTIC


def test_regime_lists_expected_attractors(constants):
    descriptor = regime(ParamPoint(9.5), constants)
    assert len(descriptor.expected_attractors) == 2
    assert descriptor.notes


def test_regime_rejects_bad_lambda(constants):
    with pytest.raises(ValidationError):
        regime(0.0, constants)
