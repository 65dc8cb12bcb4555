import math

import numpy as np
import pytest

from merosin.errors import OutputError, ValidationError
from merosin.family import ParamPoint
from merosin.orbitlab import BasinLabel
from merosin.render import (
    ClassifiedGrid,
    RenderOptions,
    Window,
    basin_fractions,
    chunks,
    escaped_interior_fraction,
    mirror_mismatches,
    nearest_row,
    ppm_bytes,
    read_grid_csv,
    render_grid,
    row_fraction,
    write_grid_csv,
    write_ppm,
)


def grid_of(labels, window=None):
    labels = np.asarray(labels, dtype=np.uint8)
    height, width = labels.shape
    window = window or Window(-1.0, 1.0, -1.0, 1.0, width, height)
    return ClassifiedGrid(window, labels, np.zeros(labels.shape, dtype=np.int64), 2.0)


def test_window_validation():
    with pytest.raises(ValidationError):
        Window(1.0, 0.0, 0.0, 1.0, 4, 4)
    with pytest.raises(ValidationError):
        Window(0.0, 1.0, 0.0, 1.0, 0, 4)


def test_pixel_centres_are_mirror_exact():
    window = Window(-1.5 * math.pi, 1.5 * math.pi, -2 * math.pi, 0.0, 30, 20)
    xs = window.xs()
    assert np.array_equal(xs, -xs[::-1])
    ys = window.ys()
    dy = 2 * math.pi / 20
    assert ys[0] == pytest.approx(-dy / 2)
    assert ys[0] > ys[-1]
    assert nearest_row(window, 0.0) == 0


def test_chunks():
    assert list(chunks(range(5), 2)) == [[0, 1], [2, 3], [4]]
    assert list(chunks([], 3)) == []


def test_grid_shape_is_checked():
    with pytest.raises(ValidationError):
        ClassifiedGrid(Window(0, 1, 0, 1, 2, 2), np.zeros((3, 2), dtype=np.uint8), np.zeros((3, 2)), 1.0)


def test_ppm_bytes():
    grid = grid_of([[BasinLabel.ORIGIN]])
    assert ppm_bytes(grid) == b"P6\n1 1\n255\n" + bytes([220, 20, 20])
    wide = grid_of([[BasinLabel.ORIGIN, BasinLabel.ESCAPED]])
    assert ppm_bytes(wide) == b"P6\n2 1\n255\n" + bytes([220, 20, 20, 0, 0, 0])


def test_write_ppm(tmp_path):
    grid = grid_of([[0, 3], [4, 5]])
    out = tmp_path / "basins.ppm"
    write_ppm(grid, out)
    assert out.read_bytes() == ppm_bytes(grid)
    with pytest.raises(OutputError) as excinfo:
        write_ppm(grid, tmp_path / "missing" / "basins.ppm")
    assert "missing" in str(excinfo.value)


def test_basin_fractions_cover_every_label():
    fractions = basin_fractions(grid_of([[0, 0], [4, 1]]))
    assert set(fractions) == set(BasinLabel)
    assert fractions[BasinLabel.ORIGIN] == 0.5
    assert fractions[BasinLabel.IMAG_TWO_CYCLE] == 0.0
    assert sum(fractions.values()) == pytest.approx(1.0)


def test_mirror_mismatches_respect_negation():
    plus, minus = BasinLabel.REAL_FIXED_PLUS, BasinLabel.REAL_FIXED_MINUS
    assert mirror_mismatches(grid_of([[minus, 0, 0, plus]])) == 0
    assert mirror_mismatches(grid_of([[plus, 0, 0, plus]])) == 2


def test_row_fraction():
    grid = grid_of([[0, 0, 4, 4], [0, 0, 0, 4]])
    assert row_fraction(grid, 1, BasinLabel.ORIGIN) == 0.75


def test_escaped_interior_fraction():
    assert escaped_interior_fraction(grid_of(np.full((20, 20), BasinLabel.ESCAPED)), tile=4, n_tiles=50) == 0.0
    assert escaped_interior_fraction(grid_of(np.zeros((20, 20))), tile=4, n_tiles=50) == 1.0
    with pytest.raises(ValidationError):
        escaped_interior_fraction(grid_of(np.zeros((5, 5))), tile=8)


def test_grid_csv_round_trip(tmp_path):
    grid = grid_of([[0, 3, 4], [6, 5, 1]])
    out = tmp_path / "grid.csv"
    write_grid_csv(grid, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "i,j,label,iterations"
    assert lines[2] == "1,0,IMAG_TWO_CYCLE,0"
    again = read_grid_csv(out, grid.window, grid.lam)
    assert np.array_equal(again.labels, grid.labels)


def test_render_is_independent_of_threads(constants):
    window = Window(-3.0, 3.0, -3.0, 3.0, 24, 16)
    p = ParamPoint(2.0)
    one = render_grid(p, window, RenderOptions(threads=1, rows_per_batch=3), constants)
    three = render_grid(p, window, RenderOptions(threads=3, rows_per_batch=3), constants)
    assert np.array_equal(one.labels, three.labels)
    assert np.array_equal(one.iterations, three.iterations)
    assert mirror_mismatches(one) == 0


def test_render_near_real_axis_is_origin(constants):
    grid = render_grid(ParamPoint(2.0), Window(-3.0, 3.0, -0.01, 0.01, 30, 2), c=constants)
    assert basin_fractions(grid)[BasinLabel.ORIGIN] == 1.0


def test_render_finds_the_imaginary_cycle_only_below_lambda2(constants):
    window = Window(-0.5, 0.5, -4.6, -3.6, 10, 10)
    with_cycle = render_grid(ParamPoint(9.5), window, c=constants)
    assert basin_fractions(with_cycle)[BasinLabel.IMAG_TWO_CYCLE] > 0
    without = render_grid(ParamPoint(12.0), window, c=constants)
    assert basin_fractions(without)[BasinLabel.IMAG_TWO_CYCLE] == 0


@pytest.mark.slow
@pytest.mark.parametrize("value", [9.5, 12.0])
def test_figure_window_properties(constants, value):
    window = Window(-1.5 * math.pi, 1.5 * math.pi, -2 * math.pi, 0.0, 300, 200)
    grid = render_grid(ParamPoint(value), window, RenderOptions(threads=2), constants)
    assert mirror_mismatches(grid) == 0
    assert row_fraction(grid, nearest_row(window, 0.0), BasinLabel.ORIGIN) >= 0.99
