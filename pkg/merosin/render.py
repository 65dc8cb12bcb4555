"""
Basin images for f_λ: classify every pixel centre of a window and write
the result as a binary PPM, optionally with a CSV dump of the grid.
"""
import csv
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice
from pathlib import Path

import numpy as np

from merosin.errors import OutputError, ValidationError
from merosin.orbitlab import BasinLabel, OrbitOptions, classify_array
from merosin.paramlab import attractor_inventory, compute_constants

logger = logging.getLogger(__name__)

DEFAULT_SIZE = (900, 600)
ROWS_PER_BATCH = 8

DEFAULT_PALETTE = {
    BasinLabel.ORIGIN: (220, 20, 20),
    BasinLabel.REAL_FIXED_PLUS: (240, 160, 40),
    BasinLabel.REAL_FIXED_MINUS: (160, 240, 40),
    BasinLabel.IMAG_TWO_CYCLE: (20, 90, 220),
    BasinLabel.ESCAPED: (0, 0, 0),
    BasinLabel.POLE_HIT: (255, 255, 255),
    BasinLabel.UNDECIDED: (128, 128, 128),
}


@dataclass(frozen=True)
class Window:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValidationError(
                f"window needs x_min < x_max and y_min < y_max, got "
                f"{self.x_min}:{self.x_max}:{self.y_min}:{self.y_max}"
            )
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"window size must be at least 1x1, got {self.width}x{self.height}")

    def xs(self):
        """Pixel-centre abscissae, left to right."""
        dx = (self.x_max - self.x_min) / self.width
        centre = 0.5 * (self.x_min + self.x_max)
        return centre + (np.arange(self.width) + 0.5 - self.width / 2) * dx

    def ys(self):
        """Pixel-centre ordinates, top row (y_max) first."""
        dy = (self.y_max - self.y_min) / self.height
        centre = 0.5 * (self.y_min + self.y_max)
        return centre - (np.arange(self.height) + 0.5 - self.height / 2) * dy

    def supersampled(self, factor):
        return Window(self.x_min, self.x_max, self.y_min, self.y_max, self.width * factor, self.height * factor)


@dataclass(frozen=True)
class RenderOptions:
    threads: int = 1
    rows_per_batch: int = ROWS_PER_BATCH
    max_iter: int | None = None


@dataclass(frozen=True, eq=False)
class ClassifiedGrid:
    window: Window
    labels: np.ndarray
    iterations: np.ndarray
    lam: float

    def __post_init__(self):
        shape = (self.window.height, self.window.width)
        if self.labels.shape != shape or self.iterations.shape != shape:
            raise ValidationError(f"grid arrays must have shape {shape}, got {self.labels.shape}")


def chunks(iterable, batch_size=ROWS_PER_BATCH):
    """A helper function to break an iterable into chunks of size batch_size."""
    iterator = iter(iterable)
    chunk = list(islice(iterator, batch_size))
    while chunk:
        yield chunk
        chunk = list(islice(iterator, batch_size))


def render_grid(p, window, opts=None, c=None):
    """
    Classify every pixel centre of the window.

    Scanlines are grouped into batches that run on a thread pool; each
    batch writes only its own rows, so the result does not depend on the
    number of threads.
    """
    opts = opts or RenderOptions()
    c = c or compute_constants()
    inventory = attractor_inventory(p, c)
    orbit_opts = OrbitOptions.for_parameter(p, c, max_iter=opts.max_iter)
    xs, ys = window.xs(), window.ys()

    labels = np.empty((window.height, window.width), dtype=np.uint8)
    iterations = np.empty((window.height, window.width), dtype=np.int64)

    def classify_rows(rows):
        seeds = xs[np.newaxis, :] + 1j * ys[rows][:, np.newaxis]
        row_labels, row_iterations, _ = classify_array(seeds, p, inventory, orbit_opts)
        return rows, row_labels.reshape(len(rows), -1), row_iterations.reshape(len(rows), -1)

    logger.info(f"Rendering lambda={p.lam} on {window.width}x{window.height} with {opts.threads} thread(s)")
    start_time = time.time()
    with ThreadPoolExecutor(max_workers=opts.threads) as executor:
        for rows, row_labels, row_iterations in executor.map(classify_rows, chunks(range(window.height), opts.rows_per_batch)):
            labels[rows] = row_labels
            iterations[rows] = row_iterations
    logger.info(f"Rendered {window.width * window.height} pixels in {time.time() - start_time:.2f} seconds")

    grid = ClassifiedGrid(window, labels, iterations, p.lam)
    undecided = int(np.count_nonzero(labels == BasinLabel.UNDECIDED))
    if undecided:
        logger.warning(f"{undecided} pixels stayed Undecided after {orbit_opts.max_iter} iterations")
    return grid


def basin_fractions(grid):
    """Fraction of pixels per label; every label is present, absent ones as 0.0."""
    counts = np.bincount(grid.labels.ravel(), minlength=len(BasinLabel))
    total = grid.labels.size
    return {label: counts[label] / total for label in BasinLabel}


def _palette_array(palette):
    table = np.zeros((len(BasinLabel), 3), dtype=np.uint8)
    for label in BasinLabel:
        table[label] = palette.get(label, DEFAULT_PALETTE[label])
    return table


def ppm_bytes(grid, palette=None):
    rgb = _palette_array(palette or DEFAULT_PALETTE)[grid.labels]
    header = f"P6\n{grid.window.width} {grid.window.height}\n255\n".encode("ascii")
    return header + rgb.tobytes()


def write_ppm(grid, path, palette=None):
    """Write the grid as a binary PPM, row-major with the top row (y_max) first."""
    path = Path(path)
    try:
        path.write_bytes(ppm_bytes(grid, palette))
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote {path}")


def write_grid_csv(grid, path):
    """Dump the grid as CSV rows i,j,label,iterations (i column, j row)."""
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["i", "j", "label", "iterations"])
            for j in range(grid.window.height):
                for i in range(grid.window.width):
                    writer.writerow([i, j, BasinLabel(int(grid.labels[j, i])).name, int(grid.iterations[j, i])])
    except OSError as e:
        raise OutputError(path, e.strerror or str(e)) from e
    logger.info(f"Wrote grid dump {path}")


def read_grid_csv(path, window, lam):
    """Rebuild a ClassifiedGrid from write_grid_csv output for a known window."""
    labels = np.full((window.height, window.width), BasinLabel.UNDECIDED, dtype=np.uint8)
    iterations = np.zeros((window.height, window.width), dtype=np.int64)
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            i, j = int(row["i"]), int(row["j"])
            try:
                labels[j, i] = BasinLabel[row["label"]]
            except KeyError:
                raise ValidationError(f"unknown label {row['label']!r} in {path}")
            iterations[j, i] = int(row["iterations"])
    return ClassifiedGrid(window, labels, iterations, lam)


def mirror_mismatches(grid):
    """
    Pixels whose label differs from the involuted label of their mirror
    image across the window's vertical centre line.
    """
    negate = np.array([BasinLabel(v).negated() for v in range(len(BasinLabel))], dtype=np.uint8)
    mirrored = negate[grid.labels[:, ::-1]]
    return int(np.count_nonzero(mirrored != grid.labels))


def row_fraction(grid, row, label):
    """Fraction of one pixel row carrying the given label."""
    return float(np.count_nonzero(grid.labels[row] == label)) / grid.window.width


def nearest_row(window, y):
    """Index of the pixel row whose centre is closest to ordinate y."""
    return int(np.argmin(np.abs(window.ys() - y)))


def escaped_interior_fraction(grid, tile=8, n_tiles=200, seed=0):
    """
    Share of random tile x tile blocks that contain no interior Escaped pixel.

    A pixel is interior when it and its eight neighbours are all Escaped.
    """
    height, width = grid.labels.shape
    if height < tile + 2 or width < tile + 2:
        raise ValidationError(f"grid {width}x{height} is too small for {tile}x{tile} tiles")
    escaped = grid.labels == BasinLabel.ESCAPED
    interior = escaped[1:-1, 1:-1].copy()
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            interior &= escaped[1 + dj:height - 1 + dj, 1 + di:width - 1 + di]
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, interior.shape[0] - tile + 1, n_tiles)
    cols = rng.integers(0, interior.shape[1] - tile + 1, n_tiles)
    clean = sum(1 for j, i in zip(rows, cols) if not interior[j:j + tile, i:i + tile].any())
    return clean / n_tiles
