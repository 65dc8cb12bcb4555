import math
import os
import time
from pathlib import Path

from merosin.config import configure_logging, load_settings
from merosin.family import ParamPoint
from merosin.paramlab import compute_constants, regime
from merosin.render import (
    DEFAULT_SIZE,
    RenderOptions,
    Window,
    basin_fractions,
    mirror_mismatches,
    render_grid,
    write_grid_csv,
    write_ppm,
)

settings = load_settings()
configure_logging(settings.log_level)

output_dir = Path(os.getenv("MEROSIN_FIGURE_DIR", "figures"))
output_dir.mkdir(parents=True, exist_ok=True)

# Both basin figures share the window -1.5π < x < 1.5π, -2π < y < 0
width, height = DEFAULT_SIZE
window = Window(-1.5 * math.pi, 1.5 * math.pi, -2.0 * math.pi, 0.0, width, height)
constants = compute_constants()

for lam in (9.5, 12.0):
    p = ParamPoint(lam)
    print(f"Rendering lambda = {lam} ({regime(p, constants).regime_id.value})...")
    start_time = time.time()
    grid = render_grid(p, window, RenderOptions(threads=settings.threads), constants)
    print(f"Rendered in {time.time() - start_time:.1f}s")

    write_ppm(grid, output_dir / f"basins_{lam}.ppm")
    write_grid_csv(grid, output_dir / f"basins_{lam}.csv")

    for label, share in basin_fractions(grid).items():
        if share:
            print(f"  {label.name}: {share * 100:.2f}%")
    print(f"  mirror mismatches: {mirror_mismatches(grid)}")

print(f"Figures written to {output_dir}")
