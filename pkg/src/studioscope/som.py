"""Self-organizing map: training, placement, U-matrix, group trajectories.

Classic online Kohonen training on the normalized feature vectors: per step
draw a sample (seeded shuffle each epoch), find its best matching unit, and
pull every unit toward the sample with a Gaussian neighborhood.  Learning
rate and radius decay exponentially over the total step count.  Training is
deterministic for a fixed seed; the fitted grid is immutable afterwards, so
corpus placement can fan out over threads without changing results.

Grid arrays are indexed [y][x] (row-major); a unit's linear index is
y * width + x, which is also the BMU tie-breaking order.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .corpus import NormalizedCorpus
from .errors import InvalidConfig, SmallMapWarning, SparseCellWarning

NATIONS = ("G", "U")


@dataclass(frozen=True)
class SomConfig:
    width: int = 30
    height: int = 20
    epochs: int = 20
    initial_learning_rate: float = 0.5
    final_learning_rate: float = 0.01
    initial_radius: float | None = None  # None -> max(width, height) / 2
    final_radius: float = 1.0
    seed: int = 0
    init_mode: str = "pca_linear"

    def validate(self) -> None:
        if self.width < 2 or self.height < 2 or self.width * self.height < 4:
            raise InvalidConfig("grid must be at least 2x2")
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if not 0.0 < self.initial_learning_rate <= 1.0:
            raise InvalidConfig("initial_learning_rate must be in (0, 1]")
        if not 0.0 < self.final_learning_rate <= self.initial_learning_rate:
            raise InvalidConfig("final_learning_rate must be in (0, initial]")
        if self.initial_radius is not None and self.initial_radius <= 0:
            raise InvalidConfig("initial_radius must be positive")
        if self.init_mode not in ("pca_linear", "random"):
            raise InvalidConfig(f"unknown init_mode {self.init_mode!r}")

    def start_radius(self) -> float:
        if self.initial_radius is not None:
            return float(self.initial_radius)
        return max(self.width, self.height) / 2.0


@dataclass
class SomGrid:
    config: SomConfig
    codebook: np.ndarray          # (height, width, dim)
    trained: bool = False
    epoch_quantization_error: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.codebook.shape[2]


@dataclass(frozen=True)
class Placement:
    track_id: str
    unit_x: int
    unit_y: int
    quantization_error: float


def _init_codebook(data: np.ndarray, config: SomConfig,
                   rng: np.random.Generator) -> np.ndarray:
    h, w, dim = config.height, config.width, data.shape[1]
    if config.init_mode == "random":
        lo = data.min(axis=0)
        hi = data.max(axis=0)
        return rng.uniform(lo, hi, size=(h, w, dim))
    # pca_linear: span the grid along the two leading principal axes
    mean = data.mean(axis=0)
    centered = data - mean
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt[:2].copy()
    for k in range(2):
        # sign convention: largest-magnitude loading is positive
        j = int(np.argmax(np.abs(axes[k])))
        if axes[k, j] < 0:
            axes[k] = -axes[k]
    scale = svals[:2] / np.sqrt(data.shape[0])
    xs = np.linspace(-2.0, 2.0, w)
    ys = np.linspace(-2.0, 2.0, h)
    codebook = (mean[None, None, :]
                + ys[:, None, None] * scale[1] * axes[1][None, None, :]
                + xs[None, :, None] * scale[0] * axes[0][None, None, :])
    return np.ascontiguousarray(codebook)


def train_som(z_matrix: np.ndarray, config: SomConfig) -> SomGrid:
    """Fit a SOM to the rows of ``z_matrix`` with online Kohonen updates."""
    config.validate()
    data = np.asarray(z_matrix, dtype=float)
    if data.ndim != 2 or data.shape[0] < 1:
        raise InvalidConfig("training data must be a non-empty 2-D matrix")
    n, dim = data.shape
    units = config.width * config.height
    if n < units:
        warnings.warn(f"{n} vectors for {units} units; map may stay sparse",
                      SmallMapWarning, stacklevel=2)

    rng = np.random.default_rng(config.seed)
    codebook = _init_codebook(data, config, rng)

    grid_y, grid_x = np.mgrid[0:config.height, 0:config.width]
    total_steps = max(1, config.epochs * n - 1)
    alpha0 = config.initial_learning_rate
    alpha_ratio = config.final_learning_rate / alpha0
    sigma0 = config.start_radius()
    sigma_ratio = config.final_radius / sigma0

    qe_per_epoch = []
    step = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for i in order:
            x = data[i]
            frac = step / total_steps
            alpha = alpha0 * alpha_ratio ** frac
            sigma = sigma0 * sigma_ratio ** frac
            diff = codebook - x
            d2 = np.einsum("yxk,yxk->yx", diff, diff)
            flat = int(np.argmin(d2))
            by, bx = divmod(flat, config.width)
            g2 = (grid_y - by) ** 2 + (grid_x - bx) ** 2
            h = np.exp(-g2 / (2.0 * sigma * sigma))
            codebook -= (alpha * h)[:, :, None] * diff
            step += 1
        qe_per_epoch.append(_mean_quantization_error(codebook, data))

    grid = SomGrid(config=config, codebook=codebook, trained=True,
                   epoch_quantization_error=qe_per_epoch)
    return grid


def _mean_quantization_error(codebook: np.ndarray, data: np.ndarray) -> float:
    flat = codebook.reshape(-1, codebook.shape[2])
    d2 = ((data[:, None, :] - flat[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2.min(axis=1)).mean())


def bmu(grid: SomGrid, vector: np.ndarray) -> tuple[int, int, float]:
    """Best matching unit for one vector: (x, y, Euclidean distance).

    Ties go to the smallest linear index y * width + x.
    """
    if not grid.trained:
        raise InvalidConfig("grid is not trained")
    diff = grid.codebook - np.asarray(vector, dtype=float)
    d2 = np.einsum("yxk,yxk->yx", diff, diff)
    flat = int(np.argmin(d2))  # first minimum in row-major order
    y, x = divmod(flat, grid.config.width)
    return x, y, float(np.sqrt(d2[y, x]))


def place_tracks(grid: SomGrid, corpus: NormalizedCorpus) -> list[Placement]:
    """Place every corpus track on its BMU (batch, vectorized)."""
    if not grid.trained:
        raise InvalidConfig("grid is not trained")
    flat = grid.codebook.reshape(-1, grid.dim)
    z = corpus.feature_matrix
    d2 = ((z[:, None, :] - flat[None, :, :]) ** 2).sum(axis=2)
    best = d2.argmin(axis=1)
    errors = np.sqrt(d2[np.arange(z.shape[0]), best])
    width = grid.config.width
    return [
        Placement(track_id=r.track_id,
                  unit_x=int(b % width), unit_y=int(b // width),
                  quantization_error=float(e))
        for r, b, e in zip(corpus.records, best, errors)
    ]


def u_matrix(grid: SomGrid) -> np.ndarray:
    """Mean distance from each unit's vector to its 4-neighborhood."""
    if not grid.trained:
        raise InvalidConfig("grid is not trained")
    cb = grid.codebook
    h, w, _ = cb.shape
    total = np.zeros((h, w))
    count = np.zeros((h, w))
    # vertical neighbor distances
    dv = np.sqrt(((cb[1:, :, :] - cb[:-1, :, :]) ** 2).sum(axis=2))
    total[1:, :] += dv
    total[:-1, :] += dv
    count[1:, :] += 1
    count[:-1, :] += 1
    # horizontal neighbor distances
    dh = np.sqrt(((cb[:, 1:, :] - cb[:, :-1, :]) ** 2).sum(axis=2))
    total[:, 1:] += dh
    total[:, :-1] += dh
    count[:, 1:] += 1
    count[:, :-1] += 1
    return total / count


def component_planes(grid: SomGrid) -> list[np.ndarray]:
    """One (height, width) plane per feature dimension of the codebook."""
    if not grid.trained:
        raise InvalidConfig("grid is not trained")
    return [np.array(grid.codebook[:, :, k]) for k in range(grid.dim)]


def group_location_variance(placements: list[Placement],
                            labels: dict[str, tuple[str, int]],
                            ) -> dict[str, dict[int, tuple[float, float]]]:
    """Population variance of BMU coordinates per (nation, year) cell.

    Returns {nation: {year: (variance_x, variance_y)}}; cells with fewer
    than two tracks are omitted with a warning.
    """
    cells: dict[tuple[str, int], list[tuple[int, int]]] = {}
    for p in placements:
        nation, year = labels[p.track_id]
        cells.setdefault((nation, int(year)), []).append((p.unit_x, p.unit_y))
    out: dict[str, dict[int, tuple[float, float]]] = {}
    for (nation, year) in sorted(cells):
        coords = cells[(nation, year)]
        if len(coords) < 2:
            warnings.warn(f"cell ({nation}, {year}) has {len(coords)} track(s); omitted",
                          SparseCellWarning, stacklevel=2)
            continue
        arr = np.array(coords, dtype=float)
        var_x, var_y = arr.var(axis=0)  # population convention
        out.setdefault(nation, {})[year] = (float(var_x), float(var_y))
    return out


def _mean_pairwise(coords: np.ndarray) -> float:
    n = coords.shape[0]
    d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    iu = np.triu_indices(n, k=1)
    return float(np.sqrt(d2[iu]).mean())


def _mean_cross(a: np.ndarray, b: np.ndarray) -> float:
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    return float(np.sqrt(d2).mean())


def group_distances(placements: list[Placement],
                    labels: dict[str, tuple[str, int]],
                    ) -> dict[int, dict[str, float]]:
    """Mean pairwise grid distances per year: within G, within U, between.

    Exact O(n^2) computation; corpus-scale cells are small enough that no
    sampling is needed.  Undefined entries (fewer than 2 tracks within a
    nation, or an empty side for the between series) are omitted.
    """
    per_year: dict[int, dict[str, list[tuple[int, int]]]] = {}
    for p in placements:
        nation, year = labels[p.track_id]
        per_year.setdefault(int(year), {}).setdefault(nation, []).append(
            (p.unit_x, p.unit_y))
    out: dict[int, dict[str, float]] = {}
    for year in sorted(per_year):
        groups = per_year[year]
        entry: dict[str, float] = {}
        for nation in NATIONS:
            coords = groups.get(nation, [])
            if len(coords) >= 2:
                entry[f"within_{nation}"] = _mean_pairwise(np.array(coords, dtype=float))
            else:
                warnings.warn(f"year {year}: nation {nation} has {len(coords)} track(s)",
                              SparseCellWarning, stacklevel=2)
        g = groups.get("G", [])
        u = groups.get("U", [])
        if g and u:
            entry["between"] = _mean_cross(np.array(g, dtype=float),
                                           np.array(u, dtype=float))
        if entry:
            out[year] = entry
    return out


# ---------------------------------------------------------------------------
# serialization


def grid_to_json(grid: SomGrid) -> dict:
    return {
        "config": asdict(grid.config),
        "width": grid.config.width,
        "height": grid.config.height,
        "dim": grid.dim,
        "codebook": [[float(v) for v in unit]
                     for unit in grid.codebook.reshape(-1, grid.dim)],
        "trained": grid.trained,
    }


def grid_from_json(payload: dict) -> SomGrid:
    config = SomConfig(**payload["config"])
    h, w, dim = payload["height"], payload["width"], payload["dim"]
    codebook = np.array(payload["codebook"], dtype=float).reshape(h, w, dim)
    return SomGrid(config=config, codebook=codebook,
                   trained=bool(payload.get("trained", True)))


def save_grid(grid: SomGrid, path: str | Path) -> None:
    Path(path).write_text(json.dumps(grid_to_json(grid), indent=2) + "\n",
                          encoding="utf-8")


def load_grid(path: str | Path) -> SomGrid:
    return grid_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
