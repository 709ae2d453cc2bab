"""Zero level-set extraction by marching squares.

Crossing points are placed on cell-centre lattice edges by linear interpolation. Each lattice
cell contributes up to two segments; segments are stitched through their shared edge ids into
closed polygons. Saddle cells are split according to the sign of the cell-centre average.
"""

import logging

import numpy as np

from firefilter.utils.models import FrontContour, LevelSetField

logger = logging.getLogger(__name__)

# local edges of a lattice cell
_BOTTOM, _RIGHT, _TOP, _LEFT = range(4)

_PAIRS = [(a, b) for a in range(4) for b in range(a + 1, 4)]


def _edge_points(values: np.ndarray, origin: tuple[float, float], dx: float, dy: float) -> np.ndarray:
    """(n_edges, 2) crossing positions for every lattice edge (NaN where no crossing)."""
    ny, nx = values.shape
    x0, y0 = origin
    inside = values < 0

    a, b = values[:, :-1], values[:, 1:]
    crosses = inside[:, :-1] != inside[:, 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(crosses, a / (a - b), np.nan)
    jj, ii = np.meshgrid(np.arange(nx - 1), np.arange(ny))
    horizontal = np.stack([x0 + (jj + t) * dx, np.where(crosses, y0 + ii * dy, np.nan)], axis=-1)

    a, b = values[:-1, :], values[1:, :]
    crosses = inside[:-1, :] != inside[1:, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(crosses, a / (a - b), np.nan)
    jj, ii = np.meshgrid(np.arange(nx), np.arange(ny - 1))
    vertical = np.stack([np.where(crosses, x0 + jj * dx, np.nan), y0 + (ii + t) * dy], axis=-1)

    return np.concatenate([horizontal.reshape(-1, 2), vertical.reshape(-1, 2)])


def _cell_segments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Edge-id pairs (a, b) of every contour segment, in row-major cell order."""
    ny, nx = values.shape
    n_horizontal = ny * (nx - 1)
    inside = values < 0
    b00, b01 = inside[:-1, :-1], inside[:-1, 1:]
    b10, b11 = inside[1:, :-1], inside[1:, 1:]

    ii, jj = np.meshgrid(np.arange(ny - 1), np.arange(nx - 1), indexing="ij")
    edge_ids = np.stack(
        [
            ii * (nx - 1) + jj,  # bottom
            n_horizontal + ii * nx + jj + 1,  # right
            (ii + 1) * (nx - 1) + jj,  # top
            n_horizontal + ii * nx + jj,  # left
        ]
    )
    flags = np.stack([b00 != b01, b01 != b11, b10 != b11, b00 != b10])
    saddle = (b00 == b11) & (b01 == b10) & (b00 != b01)

    # per cell up to two segments; keep the cell index so the output order is row-major
    cells, seg_a, seg_b = [], [], []
    n_flags = flags.sum(axis=0)
    for a, b in _PAIRS:
        mask = (n_flags == 2) & flags[a] & flags[b]
        cells.append(np.flatnonzero(mask))
        seg_a.append(edge_ids[a][mask])
        seg_b.append(edge_ids[b][mask])

    center_inside = (values[:-1, :-1] + values[:-1, 1:] + values[1:, :-1] + values[1:, 1:]) / 4.0 < 0
    # diagonal 00/11 burned with a burned centre, or 01/10 burned with an unburned centre:
    # cut off corners 01 and 10
    cut_01_10 = saddle & (b00 == center_inside)
    cut_00_11 = saddle & ~(b00 == center_inside)
    saddle_cuts = ((cut_01_10, ((_BOTTOM, _RIGHT), (_LEFT, _TOP))), (cut_00_11, ((_BOTTOM, _LEFT), (_RIGHT, _TOP))))
    for mask, pairs in saddle_cuts:
        for a, b in pairs:
            cells.append(np.flatnonzero(mask))
            seg_a.append(edge_ids[a][mask])
            seg_b.append(edge_ids[b][mask])

    order = np.argsort(np.concatenate(cells), kind="stable")
    return np.concatenate(seg_a)[order], np.concatenate(seg_b)[order]


def _stitch(seg_a: np.ndarray, seg_b: np.ndarray) -> list[list[int]]:
    """Chains of edge ids; closed chains do not repeat their first id."""
    incident: dict[int, list[int]] = {}
    for k, (a, b) in enumerate(zip(seg_a.tolist(), seg_b.tolist())):
        incident.setdefault(a, []).append(k)
        incident.setdefault(b, []).append(k)

    used = np.zeros(len(seg_a), dtype=bool)
    ends = (seg_a.tolist(), seg_b.tolist())

    def walk(segment: int, edge: int) -> list[int]:
        path = []
        while True:
            used[segment] = True
            nxt = ends[1][segment] if ends[0][segment] == edge else ends[0][segment]
            path.append(nxt)
            candidates = [s for s in incident[nxt] if not used[s]]
            if not candidates:
                return path
            segment, edge = candidates[0], nxt

    chains = []
    for start in range(len(seg_a)):
        if used[start]:
            continue
        first = ends[0][start]
        forward = walk(start, first)
        if forward[-1] == first:
            chains.append([first] + forward[:-1])
            continue
        # open chain: it ran into the grid border, extend from the other end
        backward = []
        others = [s for s in incident[first] if not used[s]]
        if others:
            backward = walk(others[0], first)
        chains.append(backward[::-1] + [first] + forward)
    return chains


def extract_contour(phi: LevelSetField) -> FrontContour:
    """All zero-crossing polygons of ``phi``; empty when phi has a uniform sign."""
    values = phi.values
    inside = values < 0
    if inside.all() or not inside.any():
        return FrontContour((), phi.time)

    grid = phi.grid
    points = _edge_points(values, grid.origin, grid.dx, grid.dy)
    seg_a, seg_b = _cell_segments(values)

    polygons = []
    for chain in _stitch(seg_a, seg_b):
        vertices = points[chain]
        keep = np.ones(len(vertices), dtype=bool)
        keep[1:] = np.any(vertices[1:] != vertices[:-1], axis=1)
        vertices = vertices[keep]
        if len(vertices) > 1 and np.all(vertices[0] == vertices[-1]):
            vertices = vertices[:-1]
        if len(vertices) >= 3:
            polygons.append(vertices)

    logger.debug(f"Extracted {len(polygons)} front polygon(s) at t={phi.time:.3f} s")
    return FrontContour(tuple(polygons), phi.time)
