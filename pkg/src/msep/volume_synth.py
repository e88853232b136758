"""Synthetic binary and gray volumes of filaments and foam cells.

Arrays are indexed [z, y, x] so that ravel() yields node ids with x fastest.
Binary label 1 marks separator voxels (void or membrane).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import PreconditionError

__all__ = [
    "BinaryVolume",
    "DistanceField",
    "GrayVolume",
    "NoiseParams",
    "DIST_SENTINEL",
    "weight",
    "catmull_rom",
    "synth_filaments",
    "synth_cells",
    "gray_from_distance",
    "synth_volume",
    "default_n_splines",
    "default_n_seeds",
]

DIST_SENTINEL = 1e30


@dataclass
class BinaryVolume:
    labels: np.ndarray  # uint8, shape (nz, ny, nx)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.labels.shape
        return nx, ny, nz

    def truth_mask(self) -> np.ndarray:
        return self.labels.ravel() == 1


@dataclass
class DistanceField:
    d: np.ndarray  # float64, shape (nz, ny, nx)


@dataclass
class GrayVolume:
    gray: np.ndarray  # float64 in [0, 1], shape (nz, ny, nx)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.gray.shape
        return nx, ny, nz


@dataclass(frozen=True)
class NoiseParams:
    mu1: float
    sigma1: float
    mu2: float
    sigma2: float
    r: float
    w_max: float = 0.9

    @classmethod
    def interpolate(cls, start: tuple, end: tuple, t: float, r: float, w_max: float = 0.9) -> "NoiseParams":
        """Linear blend (1-t)*start + t*end of (mu1, sigma1, mu2, sigma2)."""
        if not 0.0 <= t <= 1.0:
            raise PreconditionError("noise level t must lie in [0, 1]")
        vals = [(1 - t) * a + t * b for a, b in zip(start, end)]
        return cls(*vals, r=r, w_max=w_max)

    @classmethod
    def filaments(cls, t: float, m: int = 64) -> "NoiseParams":
        return cls.interpolate((0.3, 0.05, 0.7, 0.05), (0.38, 0.1, 0.62, 0.1), t, r=0.75 / m)

    @classmethod
    def cells(cls, t: float) -> "NoiseParams":
        return cls.interpolate((0.7, 0.05, 0.3, 0.05), (0.55, 0.1, 0.45, 0.1), t, r=0.75)


def weight(d, r: float, w_max: float = 0.9):
    """Mixing weight 1 / (1 + (w_max/(1-w_max))^(d/r - 1)); w(0)=w_max, w(r)=1/2."""
    if r <= 0:
        raise PreconditionError("r must be positive")
    if not 0.5 < w_max < 1:
        raise PreconditionError("w_max must lie in (1/2, 1)")
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0):
        raise PreconditionError("distances must be nonnegative")
    expo = np.clip((d / r - 1.0) * math.log(w_max / (1.0 - w_max)), -700.0, 700.0)
    out = 1.0 / (1.0 + np.exp(expo))
    return float(out) if out.ndim == 0 else out


def default_n_splines(m: int) -> int:
    return max(1, m // 8)


def default_n_seeds(m: int) -> int:
    return max(2, round(m**3 / 8192))


def catmull_rom(ctrl: np.ndarray, step: float) -> np.ndarray:
    """Polyline through the control points of a uniform Catmull-Rom spline.

    End tangents use reflected phantom points. Consecutive samples are at
    most `step` apart.
    """
    P = np.asarray(ctrl, dtype=np.float64)
    P = np.vstack([2 * P[0] - P[1], P, 2 * P[-1] - P[-2]])
    pieces = []
    for i in range(1, len(P) - 2):
        p0, p1, p2, p3 = P[i - 1], P[i], P[i + 1], P[i + 2]
        a = 2 * p1
        b = p2 - p0
        c = 2 * p0 - 5 * p1 + 4 * p2 - p3
        d = -p0 + 3 * p1 - 3 * p2 + p3

        def seg(s):
            s = s[:, None]
            return 0.5 * (a + b * s + c * s**2 + d * s**3)

        coarse = seg(np.linspace(0, 1, 33))
        length = np.linalg.norm(np.diff(coarse, axis=0), axis=1).sum()
        k = max(2, int(math.ceil(length / step)) + 1)
        pts = seg(np.linspace(0, 1, k))
        gap = np.linalg.norm(np.diff(pts, axis=0), axis=1).max()
        while gap > step:
            k = int(math.ceil(k * gap / step)) + 1
            pts = seg(np.linspace(0, 1, k))
            gap = np.linalg.norm(np.diff(pts, axis=0), axis=1).max()
        pieces.append(pts if not pieces else pts[1:])
    return np.vstack(pieces)


def _random_spline(rng: np.random.Generator) -> np.ndarray:
    axis = int(rng.integers(3))
    lo, hi = -0.2, 1.2
    p0 = rng.uniform(lo, hi, 3)
    p3 = rng.uniform(lo, hi, 3)
    if rng.random() < 0.5:
        p0[axis], p3[axis] = lo, hi
    else:
        p0[axis], p3[axis] = hi, lo
    inner = rng.uniform(0.0, 1.0, (2, 3))
    return np.vstack([p0, inner, p3])


def _voxel_centers(m: int) -> np.ndarray:
    c = (np.arange(m) + 0.5) / m
    z, y, x = np.meshgrid(c, c, c, indexing="ij")
    return np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)


def _polyline_distance(points: np.ndarray, lines: list[np.ndarray]) -> np.ndarray:
    """Distance from each point to the nearest polyline (exact per segment near the nearest sample)."""
    samples = np.vstack(lines)
    owner_start = np.concatenate([[0], np.cumsum([len(l) for l in lines])[:-1]])
    owner_end = owner_start + np.array([len(l) for l in lines]) - 1
    line_id = np.repeat(np.arange(len(lines)), [len(l) for l in lines])
    tree = cKDTree(samples)
    d0, j = tree.query(points)
    best = d0.copy()
    lid = line_id[j]
    for shift in (-1, 0):
        a = j + shift
        b = a + 1
        ok = (a >= owner_start[lid]) & (b <= owner_end[lid])
        A = samples[np.where(ok, a, j)]
        B = samples[np.where(ok, b, j)]
        AB = B - A
        L2 = (AB * AB).sum(axis=1)
        t = np.where(L2 > 0, ((points - A) * AB).sum(axis=1) / np.where(L2 > 0, L2, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        proj = A + AB * t[:, None]
        d = np.linalg.norm(points - proj, axis=1)
        best = np.where(ok, np.minimum(best, d), best)
    return best


def _inside_cube(pts: np.ndarray) -> np.ndarray:
    return np.all((pts >= 0.0) & (pts <= 1.0), axis=1)


def synth_filaments(
    m: int = 64,
    n_splines: int | None = None,
    d_min: float | None = None,
    r: float | None = None,
    seed: int = 0,
    max_tries: int = 10000,
    splines: list | None = None,
) -> tuple[BinaryVolume, DistanceField]:
    """Random splines crossing the unit cube; voxels within r of a spline are structure (label 0).

    Distances are in unit-cube units; voxel (x, y, z) sits at ((x+1/2)/m, ...).
    Pass `splines` (list of control-point arrays) to skip random sampling.
    """
    if m < 1:
        raise PreconditionError("m must be positive")
    d_min = 10.0 / m if d_min is None else d_min
    r = 0.75 / m if r is None else r
    step = r / 4
    lines: list[np.ndarray] = []
    if splines is not None:
        lines = [catmull_rom(np.asarray(c), step) for c in splines]
    else:
        n = default_n_splines(m) if n_splines is None else n_splines
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        kept: list[np.ndarray] = []  # in-cube samples of accepted splines
        tree = None
        tries = 0
        while len(lines) < n:
            tries += 1
            if tries > max_tries:
                raise PreconditionError(
                    f"rejection budget of {max_tries} exhausted after {len(lines)} of {n} splines"
                )
            poly = catmull_rom(_random_spline(rng), step)
            inside = poly[_inside_cube(poly)]
            if len(inside) == 0:
                continue
            if tree is not None:
                dist, _ = tree.query(inside, distance_upper_bound=d_min)
                if dist.min() < d_min:
                    continue
            lines.append(poly)
            kept.append(inside)
            tree = cKDTree(np.vstack(kept))
    if lines:
        d = _polyline_distance(_voxel_centers(m), lines).reshape(m, m, m)
    else:
        d = np.full((m, m, m), DIST_SENTINEL)
    labels = np.where(d <= r, 0, 1).astype(np.uint8)
    vol = BinaryVolume(labels)
    vol.polylines = lines  # kept for verification of the spacing constraint
    return vol, DistanceField(d)


_OFFS6 = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


def _neighbor_table(m: int) -> list[list[int]]:
    from .graph_core import grid3

    return grid3(m, m, m).adjacency_lists()


def synth_cells(
    m: int = 64,
    n_seeds: int | None = None,
    d_min: float = 8.0,
    r: float = 0.75,
    seed: int = 0,
    max_tries: int = 100000,
) -> tuple[BinaryVolume, DistanceField]:
    """Foam cells from randomized region growing, erosion and deterministic regrowth.

    Distances are in voxel units and measure the distance to the nearest
    voxel that is unlabeled after the regrowth step.
    """
    n = default_n_seeds(m) if n_seeds is None else n_seeds
    N = m**3
    if n > N:
        raise PreconditionError("more seeds than voxels")
    adj = _neighbor_table(m)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    lab = [0] * N

    # (1) pairwise non-adjacent seeds
    placed = 0
    tries = 0
    while placed < n:
        tries += 1
        if tries > max_tries:
            raise PreconditionError(f"could only place {placed} of {n} non-adjacent seeds")
        v = int(rng.integers(N))
        if lab[v] or any(lab[w] for w in adj[v]):
            continue
        placed += 1
        lab[v] = placed

    # (2) randomized growth over voxels whose labeled neighbors carry one unique label
    state = [0] * N  # 0 unknown, 1 eligible, 2 blocked (two labels) or labeled
    pos = [-1] * N
    pool: list[int] = []

    def refresh(w: int) -> None:
        if lab[w]:
            return
        seen = 0
        for y in adj[w]:
            l = lab[y]
            if l:
                if seen and l != seen:
                    seen = -1
                    break
                seen = l
        if seen == -1:
            if pos[w] >= 0:
                _remove(w)
            state[w] = 2
        elif seen and pos[w] < 0:
            pos[w] = len(pool)
            pool.append(w)

    def _remove(w: int) -> None:
        i = pos[w]
        last = pool.pop()
        if last != w:
            pool[i] = last
            pos[last] = i
        pos[w] = -1

    for v in range(N):
        if lab[v]:
            for w in adj[v]:
                refresh(w)
    batch = np.empty(0)
    bi = 0
    while pool:
        if bi >= len(batch):
            batch = rng.random(4096)
            bi = 0
        i = int(batch[bi] * len(pool))
        bi += 1
        v = pool[i]
        uniq = 0
        for y in adj[v]:
            if lab[y]:
                uniq = lab[y]
                break
        _remove(v)
        lab[v] = uniq
        for w in adj[v]:
            if not lab[w] and state[w] != 2:
                refresh(w)

    arr = np.array(lab, dtype=np.int64).reshape(m, m, m)

    # (3) spherical erosion, then keep one largest component per label
    rho = d_min / 2 + r
    if (arr == 0).any():
        dist0 = ndimage.distance_transform_edt(arr != 0)
        arr[dist0 <= rho] = 0
    struct = ndimage.generate_binary_structure(3, 1)
    for i, sl in enumerate(ndimage.find_objects(arr), start=1):
        if sl is None:
            continue
        sub = arr[sl]
        comp, k = ndimage.label(sub == i, structure=struct)
        if k > 1:
            sizes = np.bincount(comp.ravel())[1:]
            keep = int(np.argmax(sizes)) + 1  # first maximal component in scan order
            sub[(comp != keep) & (comp > 0)] = 0

    # (4) FIFO regrowth from every labeled voxel in id order
    lab = arr.ravel().tolist()
    q = deque(v for v in range(N) if lab[v])
    while q:
        x = q.popleft()
        for w in adj[x]:
            if lab[w]:
                continue
            uniq = 0
            for y in adj[w]:
                l = lab[y]
                if l:
                    if uniq and l != uniq:
                        uniq = -1
                        break
                    uniq = l
            if uniq > 0:
                lab[w] = uniq
                q.append(w)
    arr = np.array(lab, dtype=np.int64).reshape(m, m, m)

    # distance to the membrane left after regrowth
    if (arr == 0).any():
        d = ndimage.distance_transform_edt(arr != 0)
    else:
        d = np.full(arr.shape, DIST_SENTINEL)

    # (5) dilate the membrane by r, (6) binarize
    arr[d <= r] = 0
    labels = (arr == 0).astype(np.uint8)
    vol = BinaryVolume(labels)
    vol.cell_labels = arr
    return vol, DistanceField(np.asarray(d, dtype=np.float64))


def gray_from_distance(df: DistanceField, params: NoiseParams, seed: int = 0) -> GrayVolume:
    """g = w(d) g1 + (1 - w(d)) g2 with independent normal g1, g2 per voxel, clipped to [0, 1]."""
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])
    shape = df.d.shape
    g1 = params.mu1 + params.sigma1 * rng.standard_normal(shape)
    g2 = params.mu2 + params.sigma2 * rng.standard_normal(shape)
    w = weight(df.d, params.r, params.w_max)
    return GrayVolume(np.clip(w * g1 + (1.0 - w) * g2, 0.0, 1.0))


def synth_volume(kind: str, m: int, t: float, seed: int) -> tuple[BinaryVolume, GrayVolume]:
    """Truth and gray volume for `kind` in {"filaments", "cells"} with the default generator settings."""
    if not 0.0 <= t <= 1.0:
        raise PreconditionError("noise level t must lie in [0, 1]")
    if kind == "filaments":
        vol, df = synth_filaments(m, seed=seed)
        params = NoiseParams.filaments(t, m)
    elif kind == "cells":
        vol, df = synth_cells(m, seed=seed)
        params = NoiseParams.cells(t)
    else:
        raise PreconditionError(f"unknown volume kind {kind!r}")
    return vol, gray_from_distance(df, params, seed)
