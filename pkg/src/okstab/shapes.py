"""Parametric set configurations on the torus and their measurements.

Lamellae (k equally spaced strips), droplets, and normal-graph perturbations
of a lamella; rasterization to +-1 indicator fields, exact and grid-based
perimeters, the translation-modded asymmetry index alpha, boundary meshes in
T^2, and the closed-form piecewise-quadratic lamella potential.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOLERANCES
from .torus import (ScalarField, TorusGrid, ValidationError, make_grid)


# ---------------------------------------------------------------------------
# shape configurations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lamella:
    """k equally spaced strips along `axis`, volume parameter m in (-1, 1).

    Strip i occupies [ (i-1)/k, (i-1)/k + a/k ] along the axis, a = (m+1)/2.
    """
    k: int
    m: float
    axis: int = -1
    dim: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("strip count k must be >= 1")
        if not -1.0 < self.m < 1.0:
            raise ValidationError("m must lie in (-1, 1)")
        a = self.a
        if a <= 0.0 or a >= 1.0:
            raise ValidationError("degenerate strip width")
        object.__setattr__(self, "axis", self.axis % self.dim)

    @property
    def a(self) -> float:
        return 0.5 * (self.m + 1.0)

    def interfaces(self):
        """Sorted interface positions and outward-normal signs along the axis.

        Sign -1 marks a strip bottom (outer normal points down the axis),
        +1 a strip top.
        """
        a = self.a
        pos, sgn = [], []
        for i in range(self.k):
            pos.append(i / self.k)
            sgn.append(-1.0)
            pos.append(i / self.k + a / self.k)
            sgn.append(1.0)
        return np.array(pos), np.array(sgn)

    @property
    def interface_gap(self) -> float:
        return min(self.a, 1.0 - self.a) / self.k


@dataclass(frozen=True)
class Droplet:
    """Ball of radius r < 1/2 around `center` (periodic distance)."""
    center: tuple
    radius: float
    dim: int = 2

    def __post_init__(self):
        if not 0.0 < self.radius < 0.5:
            raise ValidationError("droplet radius must lie in (0, 1/2)")
        if len(self.center) != self.dim:
            raise ValidationError("center dimension mismatch")


@dataclass(frozen=True)
class DropletSet:
    """Pairwise disjoint droplets."""
    droplets: tuple

    def __post_init__(self):
        ds = self.droplets
        if not ds:
            raise ValidationError("empty droplet list")
        dim = ds[0].dim
        for d in ds:
            if d.dim != dim:
                raise ValidationError("mixed droplet dimensions")
        for i in range(len(ds)):
            for j in range(i + 1, len(ds)):
                dc = _torus_dist(np.array(ds[i].center), np.array(ds[j].center))
                if dc <= ds[i].radius + ds[j].radius:
                    raise ValidationError("droplets overlap")

    @property
    def dim(self):
        return self.droplets[0].dim


@dataclass(frozen=True)
class GraphPerturbation:
    """Lamella with per-interface height functions psi on the lateral circle.

    psi: array (2k, n) of heights sampled at lateral nodes j/n; interface j
    moves from s_j to s_j + psi_j(x).  Heights must keep the interfaces
    ordered: max|psi| < 0.45 * interface gap.
    """
    base: Lamella
    psi: np.ndarray = field(repr=False)

    def __post_init__(self):
        psi = np.atleast_2d(np.asarray(self.psi, dtype=float))
        object.__setattr__(self, "psi", psi)
        if self.base.dim != 2:
            raise ValidationError("graph perturbations are 2D only")
        if psi.shape[0] != 2 * self.base.k:
            raise ValidationError("psi needs one row per interface (2k rows)")
        guard = TOLERANCES.graph_collision_factor * self.base.interface_gap
        if np.abs(psi).max() >= guard:
            raise ValidationError(
                f"perturbation too large: max|psi|={np.abs(psi).max():.3g} >= {guard:.3g}")

    @property
    def dim(self):
        return 2

    def heights(self, n: int) -> np.ndarray:
        """Interface heights (2k, n) resampled to n lateral nodes."""
        pos, _ = self.base.interfaces()
        return pos[:, None] + resample_periodic(self.psi, n)


ShapeConfig = Lamella | Droplet | DropletSet | GraphPerturbation


def lamella(k: int, m: float, axis: int = -1, dim: int = 2) -> Lamella:
    return Lamella(k=k, m=m, axis=axis, dim=dim)


def _torus_dist(x, y):
    d = np.abs(np.asarray(x) - np.asarray(y)) % 1.0
    d = np.minimum(d, 1.0 - d)
    return float(np.sqrt(np.sum(d * d)))


def resample_periodic(rows: np.ndarray, n: int) -> np.ndarray:
    """Trigonometric resampling of periodic rows (node samples at j/n)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n0 = rows.shape[1]
    if n == n0:
        return rows.copy()
    spec = np.fft.rfft(rows, axis=1)
    out = np.fft.irfft(spec, n=n, axis=1) * (n / n0)
    return out


def periodic_derivative(rows: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic node-sampled rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[1]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    spec = np.fft.rfft(rows, axis=1) * (2j * np.pi * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        spec[:, -1] = 0.0  # Nyquist mode has no odd derivative
    return np.fft.irfft(spec, n=n, axis=1)


# ---------------------------------------------------------------------------
# rasterization and volume
# ---------------------------------------------------------------------------

def rasterize(shape: ShapeConfig, grid: TorusGrid) -> ScalarField:
    """Cell-center sampling of chi_E - chi_{E^c} (values exactly +-1)."""
    if shape_dim(shape) != grid.dim:
        raise ValidationError("shape/grid dimension mismatch")
    if isinstance(shape, Lamella):
        z = (grid.axis_coords(shape.axis) * shape.k) % 1.0
        inside1d = z < shape.a
        shp = [1] * grid.dim
        shp[shape.axis] = grid.sizes[shape.axis]
        inside = np.broadcast_to(inside1d.reshape(shp), grid.sizes)
    elif isinstance(shape, Droplet):
        inside = _droplet_mask(shape, grid)
    elif isinstance(shape, DropletSet):
        inside = np.zeros(grid.sizes, dtype=bool)
        for d in shape.droplets:
            inside |= _droplet_mask(d, grid)
    elif isinstance(shape, GraphPerturbation):
        inside = _graph_mask(shape, grid)
    else:
        raise ValidationError(f"unknown shape {type(shape)}")
    return ScalarField(grid, np.where(inside, 1.0, -1.0))


def _droplet_mask(d: Droplet, grid: TorusGrid):
    coords = grid.coords()
    dist2 = np.zeros(grid.sizes)
    for c, x0 in zip(coords, d.center):
        dd = np.abs(c - x0) % 1.0
        dd = np.minimum(dd, 1.0 - dd)
        dist2 += dd * dd
    return dist2 <= d.radius**2


def _graph_mask(gp: GraphPerturbation, grid: TorusGrid):
    base = gp.base
    ax = base.axis
    lat = 1 - ax  # lateral axis in 2D
    n_lat = grid.sizes[lat]
    # heights at the lateral cell centers (offset by half a cell from nodes)
    pos, _ = base.interfaces()
    xc = grid.axis_coords(lat)
    hts = pos[:, None] + _eval_periodic_rows(gp.psi, xc)
    z = grid.axis_coords(ax)
    inside = np.zeros((n_lat, grid.sizes[ax]), dtype=bool)
    for i in range(base.k):
        b = hts[2 * i][:, None]
        t = hts[2 * i + 1][:, None]
        zz = (z[None, :] - b) % 1.0
        inside |= zz < ((t - b) % 1.0)
    if ax == 1:
        return inside
    return inside.T


def _eval_periodic_rows(rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the trig interpolant of node-sampled rows at points x."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n = rows.shape[1]
    spec = np.fft.fft(rows, axis=1) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        spec[:, n // 2] *= 0.5
        e = np.exp(2j * np.pi * np.outer(x, k))
        extra = spec[:, n // 2][:, None] * np.exp(-2j * np.pi * (n // 2) * x)[None, :]
        return np.real(spec @ e.T + extra)
    e = np.exp(2j * np.pi * np.outer(x, k))
    return np.real(spec @ e.T)


def shape_dim(shape: ShapeConfig) -> int:
    return shape.dim


def volume_fraction(u: ScalarField) -> float:
    """Grid mean of u (the parameter m of the configuration)."""
    return u.mean()


# ---------------------------------------------------------------------------
# perimeters
# ---------------------------------------------------------------------------

def perimeter_exact(shape: ShapeConfig, n_quad: int = 2048) -> float:
    """Exact (or spectrally converged) perimeter of a parametric shape."""
    if isinstance(shape, Lamella):
        return 2.0 * shape.k
    if isinstance(shape, Droplet):
        if shape.dim == 2:
            return 2.0 * np.pi * shape.radius
        return 4.0 * np.pi * shape.radius**2
    if isinstance(shape, DropletSet):
        return sum(perimeter_exact(d) for d in shape.droplets)
    if isinstance(shape, GraphPerturbation):
        dpsi = periodic_derivative(resample_periodic(shape.psi, n_quad))
        return float(np.mean(np.sqrt(1.0 + dpsi**2), axis=1).sum())
    raise ValidationError(f"unknown shape {type(shape)}")


def perimeter_grid(u: ScalarField, smooth_sigma_cells: float = 2.0) -> float:
    """Contour length of the zero level set of a +-1 indicator field.

    The field is mollified by a narrow periodic Gaussian (a couple of cells wide)
    so that linear interpolation locates sub-cell crossings; marching squares
    with saddle disambiguation then accumulates segment lengths.  Second-order
    accurate on smooth interfaces.
    """
    if u.grid.dim != 2:
        raise ValidationError("grid perimeter implemented for T^2 only")
    vals = u.values
    if np.all(vals > 0) or np.all(vals < 0):
        return 0.0
    f = _gaussian_smooth(u, smooth_sigma_cells)
    return _marching_squares_length(f, u.grid)


def _gaussian_smooth(u: ScalarField, sigma_cells: float) -> np.ndarray:
    sig = sigma_cells * max(u.grid.spacing)
    fh = np.fft.fftn(u.values)
    fh *= np.exp(-2.0 * np.pi**2 * sig**2 * u.grid.ksq())
    return np.fft.ifftn(fh).real


def _marching_squares_length(f: np.ndarray, grid: TorusGrid) -> float:
    h0, h1 = grid.spacing
    v00 = f
    v10 = np.roll(f, -1, axis=0)
    v01 = np.roll(f, -1, axis=1)
    v11 = np.roll(np.roll(f, -1, axis=0), -1, axis=1)
    b00 = v00 >= 0
    b10 = v10 >= 0
    b11 = v11 >= 0
    b01 = v01 >= 0
    code = (b00.astype(int) + 2 * b10.astype(int)
            + 4 * b11.astype(int) + 8 * b01.astype(int))

    def _t(a, b):
        d = a - b
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(d) > 0, a / np.where(d == 0, 1.0, d), 0.5)
        return np.clip(t, 0.0, 1.0)

    # local crossing coordinates on the four edges of each lattice square
    S = np.stack([_t(v00, v10) * h0, np.zeros_like(f)], axis=-1)
    E = np.stack([np.full_like(f, h0), _t(v10, v11) * h1], axis=-1)
    N = np.stack([_t(v01, v11) * h0, np.full_like(f, h1)], axis=-1)
    W = np.stack([np.zeros_like(f), _t(v00, v01) * h1], axis=-1)
    edges = {"S": S, "E": E, "N": N, "W": W}

    simple = {1: ("W", "S"), 2: ("S", "E"), 3: ("W", "E"), 4: ("E", "N"),
              6: ("S", "N"), 7: ("W", "N"), 8: ("W", "N"), 9: ("S", "N"),
              11: ("E", "N"), 12: ("W", "E"), 13: ("S", "E"), 14: ("W", "S")}

    total = 0.0
    for c, (ea, eb) in simple.items():
        mask = code == c
        if not mask.any():
            continue
        seg = edges[ea][mask] - edges[eb][mask]
        total += float(np.sqrt((seg**2).sum(axis=1)).sum())

    for c in (5, 10):
        mask = code == c
        if not mask.any():
            continue
        center_in = (v00 + v10 + v11 + v01)[mask] >= 0
        if c == 5:
            # inside corners 00 and 11
            pair_in = (("S", "E"), ("W", "N"))    # center inside
            pair_out = (("W", "S"), ("E", "N"))   # center outside
        else:
            # inside corners 10 and 01
            pair_in = (("W", "S"), ("E", "N"))
            pair_out = (("S", "E"), ("W", "N"))
        for sel, pairs in ((center_in, pair_in), (~center_in, pair_out)):
            if not sel.any():
                continue
            for ea, eb in pairs:
                seg = edges[ea][mask][sel] - edges[eb][mask][sel]
                total += float(np.sqrt((seg**2).sum(axis=1)).sum())
    return total


# ---------------------------------------------------------------------------
# asymmetry index alpha
# ---------------------------------------------------------------------------

def alpha_distance(uE: ScalarField, uF: ScalarField):
    """min over grid translations x of |E triangle (x+F)|, with its argmin.

    Computed via FFT cross-correlation of the {0,1} indicators; counts are
    rounded back to integers, so the result is exact for +-1 fields.  Ties
    break toward the lexicographically smallest shift index.
    """
    if uE.grid != uF.grid:
        raise ValidationError("grid mismatch")
    E = (uE.values > 0).astype(float)
    F = (uF.values > 0).astype(float)
    cE = float(E.sum())
    cF = float(F.sum())
    corr = np.fft.ifftn(np.fft.fftn(E) * np.conj(np.fft.fftn(F))).real
    counts = np.rint(cE + cF - 2.0 * corr)
    best = counts.min()
    idx = np.argwhere(counts == best)
    shift_idx = tuple(int(i) for i in sorted(map(tuple, idx))[0])
    cellvol = uE.grid.cell_volume
    shift = tuple(i * s for i, s in zip(shift_idx, uE.grid.spacing))
    return float(best) * cellvol, shift


# ---------------------------------------------------------------------------
# boundary meshes in T^2
# ---------------------------------------------------------------------------

@dataclass
class BoundaryMesh:
    """Discretized closed boundary in T^2.

    points (n,2), outward unit normals, curvature samples (sum of principal
    curvatures, positive for a shrinking circle), arc-length quadrature
    weights, and the index ranges of the closed components.  `speeds` holds
    |x'(t)| per node with respect to the uniform component parameter.
    """
    points: np.ndarray
    normals: np.ndarray
    curvature: np.ndarray
    weights: np.ndarray
    components: list
    speeds: np.ndarray
    shape: ShapeConfig | None = None

    def __post_init__(self):
        norm = np.sqrt((self.normals**2).sum(axis=1))
        if np.abs(norm - 1.0).max() > TOLERANCES.normal_unit:
            raise ValidationError("normals are not unit vectors")

    @property
    def length(self) -> float:
        return float(self.weights.sum())


def boundary_mesh(shape: ShapeConfig, n_points: int = 256) -> BoundaryMesh:
    """Uniform-parameter sampling of each boundary component (n_points each)."""
    if n_points < 64:
        raise ValidationError("n_points must be >= 64")
    if shape_dim(shape) != 2:
        raise ValidationError("boundary meshes are 2D only")
    t = np.arange(n_points) / n_points
    pts, nrm, kap, wts, comps, spd = [], [], [], [], [], []

    def add_component(p, n, k, w, s):
        start = sum(len(c) for c in pts)
        pts.append(p)
        nrm.append(n)
        kap.append(k)
        wts.append(w)
        spd.append(s)
        comps.append((start, start + len(p)))

    if isinstance(shape, Lamella):
        pos, sgn = shape.interfaces()
        for s0, sg in zip(pos, sgn):
            p = np.stack([t, np.full_like(t, s0)], axis=1)
            if shape.axis == 0:
                p = p[:, ::-1]
            n = np.zeros((n_points, 2))
            n[:, shape.axis] = sg
            add_component(p, n, np.zeros(n_points),
                          np.full(n_points, 1.0 / n_points), np.ones(n_points))
    elif isinstance(shape, Droplet):
        th = 2.0 * np.pi * t
        r = shape.radius
        c = np.asarray(shape.center)
        p = np.stack([c[0] + r * np.cos(th), c[1] + r * np.sin(th)], axis=1) % 1.0
        n = np.stack([np.cos(th), np.sin(th)], axis=1)
        add_component(p, n, np.full(n_points, 1.0 / r),
                      np.full(n_points, 2.0 * np.pi * r / n_points),
                      np.full(n_points, 2.0 * np.pi * r))
    elif isinstance(shape, GraphPerturbation):
        base = shape.base
        pos, sgn = base.interfaces()
        psi = resample_periodic(shape.psi, n_points)
        dpsi = periodic_derivative(psi)
        d2psi = periodic_derivative(psi, order=2)
        for j, (s0, sg) in enumerate(zip(pos, sgn)):
            hts = s0 + psi[j]
            root = np.sqrt(1.0 + dpsi[j] ** 2)
            p = np.stack([t, hts % 1.0], axis=1)
            if base.axis == 0:
                p = p[:, ::-1]
            n = np.stack([-dpsi[j], np.ones(n_points)], axis=1) * (sg / root)[:, None]
            if base.axis == 0:
                n = n[:, ::-1]
            # H = div_tau(nu); equals -sg * h'' / (1 + h'^2)^{3/2} for the
            # outward normal (checks out against +1/r on a circle)
            k = -sg * d2psi[j] / root**3
            add_component(p, n, k, root / n_points, root)
    else:
        raise ValidationError(f"no boundary mesh for {type(shape)}")

    mesh = BoundaryMesh(np.concatenate(pts), np.concatenate(nrm),
                        np.concatenate(kap), np.concatenate(wts),
                        comps, np.concatenate(spd), shape)
    if isinstance(shape, GraphPerturbation):
        _check_no_collision(shape)
    return mesh


def _check_no_collision(gp: GraphPerturbation):
    hts = gp.heights(max(256, gp.psi.shape[1]))
    diffs = (np.roll(hts, -1, axis=0) - hts) % 1.0
    if diffs.min() <= 0:
        raise ValidationError("perturbed interfaces collide")


# ---------------------------------------------------------------------------
# recentering (first translation step of the graph parametrization)
# ---------------------------------------------------------------------------

def recenter_translation(psi: np.ndarray, base: Lamella) -> np.ndarray:
    """First-step recentering shift for a graph perturbation of a lamella.

    For lamellae only the stack axis carries a nonzero translation
    functional; the shift equals the mean height averaged over interfaces.
    Subtracting it zeroes the boundary integral of (normal height) * nu.
    """
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    if psi.shape[0] != 2 * base.k:
        raise ValidationError("psi needs 2k rows")
    sigma = psi.mean()
    shift = np.zeros(base.dim)
    shift[base.axis] = sigma
    return shift


def translation_defect(psi: np.ndarray, base: Lamella) -> float:
    """|int (normal height) nu| along the stack axis, per unit interface."""
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    return abs(psi.mean(axis=1).sum())


# ---------------------------------------------------------------------------
# closed-form lamella potential (piecewise quadratic)
# ---------------------------------------------------------------------------

class LamellaPotential:
    """Exact potential of a lamella: v'' = -(u - m), periodic, mean zero.

    Built by piecewise integration; v is piecewise quadratic, v' piecewise
    linear and continuous.  Exposes pointwise values, the (constant) outward
    normal derivative at the interfaces, and the exact Dirichlet energy.
    """

    def __init__(self, shape: Lamella):
        self.shape = shape
        pos, sgn = shape.interfaces()
        order = np.argsort(pos)
        bpts = pos[order]
        self.breakpoints = np.append(bpts, bpts[0] + 1.0)
        # u on the interval following breakpoint j: +1 after a bottom (-1 sign)
        self.u_vals = np.where(sgn[order] < 0, 1.0, -1.0)
        m = shape.m
        f = self.u_vals - m
        # raw integration with v'(b0)=0, v(b0)=0
        nseg = len(f)
        widths = np.diff(self.breakpoints)
        vp = np.zeros(nseg + 1)
        vv = np.zeros(nseg + 1)
        for j in range(nseg):
            vp[j + 1] = vp[j] - f[j] * widths[j]
            vv[j + 1] = vv[j] + vp[j] * widths[j] - 0.5 * f[j] * widths[j] ** 2
        # add c*x so that v is periodic: v(b0+1) - v(b0) + c = 0
        c = -vv[-1]
        self._c = c
        self._f = f
        self._vp0 = vp[:-1] + c
        # mean-zero constant: integrate the piecewise quadratic exactly
        vv0 = vv[:-1] + c * (self.breakpoints[:-1] - self.breakpoints[0])
        integral = 0.0
        for j in range(nseg):
            w = widths[j]
            integral += (vv0[j] * w + 0.5 * self._vp0[j] * w**2
                         - f[j] * w**3 / 6.0)
        self._v0 = vv0 - integral
        self._sorted_pos = bpts
        self._sorted_sgn = sgn[order]

    def _segment(self, x):
        x = np.asarray(x, dtype=float) % 1.0
        x = np.where(x < self.breakpoints[0], x + 1.0, x)
        j = np.clip(np.searchsorted(self.breakpoints, x, side="right") - 1,
                    0, len(self._f) - 1)
        return x, j

    def v(self, x):
        x, j = self._segment(x)
        dx = x - self.breakpoints[j]
        return self._v0[j] + self._vp0[j] * dx - 0.5 * self._f[j] * dx**2

    def dv(self, x):
        x, j = self._segment(x)
        dx = x - self.breakpoints[j]
        return self._vp0[j] - self._f[j] * dx

    def normal_derivative(self) -> np.ndarray:
        """Outward normal derivative of v at each interface (sorted order)."""
        return self._sorted_sgn * self.dv(self._sorted_pos)

    def interface_values(self) -> np.ndarray:
        return self.v(self._sorted_pos)

    def dirichlet_energy(self) -> float:
        """Exact int v'^2 over the circle (v' piecewise linear)."""
        total = 0.0
        widths = np.diff(self.breakpoints)
        for j in range(len(self._f)):
            a0 = self._vp0[j]
            b = -self._f[j]
            w = widths[j]
            total += a0**2 * w + a0 * b * w**2 + b**2 * w**3 / 3.0
        return total


def lamella_source_field(shape: Lamella, n: int) -> ScalarField:
    """Band-limited representation of u_L - m on an n-point axis grid.

    Exact Fourier coefficients of the indicator difference, truncated to the
    grid band; avoids the aliasing of raw +-1 sampling.  1D field along the
    lamella axis.
    """
    grid = make_grid(1, (n,))
    a = shape.a
    k = shape.k
    nu = np.fft.fftfreq(n, d=1.0 / n)
    c = np.zeros(n, dtype=complex)
    nz = nu != 0
    nn = nu[nz]
    # sum over strips: k identical cells, nonzero only on multiples of k
    cell = np.where(np.isclose(nn % k, 0),
                    (1.0 - np.exp(-2j * np.pi * nn * a / k)) / (2j * np.pi * nn), 0.0)
    c[nz] = 2.0 * k * cell
    phase = np.exp(2j * np.pi * nu * (0.5 / n))
    vals = np.fft.ifft(c * n * phase).real
    return ScalarField(grid, vals)


# ---------------------------------------------------------------------------
# shape description files
# ---------------------------------------------------------------------------

def shape_to_record(shape: ShapeConfig) -> dict:
    if isinstance(shape, Lamella):
        return {"kind": "lamella", "k": shape.k, "m": shape.m,
                "axis": shape.axis, "dim": shape.dim}
    if isinstance(shape, Droplet):
        return {"kind": "droplet",
                "center": ",".join(repr(c) for c in shape.center),
                "radius": shape.radius, "dim": shape.dim}
    raise ValidationError(f"cannot serialize {type(shape)}")


def record_to_shape(rec: dict) -> ShapeConfig:
    kind = rec.get("kind")
    if kind == "lamella":
        return Lamella(k=int(rec["k"]), m=float(rec["m"]),
                       axis=int(rec.get("axis", -1)), dim=int(rec.get("dim", 2)))
    if kind == "droplet":
        center = tuple(float(c) for c in str(rec["center"]).split(","))
        return Droplet(center=center, radius=float(rec["radius"]),
                       dim=int(rec.get("dim", len(center))))
    raise ValidationError(f"unknown shape kind {kind!r}")


def load_shape(path: str) -> ShapeConfig:
    rec = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("["):
                continue
            key, _, val = line.partition("=")
            rec[key.strip()] = val.strip()
    return record_to_shape(rec)


def save_shape(shape: ShapeConfig, path: str):
    rec = shape_to_record(shape)
    with open(path, "w") as fh:
        for key, val in rec.items():
            fh.write(f"{key}={val}\n")
