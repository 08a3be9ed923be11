"""Periodic spectral infrastructure on the unit flat torus.

Grids, scalar fields, the mean-zero Poisson solver for -Lap v = f, Dirichlet
energies via Parseval, closed-form screened Green kernels on the circle, the
two-dimensional torus Green function, and a homogeneous-Neumann box solver.

Conventions: the torus is [0,1)^d with unit volume; samples live at cell
centers x_j = (j + 1/2) h.  The zero Fourier mode of every Poisson solution
is forced to exactly 0, which realizes the mean-zero normalization of the
potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .config import MIN_GRID_SIZE, TOLERANCES


class ValidationError(ValueError):
    """Raised on invalid inputs (bad shapes, grids, parameters)."""


class NumericalError(RuntimeError):
    """Raised on numerical failure (non-convergence, lost accuracy)."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform periodic grid on T^dim, unit total volume."""

    dim: int
    sizes: tuple[int, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValidationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if len(self.sizes) != self.dim:
            raise ValidationError("sizes must have one entry per axis")
        for n in self.sizes:
            if n < MIN_GRID_SIZE:
                raise ValidationError(
                    f"grid size {n} under-resolved (minimum {MIN_GRID_SIZE})")

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(1.0 / n for n in self.sizes)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.sizes))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Cell-center coordinates along one axis."""
        n = self.sizes[axis]
        return (np.arange(n) + 0.5) / n

    def coords(self) -> list[np.ndarray]:
        """Meshgrid ('ij') of cell-center coordinates."""
        axes = [self.axis_coords(a) for a in range(self.dim)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self) -> list[np.ndarray]:
        """Integer wavenumbers per axis, fftfreq layout."""
        return [np.fft.fftfreq(n, d=1.0 / n) for n in self.sizes]

    def ksq(self) -> np.ndarray:
        """|xi|^2 on the full spectral grid (integer wavenumbers)."""
        ks = self.wavenumbers()
        grids = np.meshgrid(*ks, indexing="ij")
        out = np.zeros(self.sizes)
        for g in grids:
            out += g * g
        return out


@dataclass
class ScalarField:
    """Real scalar field sampled at the cell centers of a TorusGrid."""

    grid: TorusGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.sizes:
            raise ValidationError(
                f"value shape {self.values.shape} does not match grid {self.grid.sizes}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("field contains non-finite values")

    def mean(self) -> float:
        return float(self.values.mean())

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def make_grid(dim: int, sizes) -> TorusGrid:
    """Build a periodic grid; rejects under-resolved axes."""
    return TorusGrid(dim, tuple(int(n) for n in sizes))


def _check_mean_zero(f: ScalarField):
    scale = max(1.0, float(np.abs(f.values).max()))
    if abs(f.mean()) > TOLERANCES.mean_zero * scale:
        raise ValidationError(
            f"source must be mean-zero (mean = {f.mean():.3e}); subtract the mean first")


def solve_poisson_periodic(f: ScalarField) -> ScalarField:
    """Solve -Lap v = f on the torus with mean(v) = 0.

    Fourier coefficients are divided by 4 pi^2 |xi|^2; the zero mode is set
    to exactly 0.  The source must be mean-zero.
    """
    _check_mean_zero(f)
    fh = np.fft.fftn(f.values)
    ksq = f.grid.ksq()
    denom = 4.0 * np.pi**2 * ksq
    vh = np.zeros_like(fh)
    nz = ksq > 0
    vh[nz] = fh[nz] / denom[nz]
    v = np.fft.ifftn(vh).real
    return ScalarField(f.grid, v)


def laplacian(v: ScalarField) -> ScalarField:
    """Spectral Laplacian; used for residual checks."""
    vh = np.fft.fftn(v.values)
    out = np.fft.ifftn(-4.0 * np.pi**2 * v.grid.ksq() * vh).real
    return ScalarField(v.grid, out)


def spectral_gradient(v: ScalarField) -> list[ScalarField]:
    """Spectral gradient components of a periodic field."""
    vh = np.fft.fftn(v.values)
    ks = v.grid.wavenumbers()
    grids = np.meshgrid(*ks, indexing="ij")
    comps = []
    for g in grids:
        comps.append(ScalarField(v.grid, np.fft.ifftn(2j * np.pi * g * vh).real))
    return comps


def dirichlet_energy(v: ScalarField) -> float:
    """int |grad v|^2 by the Parseval sum sum 4 pi^2 |xi|^2 |vhat|^2."""
    vh = np.fft.fftn(v.values)
    ntot = v.grid.num_cells
    return float(np.sum(4.0 * np.pi**2 * v.grid.ksq() * np.abs(vh) ** 2) / ntot**2)


def grid_inner(u: ScalarField, v: ScalarField) -> float:
    """Grid approximation of the L2 inner product (unit total volume)."""
    if u.grid != v.grid:
        raise ValidationError("grid mismatch")
    return float((u.values * v.values).mean())


def trig_interpolate(v: ScalarField, points: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of a field at arbitrary points.

    points: array (npts, dim) (or (npts,) in 1D).  Accounts for the
    half-cell offset of cell-center sampling.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if v.grid.dim == 1 and pts.shape[1] != 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[1] != v.grid.dim:
        raise ValidationError("point dimension does not match grid")
    ntot = v.grid.num_cells
    coef = np.fft.fftn(v.values) / ntot
    # shift coefficients so that modes are e^{2 pi i n x} in physical coordinates
    ks = v.grid.wavenumbers()
    for axis, k in enumerate(ks):
        shape = [1] * v.grid.dim
        shape[axis] = len(k)
        coef = coef * np.exp(-2j * np.pi * k * (0.5 * v.grid.spacing[axis])).reshape(shape)
    if v.grid.dim == 1:
        e = np.exp(2j * np.pi * np.outer(pts[:, 0], ks[0]))
        return np.real(e @ coef)
    if v.grid.dim == 2:
        e0 = np.exp(2j * np.pi * np.outer(pts[:, 0], ks[0]))
        e1 = np.exp(2j * np.pi * np.outer(pts[:, 1], ks[1]))
        return np.real(np.einsum("pa,ab,pb->p", e0, coef, e1))
    e0 = np.exp(2j * np.pi * np.outer(pts[:, 0], ks[0]))
    e1 = np.exp(2j * np.pi * np.outer(pts[:, 1], ks[1]))
    e2 = np.exp(2j * np.pi * np.outer(pts[:, 2], ks[2]))
    return np.real(np.einsum("pa,abc,pb,pc->p", e0, coef, e1, e2))


# ---------------------------------------------------------------------------
# screened Green kernels on the unit circle
# ---------------------------------------------------------------------------

def circle_distance(s) -> np.ndarray:
    """Distance on the unit circle, folded to [0, 1/2]."""
    s = np.abs(np.asarray(s, dtype=float)) % 1.0
    return np.minimum(s, 1.0 - s)


def green_kernel_screened(q: int, s):
    """1D circle Green kernel of the laterally Fourier-transformed torus Laplacian.

    q = 0: mean-zero kernel of -d^2/ds^2, g0(s) = s^2/2 - s/2 + 1/12.
    q >= 1: kernel of -d^2/ds^2 + (2 pi q)^2,
            g(s) = cosh(lam (1/2 - d)) / (2 lam sinh(lam/2)), lam = 2 pi q.
    """
    if q < 0:
        raise ValidationError("q must be nonnegative")
    scalar = np.isscalar(s)
    sa = np.abs(np.asarray(s, dtype=float)) % 1.0
    if q == 0:
        out = 0.5 * sa * sa - 0.5 * sa + 1.0 / 12.0
    else:
        d = np.minimum(sa, 1.0 - sa)
        lam = 2.0 * np.pi * q
        out = np.cosh(lam * (0.5 - d)) / (2.0 * lam * np.sinh(0.5 * lam))
    return float(out) if scalar else out


def _screened_remainder(q, s):
    """g_q(s) minus its free-space part e^{-lam d}/(2 lam); decays like e^{-pi q}."""
    d = circle_distance(s)
    lam = 2.0 * np.pi * np.asarray(q, dtype=float)
    return (np.exp(-lam * (0.5 - d)) + np.exp(-lam * (0.5 + d))) / (
        4.0 * lam * np.sinh(0.5 * lam))


def _green2d_qmax(tol: float) -> int:
    # remainder terms are bounded by e^{-pi q}/(pi q); solve for the tail bound
    q = 8
    while math.exp(-math.pi * q) / (math.pi * q) > 0.1 * tol and q < 200:
        q += 1
    return q


def green_function_2d(x, y, tol: float = TOLERANCES.kernel_tail):
    """Torus Green function G(x, y) on T^2 (mean-zero normalization).

    Split into the explicitly summed log-singular part and a rapidly
    converging lateral-mode remainder built from the screened kernels.
    Supports broadcasting: x, y arrays of shape (..., 2).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d1 = x[..., 0] - y[..., 0]
    d2 = x[..., 1] - y[..., 1]
    s = circle_distance(d2)
    th = 2.0 * np.pi * d1
    arg = 1.0 - 2.0 * np.exp(-2.0 * np.pi * s) * np.cos(th) + np.exp(-4.0 * np.pi * s)
    if np.any(arg <= 0):
        raise ValidationError("Green function evaluated at coincident points")
    val = green_kernel_screened(0, d2) - np.log(arg) / (4.0 * np.pi)
    qmax = _green2d_qmax(tol)
    q = np.arange(1, qmax + 1)
    rq = _screened_remainder(q, s[..., None] if np.ndim(s) else s)
    if np.ndim(s):
        val = val + np.sum(2.0 * np.cos(2.0 * np.pi * q * d1[..., None]) * rq, axis=-1)
    else:
        val = val + np.sum(2.0 * np.cos(2.0 * np.pi * q * d1) * rq)
    return val


def green2d_self_regularized(tol: float = TOLERANCES.kernel_tail) -> float:
    """lim_{y->x} [G(x,y) + log|x-y|/(2 pi)]; constant by translation invariance."""
    qmax = _green2d_qmax(tol)
    q = np.arange(1, qmax + 1)
    return float(1.0 / 12.0 - np.log(2.0 * np.pi) / (2.0 * np.pi)
                 + np.sum(2.0 * _screened_remainder(q, 0.0)))


# ---------------------------------------------------------------------------
# homogeneous Neumann box solver (unit box, cosine extension)
# ---------------------------------------------------------------------------

def solve_poisson_neumann(f: ScalarField) -> ScalarField:
    """Solve -Lap v = f on the unit box with dv/dn = 0, mean(v) = 0.

    Uses the even (DCT-II) spectral extension; samples at cell centers.
    """
    _check_mean_zero(f)
    fh = sfft.dctn(f.values, type=2, norm="ortho")
    lam = _neumann_eigs(f.grid)
    vh = np.zeros_like(fh)
    nz = lam > 0
    vh[nz] = fh[nz] / lam[nz]
    v = sfft.idctn(vh, type=2, norm="ortho")
    return ScalarField(f.grid, v)


def _neumann_eigs(grid: TorusGrid) -> np.ndarray:
    out = np.zeros(grid.sizes)
    for axis, n in enumerate(grid.sizes):
        k = np.arange(n, dtype=float)
        shape = [1] * grid.dim
        shape[axis] = n
        out = out + ((np.pi * k) ** 2).reshape(shape)
    return out


def neumann_laplacian(v: ScalarField) -> ScalarField:
    vh = sfft.dctn(v.values, type=2, norm="ortho")
    out = sfft.idctn(-_neumann_eigs(v.grid) * vh, type=2, norm="ortho")
    return ScalarField(v.grid, out)


def neumann_dirichlet_energy(v: ScalarField) -> float:
    """int |grad v|^2 over the unit box via the cosine Parseval sum."""
    vh = sfft.dctn(v.values, type=2, norm="ortho")
    ntot = v.grid.num_cells
    return float(np.sum(_neumann_eigs(v.grid) * vh**2) / ntot)


def neumann_boundary_flux(v: ScalarField) -> float:
    """Total |flux| of the cosine interpolant through the box boundary.

    The normal derivative of each cosine mode vanishes at the walls; this
    evaluates the one-sided spectral derivative at every wall and sums
    |dv/dn| ds, so it measures how far the computed field is from an even
    extension.
    """
    vals = v.values
    total = 0.0
    for axis in range(v.grid.dim):
        vh = sfft.dct(np.moveaxis(vals, axis, -1), type=2, norm="ortho", axis=-1)
        n = v.grid.sizes[axis]
        k = np.arange(n, dtype=float)
        # derivative of cos(pi k x) at x=0 and x=1 is 0; evaluate the sine series
        dv0 = np.sum(vh * (-np.pi * k) * np.sin(np.pi * k * 0.0), axis=-1)
        dv1 = np.sum(vh * (-np.pi * k) * np.sin(np.pi * k * 1.0), axis=-1)
        area = v.grid.cell_volume * v.grid.sizes[axis]
        total += (np.abs(dv0).sum() + np.abs(dv1).sum()) * area / max(dv0.size, 1)
    return float(total)


# ---------------------------------------------------------------------------
# field snapshot format
# ---------------------------------------------------------------------------

def save_field(f: ScalarField, path: str):
    """Write 'okfield v1' snapshot: text header + row-major little-endian f64."""
    header = "okfield v1 dim=%d sizes=%s\n" % (
        f.grid.dim, ",".join(str(n) for n in f.grid.sizes))
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def load_field(path: str) -> ScalarField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        parts = header.split()
        if len(parts) != 4 or parts[0] != "okfield" or parts[1] != "v1":
            raise ValidationError(f"bad snapshot header: {header!r}")
        dim = int(parts[2].split("=")[1])
        sizes = tuple(int(s) for s in parts[3].split("=")[1].split(","))
        grid = make_grid(dim, sizes)
        data = np.frombuffer(fh.read(), dtype="<f8").reshape(sizes)
    return ScalarField(grid, data.copy())
