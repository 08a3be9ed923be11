"""Second-variation quadratic forms and stability thresholds.

Exact per-lateral-mode matrices for lamellae, dense boundary-element
assembly for discretized curves in T^2, constrained eigenanalysis with the
translation directions projected out, bisection thresholds in gamma and in
the strip count, and finite-difference validation of the form against the
full energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.optimize import brentq

from .config import DEFAULT_FIELD_GRID, TOLERANCES
from .energy import graph_energy, volume_corrected_perturbation
from .shapes import (BoundaryMesh, GraphPerturbation, Lamella, LamellaPotential,
                     rasterize)
from .torus import (NumericalError, ScalarField, TorusGrid, ValidationError,
                    green2d_self_regularized, green_function_2d,
                    green_kernel_screened, make_grid, solve_poisson_periodic,
                    spectral_gradient, trig_interpolate)


# ---------------------------------------------------------------------------
# exact lamella mode matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LamellaModeMatrix:
    """Per-lateral-mode second-variation matrix over interface amplitudes.

    M(q) = 4 pi^2 q^2 I + 8 gamma K(q) + 4 gamma diag(dnv), where K(q) is
    the screened circle kernel sampled at interface separations and dnv is
    the outward normal derivative of the lamella potential (equal to
    -a(1-a)/k at every interface).
    """
    q: int
    matrix: np.ndarray = field(repr=False)
    kernel: np.ndarray = field(repr=False)
    dnv: float = 0.0

    def __post_init__(self):
        if np.abs(self.matrix - self.matrix.T).max() > TOLERANCES.matrix_symmetry:
            raise NumericalError("mode matrix lost symmetry")


def lamella_mode_matrix(k: int, m: float, gamma: float, q: int) -> LamellaModeMatrix:
    if q < 0:
        raise ValidationError("q must be nonnegative")
    shape = Lamella(k=k, m=m, axis=0, dim=1)
    pos, _ = shape.interfaces()
    sep = pos[:, None] - pos[None, :]
    K = green_kernel_screened(q, sep)
    dnv = -shape.a * (1.0 - shape.a) / k
    M = 8.0 * gamma * K + 4.0 * gamma * dnv * np.eye(2 * k)
    M += 4.0 * np.pi**2 * q**2 * np.eye(2 * k)
    M = 0.5 * (M + M.T)
    return LamellaModeMatrix(q, M, K, dnv)


def lamella_normal_derivative(k: int, m: float) -> np.ndarray:
    """Outward normal derivative of the lamella potential at each interface,
    from the exact piecewise-quadratic profile (all equal to -a(1-a)/k)."""
    return LamellaPotential(Lamella(k=k, m=m, axis=0, dim=1)).normal_derivative()


@dataclass
class StabilityReport:
    min_eigenvalue: float
    mode: object                       # minimizing lateral wave number or label
    eigenvector: np.ndarray = field(repr=False, default=None)
    gamma_c: float | None = None
    k0: int | None = None
    scan: dict = field(default_factory=dict)


def lamella_min_eigenvalue(k: int, m: float, gamma: float,
                           q_max: int | None = None) -> StabilityReport:
    """Minimum over lateral modes q >= 1 of the eigenvalues of M(q).

    The q = 0 block carries only the translation and volume directions
    (amplitudes constant per interface), which are excluded from the
    admissible class, so it does not enter the minimum.  The scan extends
    until the Gershgorin lower bound of M(q) exceeds the best minimum.
    """
    a = 0.5 * (m + 1.0)
    best = np.inf
    best_q = None
    best_vec = None
    q = 1
    hard_cap = 100_000
    while True:
        mm = lamella_mode_matrix(k, m, gamma, q)
        w, V = np.linalg.eigh(mm.matrix)
        if w[0] < best:
            best = float(w[0])
            best_q = q
            best_vec = V[:, 0]
        # all eigenvalues of M(q') for q' > q exceed this bound
        bound = (4.0 * np.pi**2 * (q + 1) ** 2
                 - 8.0 * gamma * 2 * k * green_kernel_screened(q + 1, 0.0)
                 - 4.0 * gamma * a * (1.0 - a) / k)
        done = bound > best and (q_max is None or q >= q_max)
        if q_max is not None and q >= q_max and not done:
            # honor the requested cap but keep going until the bound closes
            done = bound > best
        if done or q >= hard_cap:
            break
        q += 1
    if q >= hard_cap:
        raise NumericalError("mode scan failed to close")
    return StabilityReport(best, best_q, best_vec,
                           scan={"q_scanned": q, "k": k, "m": m, "gamma": gamma})


def stability_threshold_gamma(m: float, k: int,
                              gamma_max: float = 1e6) -> StabilityReport:
    """Bisection threshold gamma_c: sign change of the minimal eigenvalue.

    Returns gamma_c = None when the lamella stays stable up to gamma_max.
    """
    def f(g):
        return lamella_min_eigenvalue(k, m, g).min_eigenvalue

    lo, hi = 0.0, 1.0
    while f(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > gamma_max:
            rep = lamella_min_eigenvalue(k, m, gamma_max)
            rep.gamma_c = None
            rep.scan["status"] = "stable throughout range"
            return rep
    gc = brentq(f, lo, hi, xtol=TOLERANCES.threshold_bisect)
    rep = lamella_min_eigenvalue(k, m, float(gc))
    rep.gamma_c = float(gc)
    rep.scan["bracket"] = (lo, hi)
    return rep


def stability_threshold_k(m: float, gamma: float, k_max: int = 200) -> StabilityReport:
    """Smallest k0 <= k_max with positive minimal eigenvalue for every
    k in [k0, k_max]."""
    eigs = [lamella_min_eigenvalue(k, m, gamma).min_eigenvalue
            for k in range(1, k_max + 1)]
    k0 = None
    for k in range(k_max, 0, -1):
        if eigs[k - 1] > 0:
            k0 = k
        else:
            break
    rep = StabilityReport(eigs[(k0 or 1) - 1], "k-scan",
                          scan={"m": m, "gamma": gamma, "k_max": k_max,
                                "eigs": eigs})
    rep.k0 = k0
    return rep


# ---------------------------------------------------------------------------
# dense boundary-element quadratic form on T^2 curves
# ---------------------------------------------------------------------------

@dataclass
class QuadraticFormMatrix:
    """Dense symmetric form over boundary-node values with its quadrature.

    `matrix` is the second-variation form, `weights` the arc-length
    quadrature, `h1` the H^1 Gram matrix (tangential-derivative energy plus
    mass), `constraints` the rows of the linear functionals to project out
    (total mean and the active translation functionals in the frame that
    diagonalizes a_ij = int nu_i nu_j).
    """
    matrix: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    h1: np.ndarray = field(repr=False)
    constraints: np.ndarray = field(repr=False)
    frame: np.ndarray = field(repr=False)
    mesh: BoundaryMesh = None

    def __post_init__(self):
        scale = max(1.0, np.abs(self.matrix).max())
        if np.abs(self.matrix - self.matrix.T).max() > 1e-10 * scale:
            raise NumericalError("assembled form lost symmetry")

    def value(self, phi: np.ndarray) -> float:
        phi = np.asarray(phi, dtype=float)
        return float(phi @ self.matrix @ phi)


def _spectral_derivative_matrix(n: int) -> np.ndarray:
    # d/dt on n uniform nodes of the unit-period circle
    eye = np.eye(n)
    k = np.fft.rfftfreq(n, d=1.0 / n)
    spec = np.fft.rfft(eye, axis=0) * (2j * np.pi * k)[:, None]
    if n % 2 == 0:
        spec[-1] = 0.0
    return np.fft.irfft(spec, n=n, axis=0).T


def _log_quadrature_block(n: int) -> np.ndarray:
    """Trig-exact quadrature of the periodic log kernel.

    Q_ij approximates the double integral of -(1/2pi) log(2|sin pi(t-s)|)
    against node densities: Q_ij = (1/n^2) sum_nu chat_nu e^{2pi i nu dt},
    with chat_nu = 1/(4 pi |nu|) the kernel's Fourier coefficients.
    """
    t = np.arange(n) / n
    dt = t[:, None] - t[None, :]
    nu = np.arange(1, n // 2 + 1)
    w = np.ones_like(nu, dtype=float)
    if n % 2 == 0:
        w[-1] = 0.5
    cosd = np.cos(2.0 * np.pi * dt[..., None] * nu)
    return (cosd * (w / (2.0 * np.pi * nu))).sum(axis=-1) / n**2


def assemble_boundary_form(mesh: BoundaryMesh, gamma: float,
                           grid: TorusGrid | None = None) -> QuadraticFormMatrix:
    """Dense second-variation form on a T^2 boundary mesh.

    Blocks: tangential Dirichlet energy (spectral differentiation per
    component), -kappa^2 mass term, 8 gamma double-layer of the torus Green
    function with the log singularity handled by a trig-exact product
    quadrature on the self panels, and the 4 gamma (normal derivative of v)
    mass term.
    """
    n = len(mesh.points)
    W = mesh.weights
    A = np.zeros((n, n))

    # Dirichlet + curvature blocks, per component
    H1 = np.diag(W)
    for (i0, i1) in mesh.components:
        nc = i1 - i0
        Dt = _spectral_derivative_matrix(nc)
        Dtau = Dt / mesh.speeds[i0:i1][:, None]
        block = Dtau.T @ np.diag(W[i0:i1]) @ Dtau
        if nc % 2 == 0:
            # the odd spectral derivative annihilates the Nyquist sawtooth;
            # restore its tangential energy modally so the form stays coercive
            e = np.where(np.arange(nc) % 2 == 0, 1.0, -1.0)
            inv_sp = float(np.mean(1.0 / mesh.speeds[i0:i1]))
            coeff = (np.pi * nc) ** 2 * 0.5 * inv_sp / nc**2
            block += coeff * np.outer(e, e)
        A[i0:i1, i0:i1] += block
        H1[i0:i1, i0:i1] += block
    A -= np.diag(W * mesh.curvature**2)

    if gamma > 0:
        # nonlocal block
        G = np.zeros((n, n))
        pts = mesh.points
        diff_mask = np.ones((n, n), dtype=bool)
        for (i0, i1) in mesh.components:
            diff_mask[i0:i1, i0:i1] = False
        # off-component panels: kernel smooth, plain product quadrature
        if diff_mask.any():
            ii, jj = np.where(diff_mask)
            G[ii, jj] = green_function_2d(pts[ii], pts[jj]) * W[ii] * W[jj]
        greg = green2d_self_regularized()
        for (i0, i1) in mesh.components:
            nc = i1 - i0
            p = pts[i0:i1]
            sp = mesh.speeds[i0:i1]
            w = W[i0:i1]
            t = np.arange(nc) / nc
            dt = t[:, None] - t[None, :]
            sin_t = 2.0 * np.abs(np.sin(np.pi * dt))
            off = ~np.eye(nc, dtype=bool)
            # smooth remainder S = G + (1/2pi) log(2|sin pi dt|)
            S = np.empty((nc, nc))
            Gfull = np.zeros((nc, nc))
            Gfull[off] = green_function_2d(
                np.broadcast_to(p[:, None, :], (nc, nc, 2))[off],
                np.broadcast_to(p[None, :, :], (nc, nc, 2))[off])
            S[off] = Gfull[off] + np.log(sin_t[off]) / (2.0 * np.pi)
            S[~off] = greg + np.log(2.0 * np.pi / sp) / (2.0 * np.pi)
            Qlog = _log_quadrature_block(nc)
            G[i0:i1, i0:i1] = (S * w[:, None] * w[None, :]
                               + Qlog * sp[:, None] * sp[None, :])
        A += 8.0 * gamma * G

        # potential block: normal derivative of v on the mesh.  Lamellae use
        # the exact piecewise profile; spectral differentiation of the
        # rasterized field loses accuracy at the interface kink.
        if isinstance(mesh.shape, Lamella):
            dnv = np.full(len(W), -mesh.shape.a * (1.0 - mesh.shape.a)
                          / mesh.shape.k)
        else:
            g = grid if grid is not None else make_grid(2, (DEFAULT_FIELD_GRID,) * 2)
            u = rasterize(mesh.shape, g)
            v = solve_poisson_periodic(ScalarField(g, u.values - u.mean()))
            gx, gy = spectral_gradient(v)
            dnv = (trig_interpolate(gx, mesh.points) * mesh.normals[:, 0]
                   + trig_interpolate(gy, mesh.points) * mesh.normals[:, 1])
        A += 4.0 * gamma * np.diag(W * dnv)

    A = 0.5 * (A + A.T)

    # constraint functionals: total mean + active translation directions
    a_ij = np.einsum("i,ip,iq->pq", W, mesh.normals, mesh.normals)
    evals, frame = np.linalg.eigh(a_ij)
    rows = [W.copy()]
    for p in range(2):
        if evals[p] > 1e-10:
            rows.append(W * (mesh.normals @ frame[:, p]))
    return QuadraticFormMatrix(A, W, 0.5 * (H1 + H1.T), np.array(rows),
                               frame, mesh)


def translation_form_value(form: QuadraticFormMatrix, axis: int = 1) -> float:
    """Form evaluated on the translation trace nu . e_axis, relative to the
    form's scale on that vector."""
    phi = form.mesh.normals[:, axis]
    raw = form.value(phi)
    norm = float(phi @ (form.weights * phi))
    return raw / max(norm, 1e-30)


def constrained_min_eig(form: QuadraticFormMatrix,
                        norm: str = "l2") -> StabilityReport:
    """Minimal Rayleigh quotient of the form on the constrained complement.

    Constraints (total mean and the translation functionals with nonzero
    frame norm) are removed by an SVD nullspace; the quotient is taken
    against the arc-length L^2 mass (norm="l2") or the full H^1 Gram
    (norm="h1").
    """
    C = np.atleast_2d(form.constraints)
    rank = np.linalg.matrix_rank(C, tol=1e-12)
    if rank < C.shape[0]:
        raise ValidationError("constraint functionals are rank deficient")
    _, _, Vt = np.linalg.svd(C)
    Z = Vt[C.shape[0]:].T
    B = np.diag(form.weights) if norm == "l2" else form.h1
    Ared = Z.T @ form.matrix @ Z
    Bred = Z.T @ B @ Z
    w, V = linalg.eigh(0.5 * (Ared + Ared.T), 0.5 * (Bred + Bred.T))
    vec = Z @ V[:, 0]
    return StabilityReport(float(w[0]), "constrained", vec,
                           scan={"norm": norm, "n": form.matrix.shape[0],
                                 "n_constraints": C.shape[0]})


# ---------------------------------------------------------------------------
# value of the exact lamella form on arbitrary height fields
# ---------------------------------------------------------------------------

def lamella_form_value(base: Lamella, phi: np.ndarray, gamma: float) -> float:
    """Second-variation value on normal-height rows phi (2k, n), sampled at
    lateral nodes j/n, via the per-mode matrices (Parseval in the lateral
    variable)."""
    phi = np.atleast_2d(np.asarray(phi, dtype=float))
    if phi.shape[0] != 2 * base.k:
        raise ValidationError("phi needs 2k rows")
    n = phi.shape[1]
    c = np.fft.rfft(phi, axis=1) / n
    total = 0.0
    for q in range(n // 2 + 1):
        M = lamella_mode_matrix(base.k, base.m, gamma, q).matrix
        mult = 2.0
        if q == 0 or (n % 2 == 0 and q == n // 2):
            mult = 1.0
        cq = c[:, q]
        total += mult * float(np.real(np.conj(cq) @ M @ cq))
    return total


# ---------------------------------------------------------------------------
# finite-difference validation against the full energy
# ---------------------------------------------------------------------------

@dataclass
class FDReport:
    t_values: list
    second_differences: list
    richardson: float
    form_value: float

    @property
    def ratio(self) -> float:
        if self.form_value == 0.0:
            return float("nan")
        return self.richardson / self.form_value


def finite_difference_check(base: Lamella, psi: np.ndarray, gamma: float,
                            t_list=(0.02, 0.01), n_lat: int = 128) -> FDReport:
    """Symmetric second differences of J along volume-corrected graph
    perturbations with heights t psi, compared with the quadratic form.

    The normal height of the perturbation is sigma_j psi_j (orientation
    sign times vertical height); the reported Richardson value
    extrapolates the two smallest step sizes.
    """
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    _, sgn = base.interfaces()
    j0 = graph_energy(GraphPerturbation(base, 0.0 * psi), gamma, n_lat).total

    def j_at(t):
        gp = volume_corrected_perturbation(base, t * psi)
        return graph_energy(gp, gamma, n_lat).total

    ts = sorted(t_list, reverse=True)
    d2 = [(j_at(t) + j_at(-t) - 2.0 * j0) / t**2 for t in ts]
    if len(d2) >= 2 and abs(ts[0] / ts[1] - 2.0) < 1e-12:
        rich = (4.0 * d2[-1] - d2[-2]) / 3.0
    else:
        rich = d2[-1]
    phi = sgn[:, None] * psi
    fv = lamella_form_value(base, phi, gamma)
    return FDReport(list(ts), d2, float(rich), float(fv))
