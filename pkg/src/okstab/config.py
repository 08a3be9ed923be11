"""Centralized numerical tolerances and solver defaults.

All modules read their tolerance constants from a single TOLERANCES record
so that accuracy contracts live in one place.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # spectral Poisson solvers
    mean_zero: float = 1e-10          # allowed |mean(f)| relative to max(1, sup|f|)
    solver_residual: float = 1e-10    # sup|Lap v + f| <= this * sup|f|

    # Green kernels / 2D Green function
    kernel_tail: float = 1e-12        # truncation bound for the lateral mode sum
    green_symmetry: float = 1e-12

    # geometry
    normal_unit: float = 1e-12
    weight_length_rel: float = 1e-10
    graph_collision_factor: float = 0.45   # max|psi| < factor * interface gap

    # eigen / threshold machinery
    matrix_symmetry: float = 1e-12
    threshold_bisect: float = 1e-6

    # flow
    energy_increase_rel: float = 1e-12
    mass_drift: float = 1e-12


TOLERANCES = Tolerances()

# grid defaults
MIN_GRID_SIZE = 8
DEFAULT_FIELD_GRID = 256      # per-axis resolution for v_E in boundary sampling
DEFAULT_AXIS_GRID = 512       # 1D resolution for lamella potentials
DEFAULT_Q2_MODES = 2048       # vertical mode cutoff for the graph-shape nonlocal energy
