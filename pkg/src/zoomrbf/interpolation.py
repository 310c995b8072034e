"""Single-level interpolation with the scaled Wendland kernel.

Gram matrices are assembled sparsely: only pairs closer than delta in chordal
distance are visited (k-d tree pair search), so the kernel is never evaluated
outside its support.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg
from scipy.spatial import cKDTree

from zoomrbf.geometry import GeometryError, PointSet, UnitVector, as_xyz, normalize
from zoomrbf.kernels import ScaledZonalKernel

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """CG failed to reach the requested residual within its iteration cap."""


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric sparse kernel matrix ``A[i, j] = Phi_delta(x_i, x_j)``.

    Both triangles are stored (CSR) so products need no symmetrisation.
    """

    matrix: sp.csr_matrix
    delta: float

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def __matmul__(self, v):
        return self.matrix @ v

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _as_array(centers) -> np.ndarray:
    if isinstance(centers, PointSet):
        return centers.points
    return normalize(np.atleast_2d(as_xyz(centers)))


def assemble(centers, kernel: ScaledZonalKernel) -> GramMatrix:
    """Sparse Gram matrix of ``kernel`` over ``centers``.

    Raises :class:`GeometryError` on duplicate centres (singular matrix).
    """
    X = _as_array(centers)
    tree = cKDTree(X)
    pairs = tree.query_pairs(kernel.delta, output_type="ndarray")
    if len(pairs):
        i, j = pairs[:, 0], pairs[:, 1]
        chord = np.linalg.norm(X[i] - X[j], axis=1)
        if np.any(chord == 0.0):
            raise GeometryError("duplicate centres give a singular Gram matrix")
        inside = chord < kernel.delta
        i, j, chord = i[inside], j[inside], chord[inside]
    else:
        i = j = np.zeros(0, dtype=np.intp)
        chord = np.zeros(0)
    off = kernel.of_chord(chord)
    n = len(X)
    diag = np.arange(n)
    rows = np.concatenate([diag, i, j])
    cols = np.concatenate([diag, j, i])
    vals = np.concatenate([np.full(n, kernel.of_chord(0.0)), off, off])
    A = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    A.sort_indices()
    return GramMatrix(A, kernel.delta)


def dense_gram(centers, kernel: ScaledZonalKernel) -> np.ndarray:
    """Brute-force dense Gram matrix (reference implementation for tests)."""
    X = _as_array(centers)
    chord = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=-1)
    return kernel.of_chord(chord)


def solve(matrix: GramMatrix, rhs, tol: float = 1e-10, maxiter: int | None = None,
          return_iterations: bool = False):
    """Conjugate gradients with Jacobi preconditioning.

    Stops once ``||A b - rhs|| <= tol * ||rhs||``; the true residual is checked
    afterwards and :class:`SolverError` raised if it is not met.
    """
    A = matrix.matrix if isinstance(matrix, GramMatrix) else sp.csr_matrix(matrix)
    rhs = np.asarray(rhs, dtype=float)
    n = A.shape[0]
    if rhs.shape != (n,):
        raise ValueError(f"right-hand side has shape {rhs.shape}, expected ({n},)")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if maxiter is None:
        maxiter = 10 * n
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return (np.zeros(n), 0) if return_iterations else np.zeros(n)

    inv_diag = 1.0 / A.diagonal()
    M = sp.diags(inv_diag)
    count = [0]

    def tick(_):
        count[0] += 1

    # aim slightly below tol: CG tracks a recursively updated residual
    x, info = cg(A, rhs, rtol=0.1 * tol, atol=0.0, maxiter=maxiter, M=M, callback=tick)
    rel = np.linalg.norm(A @ x - rhs) / bnorm
    if rel > tol:
        raise SolverError(f"CG stopped after {count[0]} iterations with relative residual {rel:.2e}")
    return (x, count[0]) if return_iterations else x


@dataclass(frozen=True)
class Interpolant:
    """``s(x) = sum_j b_j Phi_delta(x, x_j)``."""

    kernel: ScaledZonalKernel
    centers: np.ndarray
    coefficients: np.ndarray
    _tree: cKDTree = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        centers = _as_array(self.centers)
        coeffs = np.asarray(self.coefficients, dtype=float)
        if coeffs.shape != (len(centers),):
            raise ValueError("need one coefficient per centre")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "_tree", cKDTree(centers))

    @property
    def delta(self) -> float:
        return self.kernel.delta

    def __len__(self):
        return len(self.centers)

    def __call__(self, x):
        return evaluate(self, x)


def interpolate(centers, kernel: ScaledZonalKernel, values, tol: float = 1e-10) -> Interpolant:
    """Fit the interpolant matching ``values`` at ``centers``."""
    X = _as_array(centers)
    values = np.asarray(values, dtype=float)
    if values.shape != (len(X),):
        raise ValueError(f"got {values.shape[0] if values.ndim else 0} values for {len(X)} centres")
    A = assemble(X, kernel)
    b = solve(A, values, tol=tol)
    return Interpolant(kernel, X, b)


def evaluation_matrix(ip: Interpolant, x) -> sp.csr_matrix:
    """Sparse ``K[i, j] = Phi(x_i, center_j)`` over supported pairs only."""
    Y = np.atleast_2d(as_xyz(x))
    tree_y = cKDTree(Y)
    pairs = tree_y.sparse_distance_matrix(ip._tree, ip.delta, output_type="ndarray")
    i, j = pairs["i"], pairs["j"]
    chord = np.linalg.norm(Y[i] - ip.centers[j], axis=1)
    inside = chord < ip.delta
    i, j, chord = i[inside], j[inside], chord[inside]
    return sp.csr_matrix((ip.kernel.of_chord(chord), (i, j)), shape=(len(Y), len(ip.centers)))


def evaluate(ip: Interpolant, x):
    """Evaluate an interpolant at one point or an ``(m, 3)`` array of points.

    Only centres within chordal distance delta contribute, which gives the
    same sum as the full one since the other terms are exactly zero.
    """
    single = isinstance(x, UnitVector) or np.ndim(as_xyz(x)) == 1
    vals = evaluation_matrix(ip, x) @ ip.coefficients
    return float(vals[0]) if single else vals


def node_residual(ip: Interpolant, values) -> float:
    """``max |s(x_j) - values_j| / max |values|`` (0 for all-zero data)."""
    values = np.asarray(values, dtype=float)
    scale = np.max(np.abs(values)) if len(values) else 0.0
    err = np.max(np.abs(evaluate(ip, ip.centers) - values)) if len(values) else 0.0
    if scale == 0.0:
        return float(err)
    return float(err / scale)


# -- spectrum ---------------------------------------------------------------

def _start_vector(n: int) -> np.ndarray:
    # fixed, non-degenerate start so results are reproducible without an RNG
    v = 1.0 + 0.5 * np.sin(1.0 + np.arange(n) * 0.6180339887498949 * 7.0)
    return v / np.linalg.norm(v)


def _power(apply, n: int, tol: float, maxiter: int) -> float:
    v = _start_vector(n)
    lam = 0.0
    for _ in range(maxiter):
        w = apply(v)
        new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(new - lam) <= tol * abs(new):
            return new
        lam = new
    log.warning("power iteration hit its cap of %d steps", maxiter)
    return lam


def extreme_eigenvalues(matrix: GramMatrix, tol: float = 1e-6, maxiter: int = 5000,
                        solve_tol: float = 1e-10) -> tuple[float, float]:
    """``(lambda_min, lambda_max)`` by inverse and direct power iteration."""
    A = matrix.matrix if isinstance(matrix, GramMatrix) else sp.csr_matrix(matrix)
    n = A.shape[0]
    if n == 1:
        val = float(A[0, 0])
        return val, val
    lam_max = _power(lambda v: A @ v, n, tol, maxiter)
    mu = _power(lambda v: solve(A, v, tol=solve_tol), n, tol, maxiter)
    return 1.0 / mu, lam_max


def condition_number(matrix: GramMatrix, tol: float = 1e-6, maxiter: int = 5000) -> float:
    """Spectral condition number ``lambda_max / lambda_min``."""
    lo, hi = extreme_eigenvalues(matrix, tol=tol, maxiter=maxiter)
    return hi / lo


# -- text format -------------------------------------------------------------

def format_interpolant(ip: Interpolant) -> str:
    lines = [f"interpolant {ip.delta!r} {len(ip)}"]
    for (x, y, z), b in zip(ip.centers.tolist(), ip.coefficients.tolist()):
        lines.append(f"{x!r} {y!r} {z!r} {b!r}")
    return "\n".join(lines) + "\n"


def parse_interpolants(lines, start: int = 0) -> tuple[Interpolant, int]:
    """Parse one interpolant block from ``lines[start:]``; return it and the next index."""
    head = lines[start].split()
    if len(head) != 3 or head[0] != "interpolant":
        raise ValueError(f"line {start + 1}: expected 'interpolant <delta> <n>' header")
    delta, n = float(head[1]), int(head[2])
    block = np.array([[float(v) for v in ln.split()] for ln in lines[start + 1:start + 1 + n]])
    if block.shape != (n, 4):
        raise ValueError(f"interpolant block at line {start + 1} is malformed")
    ip = Interpolant(ScaledZonalKernel(delta), block[:, :3], block[:, 3])
    return ip, start + 1 + n


def write_interpolant(ip: Interpolant, path) -> None:
    Path(path).write_text(format_interpolant(ip))


def read_interpolant(path) -> Interpolant:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    ip, _ = parse_interpolants(lines)
    return ip
