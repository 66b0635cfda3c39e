"""Position-space eigenfunctions, projection kernels and 2D quadrature.

The eigenfunction family is

    psi_{(n1,n2)}(x) = psi_0(x) sqrt(n1!/n2!) w^(n2-n1) L_{n1}^{(n2-n1)}(rho)

with w = (x1 + i x2)/(ell sqrt2), rho = |x|^2/(2 ell^2) and
psi_0 = exp(-|x|^2 / 4 ell^2) / (ell sqrt(2 pi)); the level-j projection
has the closed-form kernel

    Pi_j(x,y) = exp(-|x-y|^2/(4 ell^2)) exp(-i x^y/(2 ell^2))
                L_j^(0)(|x-y|^2/(2 ell^2)) / (2 pi ell^2),

x^y = x1 y2 - x2 y1. Note this concrete realization is the complex
conjugate of the one generated by the ladder matrices of
:mod:`landautrace.fock`: phase-insensitive quantities (diagonals, traces,
norms) agree between the two, while the position commutator kernels of
``deriv_kernel`` realize the ladder-side derivations with the 1 <-> 2
axes exchanged (see ``tests/test_kernels.py``).
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .fock import ModelParams

__all__ = [
    "Region",
    "QuadratureRule",
    "QuadratureConvergenceError",
    "psi_eval",
    "basis_matrix",
    "landau_kernel",
    "deriv_kernel",
    "integrate_kernel_diagonal",
    "verify_integral_identity",
    "matrix_diagonal_values",
]

TARGET_IDENTITY = np.pi ** 2 / 2j


class QuadratureConvergenceError(RuntimeError):
    """Raised when successive quadrature refinements fail to agree."""


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (N, 2)
    weights: np.ndarray  # (N,)
    order: int


class Region:
    """Centered square (side L) or centered disk (radius R)."""

    def __init__(self, shape, size):
        if shape not in ("square", "disk"):
            raise ValueError(f"unknown region shape {shape!r}")
        if size <= 0:
            raise ValueError("region size must be positive")
        self.shape = shape
        self.size = float(size)

    @classmethod
    def square(cls, side):
        return cls("square", side)

    @classmethod
    def disk(cls, radius):
        return cls("disk", radius)

    @property
    def measure(self):
        if self.shape == "square":
            return self.size ** 2
        return np.pi * self.size ** 2

    @property
    def radius_bound(self):
        """Circumradius; bounds |x| on the region."""
        if self.shape == "square":
            return self.size * np.sqrt(2) / 2
        return self.size

    def rule(self, order):
        """Tensor Gauss-Legendre (square) or polar GL x trapezoid (disk)."""
        if order < 2:
            raise ValueError("order must be >= 2")
        x, w = np.polynomial.legendre.leggauss(order)
        if self.shape == "square":
            half = self.size / 2.0
            xs = x * half
            ws = w * half
            X, Y = np.meshgrid(xs, xs, indexing="ij")
            W = np.outer(ws, ws)
            pts = np.column_stack([X.ravel(), Y.ravel()])
            return QuadratureRule(pts, W.ravel(), order)
        # disk: radial nodes on [0, R] with Jacobian r, uniform angles
        r = (x + 1.0) * (self.size / 2.0)
        wr = w * (self.size / 2.0) * r
        n_ang = 2 * order + 1
        theta = np.arange(n_ang) * (2 * np.pi / n_ang)
        wt = np.full(n_ang, 2 * np.pi / n_ang)
        R, T = np.meshgrid(r, theta, indexing="ij")
        W = np.outer(wr, wt)
        pts = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
        return QuadratureRule(pts, W.ravel(), order)

    def __repr__(self):
        return f"Region({self.shape}, size={self.size})"


def _laguerre_rows(alpha, kmax, rho):
    """L_k^(alpha)(rho) for k = 0..kmax, vectorized over rho ((kmax+1, len))."""
    out = np.empty((kmax + 1, len(rho)))
    out[0] = 1.0
    if kmax == 0:
        return out
    out[1] = 1.0 + alpha - rho
    for k in range(1, kmax):
        out[k + 1] = ((2 * k + 1 + alpha - rho) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0)
    return out


def psi_eval(n, x, params=None):
    """Eigenfunction psi_n at point(s) x; x is (2,) or (..., 2)."""
    if params is None:
        params = ModelParams()
    n1, n2 = (n.n1, n.n2) if hasattr(n, "n1") else (int(n[0]), int(n[1]))
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    pts = x[None, :] if scalar else x.reshape(-1, 2)
    ell = params.ell_B
    w = (pts[:, 0] + 1j * pts[:, 1]) / (ell * np.sqrt(2))
    rho = (pts[:, 0] ** 2 + pts[:, 1] ** 2) / (2 * ell ** 2)
    psi0 = np.exp(-rho / 2.0) / (ell * np.sqrt(2 * np.pi))
    if n2 >= n1:
        pref = np.exp(0.5 * (gammaln(n1 + 1.0) - gammaln(n2 + 1.0)))
        val = psi0 * pref * w ** (n2 - n1) * _laguerre_rows(n2 - n1, n1, rho)[n1]
    else:
        # equivalent closed form regular at the origin:
        # L_m^(-k)(z) = (-z)^k (m-k)!/m! L_{m-k}^(k)(z) folded into the prefactor
        k = n1 - n2
        pref = np.exp(0.5 * (gammaln(n2 + 1.0) - gammaln(n1 + 1.0)))
        val = psi0 * pref * (-1.0) ** k * np.conj(w) ** k * _laguerre_rows(k, n2, rho)[n2]
    if scalar:
        return complex(val[0])
    return val.reshape(x.shape[:-1])


def basis_matrix(basis, points, params=None):
    """All basis eigenfunctions at the given points, shape (dim, npts).

    Evaluated stripe-by-stripe at fixed n2 - n1 with the degree recurrence,
    so the cost is O(dim * npts).
    """
    if params is None:
        params = ModelParams()
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ell = params.ell_B
    w = (pts[:, 0] + 1j * pts[:, 1]) / (ell * np.sqrt(2))
    rho = (pts[:, 0] ** 2 + pts[:, 1] ** 2) / (2 * ell ** 2)
    psi0 = np.exp(-rho / 2.0) / (ell * np.sqrt(2 * np.pi))
    out = np.empty((basis.dim, len(pts)), dtype=complex)
    nmax = basis.nmax
    wbar = np.conj(w)
    for d in range(0, nmax + 1):
        kmax = (nmax - d) // 2  # state (k, k+d) needs 2k + d <= nmax
        # stripe n2 - n1 = +d (and its mirror n1 - n2 = d when d > 0)
        L = _laguerre_rows(d, kmax, rho)
        wd = w ** d
        wbd = (-1.0) ** d * wbar ** d
        for k in range(kmax + 1):
            pref = np.exp(0.5 * (gammaln(k + 1.0) - gammaln(k + d + 1.0)))
            row = psi0 * pref * L[k]
            out[basis.index_of(k, k + d)] = row * wd
            if d:
                out[basis.index_of(k + d, k)] = row * wbd
    return out


def landau_kernel(j, x, y, params=None):
    """Closed-form level-j projection kernel Pi_j(x, y); broadcasts."""
    if params is None:
        params = ModelParams()
    if j < 0:
        raise ValueError("level must be nonnegative")
    ell = params.ell_B
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    y1, y2 = y[..., 0], y[..., 1]
    d2 = ((x1 - y1) ** 2 + (x2 - y2) ** 2) / (2 * ell ** 2)
    wedge = (x1 * y2 - x2 * y1) / (2 * ell ** 2)
    rho = np.atleast_1d(np.asarray(d2, dtype=float))
    lag = _laguerre_rows(0.0, j, rho.ravel())[j].reshape(rho.shape)
    val = np.exp(-d2 / 2.0) * np.exp(-1j * wedge) * lag / (2 * np.pi * ell ** 2)
    if np.ndim(d2) == 0:
        return complex(val[0] if val.ndim else val)
    return val


def deriv_kernel(i, j, x, y, params=None):
    """Kernel of the position-commutator derivation: -i (x_i - y_i) Pi_j(x,y)."""
    if i not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    delta = x[..., i - 1] - y[..., i - 1]
    return -1j * delta * landau_kernel(j, x, y, params)


def matrix_diagonal_values(T, points, params=None):
    """Diagonal T(x, x) of the basis-expansion kernel at the given points."""
    V = basis_matrix(T.basis, points, params)
    if T.spin_dim != 1:
        raise ValueError("kernel expansion needs a spinless operator")
    diag = np.diag(T.entries)
    if np.count_nonzero(T.entries - np.diag(diag)) == 0:
        return np.einsum("i,ip->p", diag, np.abs(V) ** 2)
    return np.einsum("ip,ij,jp->p", np.conj(V), T.entries, V, optimize=True)


def integrate_kernel_diagonal(T, region, params=None, tol=1e-8, order=64):
    """integral over the region of T(x,x), T expanded in the eigenbasis.

    Evaluates at the given order and at twice the order; raises
    QuadratureConvergenceError when the refinements disagree beyond tol.
    """
    results = []
    for q in (order, 2 * order):
        rule = region.rule(q)
        vals = matrix_diagonal_values(T, rule.points, params)
        results.append(complex(np.sum(rule.weights * vals)))
    if abs(results[1] - results[0]) > tol * max(1.0, abs(results[1])):
        raise QuadratureConvergenceError(
            f"refinement moved the integral by {abs(results[1] - results[0]):.2e}"
        )
    return results[1]


def _identity_weight(j, u1, u2, squared_argument):
    r2 = u1 ** 2 + u2 ** 2
    arg = r2 if squared_argument else np.sqrt(r2)
    rho = arg.ravel()
    lag = _laguerre_rows(0.0, j, rho)[j].reshape(arg.shape)
    return np.exp(-r2 / 2.0) * lag


def verify_integral_identity(j, cutoff=6.0, tol=1e-4, variant="rederived",
                             x=(0.0, 0.0), order=64, full_report=False):
    """Four-fold integral of the triple-kernel curvature density.

    With f_x(y,z) = x^z + z^y + y^x the two variants are

    * ``"literal"``   : f e^{+i f} with weight exp(-|u|^2/2) L_j(|u|),
      the form the identity is usually quoted in;
    * ``"rederived"`` : f e^{-i f} with weight exp(-|u|^2/2) L_j(|u|^2),
      re-derived by substituting the closed-form projection kernel into
      the trace of the curvature density.

    Only the rederived variant evaluates to pi^2/(2i); the literal one
    gives the complex conjugate at j = 0 and unrelated values for j >= 1
    (both discrepancies are asserted in the test suite). The integral is
    evaluated over |y|, |z| <= cutoff (component-wise, boxes centered at
    the origin) and re-evaluated on a refined cutoff/order pair; it raises
    QuadratureConvergenceError if the two disagree beyond tol.
    """
    if variant not in ("literal", "rederived"):
        raise ValueError(f"unknown variant {variant!r}")
    if j > 4:
        raise ValueError("levels above 4 are disproportionately expensive; j <= 4")
    x1c, x2c = float(x[0]), float(x[1])
    phase_sign = +1.0 if variant == "literal" else -1.0
    squared = variant == "rederived"

    def evaluate(cut, q):
        nodes, wts = np.polynomial.legendre.leggauss(q)
        nodes = nodes * cut
        wts = wts * cut
        Y1, Y2 = np.meshgrid(nodes, nodes, indexing="ij")
        y1, y2 = Y1.ravel(), Y2.ravel()
        wy = np.outer(wts, wts).ravel()
        # weight factors at x-y and z-x
        g_xy = _identity_weight(j, x1c - y1, x2c - y2, squared)
        g_zx = _identity_weight(j, y1 - x1c, y2 - x2c, squared)
        total = 0.0 + 0.0j
        block = 512
        for lo in range(0, len(y1), block):
            hi = min(lo + block, len(y1))
            yb1 = y1[lo:hi][:, None]
            yb2 = y2[lo:hi][:, None]
            z1 = y1[None, :]
            z2 = y2[None, :]
            f = (x1c * z2 - x2c * z1) + (z1 * yb2 - z2 * yb1) + (yb1 * x2c - yb2 * x1c)
            g_yz = _identity_weight(j, yb1 - z1, yb2 - z2, squared)
            inner = np.sum(wy[None, :] * f * np.exp(phase_sign * 1j * f) * g_yz * g_zx[None, :], axis=1)
            total += np.sum(wy[lo:hi] * g_xy[lo:hi] * inner)
        return total

    coarse = evaluate(cutoff, order)
    fine = evaluate(1.25 * cutoff, order + order // 2)
    if abs(fine - coarse) > max(tol, 1e-12):
        raise QuadratureConvergenceError(
            f"cutoff refinement moved the integral by {abs(fine - coarse):.2e}"
        )
    if full_report:
        return {
            "variant": variant,
            "value": fine,
            "coarse": coarse,
            "target": TARGET_IDENTITY,
            "abs_error": abs(fine - TARGET_IDENTITY),
        }
    return fine
