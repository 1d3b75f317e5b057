"""Nystrom boundary-integral backend for general smooth curves.

Representations (G(x, y) = -(1/2pi) ln |x - y|):

* Dirichlet: double-layer density, interior limit (K - I/2) mu = g; the
  smooth kernel makes plain trapezoid quadrature spectrally accurate.
* Neumann: single-layer density plus an additive constant,
  (I/2 + K') mu = g with a rank-one augmentation for the constant
  nullspace; the constant is fixed by the zero-boundary-mean gauge.
* Impedance (experimental): single layer, collocating
  B(S mu) + beta (I/2 + K') mu = g for a caller-supplied trace operator B
  (e.g. B = -d^2/dt^2 for the mixed condition).

The single-layer boundary trace splits into the periodic log kernel,
applied exactly in Fourier space, plus a smooth remainder handled by
trapezoid.  Normal traces come from jump relations (never from
off-boundary differencing); the normal trace of a double-layer field uses
the tangential-derivative identity N = d_t S d_t.
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import BoundaryCurve
from .torus import TorusFunction

DEFAULT_NODES = 256
EVAL_UPSAMPLE = 4


class NystromGrid:
    """Uniform arc-length collocation grid with precomputed kernel matrices."""

    def __init__(self, curve: BoundaryCurve, n: int = DEFAULT_NODES):
        if n < 16 or n % 2:
            raise ValueError("node count must be even and at least 16")
        self.curve = curve
        self.n = n
        L = curve.L
        self.L = L
        self.w = L / n
        self.theta = np.arange(n) * self.w
        self.pts = curve.points(self.theta)
        self.tan = curve.tangent(self.theta)
        self.nrm = np.stack([self.tan[:, 1], -self.tan[:, 0]], axis=-1)
        self.kap = curve.kappa.evaluate(self.theta).real

        d = self.pts[:, None, :] - self.pts[None, :, :]  # Psi_i - Psi_j
        r2 = np.sum(d * d, axis=-1)
        np.fill_diagonal(r2, 1.0)

        # double layer K[i,j] ~ dG/dn(y), adjoint K'[i,j] ~ dG/dn(x)
        dot_ny = -np.einsum("ijk,jk->ij", d, self.nrm)  # (Psi_j - Psi_i). n_j
        dot_nx = np.einsum("ijk,ik->ij", d, self.nrm)  # (Psi_i - Psi_j). n_i
        K = -(1.0 / (2.0 * np.pi)) * dot_ny / r2
        Ka = -(1.0 / (2.0 * np.pi)) * dot_nx / r2
        diag = -self.kap / (4.0 * np.pi)
        np.fill_diagonal(K, diag)
        np.fill_diagonal(Ka, diag)
        self.K = K * self.w
        self.Ka = Ka * self.w

        # single-layer trace: exact Fourier log part + smooth remainder
        dth = self.theta[:, None] - self.theta[None, :]
        sin2 = 4.0 * np.sin(np.pi * dth / L) ** 2
        np.fill_diagonal(sin2, 1.0)
        ratio = r2 / sin2
        np.fill_diagonal(ratio, (L / (2.0 * np.pi)) ** 2)
        R = -(1.0 / (4.0 * np.pi)) * np.log(ratio)
        p = np.fft.fftfreq(n, d=1.0 / n)
        lam = np.zeros(n)
        nz = p != 0
        lam[nz] = L / (4.0 * np.pi * np.abs(p[nz]))
        C = np.fft.ifft(lam[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real
        self.S = C + R * self.w

        # spectral tangential derivative matrix
        dt = (2j * np.pi * p / L)[:, None] * np.fft.fft(np.eye(n), axis=0)
        self.Dt = np.fft.ifft(dt, axis=0).real

    # -- potential evaluation at interior targets -------------------------

    def _fine(self, density: np.ndarray):
        nf = EVAL_UPSAMPLE * self.n
        mu = TorusFunction.from_samples(density, self.L)
        th = np.arange(nf) * (self.L / nf)
        pts = self.curve.points(th)
        tan = self.curve.tangent(th)
        nrm = np.stack([tan[:, 1], -tan[:, 0]], axis=-1)
        return mu.values(nf), pts, nrm, self.L / nf

    def eval_single(self, density, points, constant=0.0):
        mu, src, _, w = self._fine(density)
        d = np.asarray(points, float)[:, None, :] - src[None, :, :]
        r2 = np.sum(d * d, axis=-1)
        kern = -(1.0 / (4.0 * np.pi)) * np.log(r2)
        return kern @ mu * w + constant

    def grad_single(self, density, points):
        mu, src, _, w = self._fine(density)
        d = np.asarray(points, float)[:, None, :] - src[None, :, :]
        r2 = np.sum(d * d, axis=-1)
        g = -(1.0 / (2.0 * np.pi)) * d / r2[..., None]
        return np.einsum("ijk,j->ik", g, mu) * w

    def eval_double(self, density, points):
        mu, src, nrm, w = self._fine(density)
        d = src[None, :, :] - np.asarray(points, float)[:, None, :]  # y - x
        r2 = np.sum(d * d, axis=-1)
        kern = -(1.0 / (2.0 * np.pi)) * np.einsum("ijk,jk->ij", d, nrm) / r2
        return kern @ mu * w

    def grad_double(self, density, points):
        mu, src, nrm, w = self._fine(density)
        d = src[None, :, :] - np.asarray(points, float)[:, None, :]
        r2 = np.sum(d * d, axis=-1)
        dn = np.einsum("ijk,jk->ij", d, nrm)
        g = -(1.0 / (2.0 * np.pi)) * (
            -nrm[None, :, :] / r2[..., None] + 2.0 * dn[..., None] * d / (r2**2)[..., None]
        )
        return np.einsum("ijk,j->ik", g, mu) * w


class NystromHarmonic:
    """Harmonic field represented by a layer density on the boundary."""

    backend = "nystrom-bie"

    def __init__(self, grid, kind, density, constant=0.0, trace_fun=None, normal_fun=None):
        self.grid = grid
        self.curve = grid.curve
        self.kind = kind
        self.density = density
        self.constant = constant
        self._trace = trace_fun
        self._normal = normal_fun

    def trace(self) -> TorusFunction:
        if self._trace is None:
            vals = self.grid.S @ self.density + self.constant
            self._trace = TorusFunction.from_samples(vals, self.grid.L)
        return self._trace

    def normal_trace(self) -> TorusFunction:
        if self._normal is None:
            if self.kind == "single":
                vals = 0.5 * self.density + self.grid.Ka @ self.density
            else:  # double layer: N = d_t S d_t
                vals = self.grid.Dt @ (self.grid.S @ (self.grid.Dt @ self.density))
            self._normal = TorusFunction.from_samples(vals, self.grid.L)
        return self._normal

    def evaluate(self, points) -> np.ndarray:
        if self.kind == "single":
            return self.grid.eval_single(self.density, points, self.constant)
        return self.grid.eval_double(self.density, points)

    def gradient(self, points) -> np.ndarray:
        if self.kind == "single":
            return self.grid.grad_single(self.density, points)
        return self.grid.grad_double(self.density, points)

    def scaled(self, factor: complex) -> "NystromHarmonic":
        return NystromHarmonic(
            self.grid,
            self.kind,
            self.density * factor,
            self.constant * factor,
            None if self._trace is None else self._trace * factor,
            None if self._normal is None else self._normal * factor,
        )

    def h1_norm(self, rho_nodes: int = 24) -> float:
        """L2 norm plus gradient seminorm.

        The gradient part is exact for harmonic fields via the boundary
        identity |grad u|^2 integrated = Re conj(trace) . normal_trace on
        the boundary; the L2 part uses a star-shaped polar quadrature
        (rho_nodes Gauss points radially, 2n trapezoid points angularly),
        which degrades close to the boundary and is meant for diagnostics.
        """
        tr, nt = self.trace(), self.normal_trace()
        M = min(tr.M, nt.M)
        a = tr.truncate(M)[0].c
        b = nt.truncate(M)[0].c
        gsq = self.grid.L * float(np.real(np.sum(np.conj(a) * b)))
        from numpy.polynomial.legendre import leggauss

        xg, wg = leggauss(rho_nodes)
        rho = 0.5 * (xg + 1.0)
        wr = 0.5 * wg
        ctr = np.mean(self.grid.pts, axis=0)
        rel = self.grid.pts - ctr
        jac_t = rel[:, 0] * self.grid.tan[:, 1] - rel[:, 1] * self.grid.tan[:, 0]
        l2 = 0.0
        for r, w in zip(rho, wr):
            pts = ctr + r * rel
            vals = self.evaluate(pts)
            l2 += w * float(np.sum(np.abs(vals) ** 2 * r * np.abs(jac_t))) * self.grid.w
        return math.sqrt(max(l2, 0.0)) + math.sqrt(max(gsq, 0.0))


def _grid_for(curve: BoundaryCurve, n: int | None) -> NystromGrid:
    return NystromGrid(curve, n or DEFAULT_NODES)


def solve_dirichlet_bie(curve, g: TorusFunction, n: int | None = None) -> NystromHarmonic:
    grid = _grid_for(curve, n)
    A = grid.K - 0.5 * np.eye(grid.n)
    mu = np.linalg.solve(A.astype(complex), g.values(grid.n))
    return NystromHarmonic(grid, "double", mu, trace_fun=g)


def solve_neumann_bie(curve, g: TorusFunction, n: int | None = None) -> NystromHarmonic:
    grid = _grid_for(curve, n)
    A = 0.5 * np.eye(grid.n) + grid.Ka
    A1 = A + np.full((grid.n, grid.n), 1.0 / grid.n)
    mu = np.linalg.solve(A1.astype(complex), g.values(grid.n))
    c = -np.mean(grid.S @ mu)
    return NystromHarmonic(grid, "single", mu, constant=c, normal_fun=g)


def solve_impedance_bie(
    curve, trace_op, beta: complex, g: TorusFunction, n: int | None = None
) -> NystromHarmonic:
    """Collocate B(S mu) + beta (I/2 + K') mu = g; experimental path."""
    grid = _grid_for(curve, n)
    B = _operator_matrix(trace_op, grid)
    M = B @ grid.S + beta * (0.5 * np.eye(grid.n) + grid.Ka)
    M1 = M + np.full((grid.n, grid.n), 1.0 / grid.n)
    mu = np.linalg.solve(M1.astype(complex), g.values(grid.n))
    c = -np.mean(grid.S @ mu)
    return NystromHarmonic(grid, "single", mu, constant=c)


def _operator_matrix(trace_op, grid: NystromGrid) -> np.ndarray:
    """Dense collocation matrix of a TorusFunction -> TorusFunction operator."""
    n = grid.n
    cols = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols[:, j] = trace_op(TorusFunction.from_samples(e, grid.L)).values(n)
    return cols
