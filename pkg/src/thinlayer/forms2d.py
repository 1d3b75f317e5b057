"""Differential-form calculus on a general 2D metric, realized on grids.

Conventions (fixed once, package-wide):

* The metric G = [[g11, g12], [g12, g22]] has positive signature, so the
  star operator squares to +id on 0- and 2-forms and to -id on 1-forms.
* The codifferential on 1-forms carries a leading minus:

      delta(mu) = -|G|^(-1/2) [ d1( sqrt|G| (g^11 mu1 + g^12 mu2) )
                              + d2( sqrt|G| (g^12 mu1 + g^22 mu2) ) ],

  hence delta(d u) = -Laplacian(u) on flat space.  Every module that
  compares against a flat Laplacian cites this convention.

Fields are sampled on a uniform tensor grid.  Derivatives are spectral
along axes flagged periodic (samples are treated as Fourier data) and
4th-order finite differences otherwise; the method actually used is
recorded in the result metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError

MIN_GRID = 8


@dataclass(frozen=True)
class Metric2:
    """Symmetric positive metric sampled on a grid (arrays broadcast together)."""

    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray

    def __post_init__(self):
        g11, g12, g22 = np.broadcast_arrays(
            np.asarray(self.g11, dtype=float),
            np.asarray(self.g12, dtype=float),
            np.asarray(self.g22, dtype=float),
        )
        object.__setattr__(self, "g11", g11)
        object.__setattr__(self, "g12", g12)
        object.__setattr__(self, "g22", g22)
        det = self.det()
        if np.any(det <= 0.0):
            idx = np.unravel_index(int(np.argmin(det)), det.shape)
            raise DomainError(
                f"metric determinant is not positive at grid point {idx}: det = {det[idx]:.6g}"
            )

    def det(self) -> np.ndarray:
        return self.g11 * self.g22 - self.g12**2

    def sqrt_det(self) -> np.ndarray:
        return np.sqrt(self.det())

    def inverse(self):
        det = self.det()
        return self.g22 / det, -self.g12 / det, self.g11 / det


@dataclass(frozen=True)
class Form0:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values))
        if not np.all(np.isfinite(self.values)):
            raise DomainError("0-form has non-finite samples")


@dataclass(frozen=True)
class Form1:
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self):
        c1, c2 = np.broadcast_arrays(np.asarray(self.c1), np.asarray(self.c2))
        object.__setattr__(self, "c1", c1)
        object.__setattr__(self, "c2", c2)
        if not (np.all(np.isfinite(c1)) and np.all(np.isfinite(c2))):
            raise DomainError("1-form has non-finite samples")


@dataclass(frozen=True)
class Form2:
    density: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "density", np.asarray(self.density))
        if not np.all(np.isfinite(self.density)):
            raise DomainError("2-form has non-finite samples")


# -- pointwise star operators -------------------------------------------------


def hodge_star_0(G: Metric2, T: Form0) -> Form2:
    """star T = sqrt|G| T  (0-form to 2-form)."""
    return Form2(G.sqrt_det() * T.values)


def hodge_star_2(G: Metric2, S: Form2) -> Form0:
    """star S = |G|^(-1/2) nu  (2-form to 0-form)."""
    return Form0(S.density / G.sqrt_det())


def hodge_star_1(G: Metric2, T: Form1) -> Form1:
    """star on 1-forms; applying it twice gives -(T1, T2)."""
    gi11, gi12, gi22 = G.inverse()
    s = G.sqrt_det()
    mu1 = -s * (gi12 * T.c1 + gi22 * T.c2)
    mu2 = s * (gi11 * T.c1 + gi12 * T.c2)
    return Form1(mu1, mu2)


def exterior_product_1form_0form(N: Form1, f: Form0) -> Form1:
    """ext(N) f = (f N1, f N2)."""
    return Form1(f.values * N.c1, f.values * N.c2)


def interior_product_1form_1form(G: Metric2, N: Form1, mu: Form1) -> Form0:
    """int(N) mu = N1 (g^11 mu1 + g^12 mu2) + N2 (g^12 mu1 + g^22 mu2)."""
    gi11, gi12, gi22 = G.inverse()
    return Form0(
        N.c1 * (gi11 * mu.c1 + gi12 * mu.c2) + N.c2 * (gi12 * mu.c1 + gi22 * mu.c2)
    )


# -- grid differentiation ------------------------------------------------------


def _diff_axis(values: np.ndarray, spacing: float, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        n = values.shape[axis]
        k = np.fft.fftfreq(n, d=1.0 / n)
        shape = [1] * values.ndim
        shape[axis] = n
        factor = (2j * np.pi * k / (n * spacing)).reshape(shape)
        out = np.fft.ifft(np.fft.fft(values, axis=axis) * factor, axis=axis)
        return out if np.iscomplexobj(values) else out.real
    # 4th-order centered stencil, one-sided at the two boundary layers
    v = values
    out = np.empty_like(v, dtype=complex if np.iscomplexobj(v) else float)
    sl = lambda s: tuple(s if ax == axis else slice(None) for ax in range(v.ndim))

    def take(shift):
        return np.roll(v, -shift, axis=axis)

    core = (-take(2) + 8 * take(1) - 8 * take(-1) + take(-2)) / (12 * spacing)
    out[...] = core
    n = v.shape[axis]
    if n < 5:
        raise ResolutionError("need at least 5 points per non-periodic axis")
    # boundary stencils (4th order, one-sided / biased)
    c_fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / (12 * spacing)
    c_b1 = np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / (12 * spacing)

    def stencil(pos, coeffs, offsets):
        acc = sum(c * v[sl(slice(pos + o, pos + o + 1))] for c, o in zip(coeffs, offsets))
        out[sl(slice(pos, pos + 1))] = acc

    stencil(0, c_fwd, [0, 1, 2, 3, 4])
    stencil(1, c_b1, [-1, 0, 1, 2, 3])
    stencil(n - 2, -c_b1[::-1], [-3, -2, -1, 0, 1])
    stencil(n - 1, -c_fwd[::-1], [-4, -3, -2, -1, 0])
    return out


def exterior_derivative_0(
    u: Form0, spacing, periodic=(True, True)
) -> tuple[Form1, tuple[str, str]]:
    """d u = (d1 u, d2 u); returns the 1-form and the per-axis method tags."""
    v = u.values
    if v.ndim != 2 or min(v.shape) < MIN_GRID:
        raise ResolutionError(f"grid must be 2-D with at least {MIN_GRID} points per axis")
    d1 = _diff_axis(v, spacing[0], 0, periodic[0])
    d2 = _diff_axis(v, spacing[1], 1, periodic[1])
    method = tuple("spectral" if p else "fd4" for p in periodic)
    return Form1(d1, d2), method


@dataclass(frozen=True)
class CodifferentialResult:
    form: Form0
    method: tuple[str, str]


def codifferential_1form(
    G: Metric2, mu: Form1, spacing, periodic=(True, True)
) -> CodifferentialResult:
    """delta mu on a uniform grid (see module docstring for the sign)."""
    if mu.c1.ndim != 2 or min(mu.c1.shape) < MIN_GRID:
        raise ResolutionError(f"grid must be 2-D with at least {MIN_GRID} points per axis")
    gi11, gi12, gi22 = G.inverse()
    s = G.sqrt_det()
    f1 = s * (gi11 * mu.c1 + gi12 * mu.c2)
    f2 = s * (gi12 * mu.c1 + gi22 * mu.c2)
    d1 = _diff_axis(f1, spacing[0], 0, periodic[0])
    d2 = _diff_axis(f2, spacing[1], 1, periodic[1])
    method = tuple("spectral" if p else "fd4" for p in periodic)
    return CodifferentialResult(Form0(-(d1 + d2) / s), method)


def laplace_beltrami(
    G: Metric2, q, u: Form0, spacing, periodic=(True, True)
) -> CodifferentialResult:
    """delta(q d u) for a scalar coefficient field q; equals -q*Laplacian(u) flat."""
    du, _ = exterior_derivative_0(u, spacing, periodic)
    qa = np.asarray(q)
    return codifferential_1form(G, Form1(qa * du.c1, qa * du.c2), spacing, periodic)
