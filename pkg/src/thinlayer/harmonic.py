"""Harmonic fields on the inner domain with the boundary conditions the
expansions need: gauged Neumann, Dirichlet, and the mixed (Ventcel-type)
condition -u_tt + beta u_n = g.

Two backends sit behind one interface: an exact per-mode solver when the
curve is a centered circle, and a Nystrom boundary-integral solver for
general smooth curves (see ``nystrom``).  Boundary data and traces are
TorusFunctions in the arc-length parameter, so mode k corresponds to the
polar harmonic r^|k| e^{ik phi} on a circle of radius R = L / 2pi.

Norm convention: h1_norm is the L2 norm plus the gradient seminorm (sum of
norms), matching the layer-side convention in ``membrane``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CompatibilityError, ParameterError
from .geometry import BoundaryCurve
from .torus import TorusFunction

NEUMANN_MEAN_TOL = 1e-9


def check_contrast(value: complex, name: str = "contrast") -> complex:
    """Admissibility: Re > 0, or Re = 0 with Im != 0."""
    value = complex(value)
    if not (value.real > 0.0 or (value.real == 0.0 and value.imag != 0.0)):
        raise ParameterError(
            f"{name} = {value} violates the hypothesis Re > 0 or (Re = 0, Im != 0)"
        )
    return value


def _check_zero_mean(g: TorusFunction, what: str, tol: float = NEUMANN_MEAN_TOL):
    mu = g.mean()
    if abs(mu) > tol * max(g.l2_norm(), 1e-300):
        raise CompatibilityError(f"{what} requires zero-mean data", mean=mu)


class HarmonicField:
    """Interface shared by both backends."""

    backend = "abstract"
    curve: BoundaryCurve

    def trace(self) -> TorusFunction:
        raise NotImplementedError

    def normal_trace(self) -> TorusFunction:
        raise NotImplementedError

    def evaluate(self, points) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, points) -> np.ndarray:
        raise NotImplementedError

    def h1_norm(self) -> float:
        raise NotImplementedError

    def scaled(self, factor: complex) -> "HarmonicField":
        raise NotImplementedError


class DiskHarmonic(HarmonicField):
    """Per-mode field sum_k b_k (r/R)^{|k|} e^{ik phi} on a centered disk."""

    backend = "disk-spectral"

    def __init__(self, curve: BoundaryCurve, boundary_modes: TorusFunction):
        if not curve.is_circle:
            raise ParameterError("disk-spectral backend requires a centered circle")
        self.curve = curve
        self.b = boundary_modes

    @property
    def radius(self) -> float:
        return float(self.curve.radius)

    def trace(self) -> TorusFunction:
        return self.b

    def normal_trace(self) -> TorusFunction:
        k = self.b.modes()
        return TorusFunction(self.b.c * np.abs(k) / self.radius, self.b.L)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        r = np.hypot(pts[..., 0], pts[..., 1]) / self.radius
        phi = np.arctan2(pts[..., 1], pts[..., 0])
        k = self.b.modes()
        rad = np.power.outer(r, np.abs(k))
        ang = np.exp(1j * np.multiply.outer(phi, k))
        return (rad * ang) @ self.b.c

    def gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        z = pts[..., 0] + 1j * pts[..., 1]
        k = self.b.modes()
        out = np.zeros(pts.shape[:-1] + (2,), dtype=complex)
        r = np.abs(z) / self.radius
        phi = np.angle(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            for kk, bk in zip(k, self.b.c):
                if kk == 0 or bk == 0.0:
                    continue
                m = abs(kk)
                # d/dr and (1/r) d/dphi of (r/R)^m e^{ik phi}
                rad = r ** (m - 1) / self.radius
                e = np.exp(1j * kk * phi)
                ur = bk * m * rad * e
                ut = bk * 1j * kk * rad * e
                out[..., 0] += ur * np.cos(phi) - ut * np.sin(phi)
                out[..., 1] += ur * np.sin(phi) + ut * np.cos(phi)
        return out

    def l2_norm_sq(self) -> float:
        k = np.abs(self.b.modes())
        R = self.radius
        return float(np.sum(np.abs(self.b.c) ** 2 * 2.0 * np.pi * R**2 / (2.0 * k + 2.0)))

    def grad_norm_sq(self) -> float:
        k = np.abs(self.b.modes())
        return float(np.sum(np.abs(self.b.c) ** 2 * 2.0 * np.pi * k))

    def h1_norm(self) -> float:
        return math.sqrt(self.l2_norm_sq()) + math.sqrt(self.grad_norm_sq())

    def scaled(self, factor: complex) -> "DiskHarmonic":
        return DiskHarmonic(self.curve, self.b * factor)

    def __add__(self, other):
        if not isinstance(other, DiskHarmonic):
            return NotImplemented
        return DiskHarmonic(self.curve, self.b + other.b)


class HarmonicSum(HarmonicField):
    """Weighted sum of fields sharing a curve (partial-sum handle)."""

    backend = "sum"

    def __init__(self, fields, weights):
        if not fields:
            raise ValueError("empty sum")
        self.curve = fields[0].curve
        self.fields = list(fields)
        self.weights = [complex(w) for w in weights]

    def trace(self) -> TorusFunction:
        out = self.fields[0].trace() * self.weights[0]
        for f, w in zip(self.fields[1:], self.weights[1:]):
            out = out + f.trace() * w
        return out

    def normal_trace(self) -> TorusFunction:
        out = self.fields[0].normal_trace() * self.weights[0]
        for f, w in zip(self.fields[1:], self.weights[1:]):
            out = out + f.normal_trace() * w
        return out

    def evaluate(self, points) -> np.ndarray:
        out = self.weights[0] * self.fields[0].evaluate(points)
        for f, w in zip(self.fields[1:], self.weights[1:]):
            out = out + w * f.evaluate(points)
        return out

    def gradient(self, points) -> np.ndarray:
        out = self.weights[0] * self.fields[0].gradient(points)
        for f, w in zip(self.fields[1:], self.weights[1:]):
            out = out + w * f.gradient(points)
        return out

    def collapse(self):
        """Collapse to a single DiskHarmonic when every member is one."""
        if all(isinstance(f, DiskHarmonic) for f in self.fields):
            b = self.fields[0].b * self.weights[0]
            for f, w in zip(self.fields[1:], self.weights[1:]):
                b = b + f.b * w
            return DiskHarmonic(self.curve, b)
        return self

    def h1_norm(self) -> float:
        c = self.collapse()
        if isinstance(c, DiskHarmonic):
            return c.h1_norm()
        raise NotImplementedError("H1 norm of a mixed-backend sum")


# -- solvers -------------------------------------------------------------------


def solve_dirichlet(curve: BoundaryCurve, g: TorusFunction, backend=None) -> HarmonicField:
    """Harmonic field with trace g on the boundary."""
    backend = backend or ("disk-spectral" if curve.is_circle else "nystrom-bie")
    if backend == "disk-spectral":
        return DiskHarmonic(curve, g)
    from . import nystrom

    return nystrom.solve_dirichlet_bie(curve, g)


def solve_neumann_gauged(curve: BoundaryCurve, g: TorusFunction, backend=None) -> HarmonicField:
    """Harmonic field with normal derivative g and zero boundary mean.

    The data must satisfy the Neumann compatibility condition
    |mean(g)| <= 1e-9 ||g||; violations raise CompatibilityError carrying
    the offending mean (a broken recursion upstream shows up here).
    """
    _check_zero_mean(g, "interior Neumann problem")
    backend = backend or ("disk-spectral" if curve.is_circle else "nystrom-bie")
    if backend == "disk-spectral":
        R = float(curve.radius)
        k = g.modes()
        b = np.zeros_like(g.c)
        nz = k != 0
        b[nz] = g.c[nz] * R / np.abs(k[nz])
        return DiskHarmonic(curve, TorusFunction(b, g.L))
    from . import nystrom

    return nystrom.solve_neumann_bie(curve, g)


def solve_ventcel(
    curve: BoundaryCurve, beta: complex, g: TorusFunction, backend=None
) -> HarmonicField:
    """Harmonic field with -u_tt + beta u_n = g on the boundary, zero-mean trace.

    The general-curve path goes through the experimental single-layer
    impedance solver and is excluded from the quantitative acceptance runs.
    """
    beta = check_contrast(beta, "beta")
    _check_zero_mean(g, "mixed (Ventcel) problem")
    backend = backend or ("disk-spectral" if curve.is_circle else "nystrom-bie")
    if backend == "disk-spectral":
        R = float(curve.radius)
        k = g.modes()
        b = np.zeros_like(g.c)
        nz = k != 0
        denom = (k[nz].astype(float) / R) ** 2 + beta * np.abs(k[nz]) / R
        assert np.min(np.abs(denom)) > 0.0, "mode resonance impossible under the hypothesis"
        b[nz] = g.c[nz] / denom
        return DiskHarmonic(curve, TorusFunction(b, g.L))
    from . import nystrom

    def op(trace: TorusFunction) -> TorusFunction:
        return -trace.diff(2)

    return nystrom.solve_impedance_bie(curve, op, beta, g)


def h1_norm(field: HarmonicField) -> float:
    return field.h1_norm()


def trace(field: HarmonicField) -> TorusFunction:
    return field.trace()


def normal_trace(field: HarmonicField) -> TorusFunction:
    return field.normal_trace()


def evaluate(field: HarmonicField, points) -> np.ndarray:
    return field.evaluate(points)
