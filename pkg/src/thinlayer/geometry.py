"""Smooth closed boundary curves and the thin-layer coordinate map.

Curves are stored in arc-length parameterization (|Psi'| = 1), with the
trigonometric (counterclockwise) orientation.  The outward unit normal is
n = (y', -x') and the curvature is kappa = det(Psi', Psi''), so the unit
circle has kappa = +1.  The layer of relative thickness h is the image of
the cylinder [0,1] x T under

    Phi(eta, theta) = Psi(theta) + h * eta * n(theta),

with metric diag(h^2, (1 + h*eta*kappa)^2); admissibility requires
h < h0 = 1 / max |kappa|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, GeometryError
from .torus import TWO_PI, TorusFunction

ARC_TOL = 1e-10


@dataclass(frozen=True)
class BoundaryCurve:
    """Arc-length parameterized smooth simple closed curve."""

    L: float
    x: TorusFunction
    y: TorusFunction
    kappa: TorusFunction
    is_circle: bool = False
    radius: float | None = None

    @property
    def M(self) -> int:
        return max(self.x.M, self.y.M)

    def points(self, theta) -> np.ndarray:
        """Curve points Psi(theta), shape (..., 2)."""
        return np.stack(
            [self.x.evaluate(theta).real, self.y.evaluate(theta).real], axis=-1
        )

    def tangent(self, theta) -> np.ndarray:
        return np.stack(
            [self.x.diff().evaluate(theta).real, self.y.diff().evaluate(theta).real],
            axis=-1,
        )

    def normal(self, theta) -> np.ndarray:
        """Outward unit normal n = (y', -x')."""
        t = self.tangent(theta)
        return np.stack([t[..., 1], -t[..., 0]], axis=-1)

    def h0_max(self) -> float:
        """Largest admissible relative thickness, 1 / max |kappa|."""
        n = max(4 * max(self.M, self.kappa.M), 64)
        return 1.0 / float(np.max(np.abs(self.kappa.values(n).real)))

    def length(self) -> float:
        speed = np.hypot(
            self.x.diff().values(4 * max(self.M, 16)).real,
            self.y.diff().values(4 * max(self.M, 16)).real,
        )
        return float(np.mean(speed)) * self.L


def circle(radius: float = 1.0) -> BoundaryCurve:
    """Circle of the given radius centered at the origin (exact coefficients)."""
    if radius <= 0:
        raise GeometryError("circle radius must be positive")
    L = TWO_PI * radius
    x = TorusFunction.from_modes({1: radius / 2, -1: radius / 2}, L)
    y = TorusFunction.from_modes({1: radius / (2j), -1: -radius / (2j)}, L)
    kappa = TorusFunction.constant(1.0 / radius, L)
    return BoundaryCurve(L=L, x=x, y=y, kappa=kappa, is_circle=True, radius=radius)


def ellipse(a: float, b: float, modes: int | None = None) -> BoundaryCurve:
    """Ellipse with semi-axes (a, b), reparameterized to arc length."""
    if a <= 0 or b <= 0:
        raise GeometryError("ellipse semi-axes must be positive")
    xm = {1: a / 2, -1: a / 2}
    ym = {1: b / (2j), -1: -b / (2j)}
    return curve_from_fourier(xm, ym, TWO_PI, modes=modes)


def curve_from_fourier(
    x_modes: dict,
    y_modes: dict,
    L: float = TWO_PI,
    modes: int | None = None,
    max_iter: int = 100,
) -> BoundaryCurve:
    """Build an arc-length curve from raw Fourier coefficients.

    The input parameterization is arbitrary; a spectral fixed point
    iteration (resample at equal-arc-length nodes, re-interpolate) runs
    until max ||Psi'| - 1| <= 1e-10.  The stored period is the recomputed
    total length and kappa = det(Psi', Psi'') is evaluated spectrally.
    """
    x = TorusFunction.from_modes(x_modes, L)
    y = TorusFunction.from_modes(y_modes, L)
    M = modes if modes is not None else max(64, 4 * max(x.M, y.M))
    x, y = x.pad(M), y.pad(M)
    n = 4 * M

    for _ in range(max_iter):
        xp, yp = x.diff(), y.diff()
        speed = np.hypot(xp.values(n).real, yp.values(n).real)
        if np.max(np.abs(speed - 1.0)) <= ARC_TOL:
            break
        sp = TorusFunction.from_samples(speed, x.L)
        total = sp.mean().real * x.L
        if total <= 0:
            raise GeometryError("degenerate curve: non-positive total length")
        # invert the arc-length function by Newton (it is strictly increasing)
        target = np.arange(n) * (total / n)
        t = target * (x.L / total)
        for _ in range(60):
            res = sp.antiderivative_values(t).real - target
            t -= res / np.maximum(sp.evaluate(t).real, 1e-12)
            if np.max(np.abs(res)) <= 1e-14 * total:
                break
        x = TorusFunction.from_samples(x.evaluate(t), total).pad(M)
        y = TorusFunction.from_samples(y.evaluate(t), total).pad(M)
    else:
        raise ConvergenceError(
            f"arc-length reparameterization did not reach {ARC_TOL} in {max_iter} iterations"
        )

    pts = np.stack([x.values(n).real, y.values(n).real], axis=-1)
    _check_simple(pts)
    xp, yp = x.diff(), y.diff()
    xpp, ypp = xp.diff(), yp.diff()
    kvals = xp.values(n).real * ypp.values(n).real - yp.values(n).real * xpp.values(n).real
    kappa = TorusFunction.from_samples(kvals, x.L).truncate(M)[0].trim(1e-15)
    return BoundaryCurve(L=x.L, x=x, y=y, kappa=kappa)


def load_curve(path) -> BoundaryCurve:
    """Read a curve file: one line 'L <value>', then 'k re_x im_x re_y im_y' lines."""
    xm: dict[int, complex] = {}
    ym: dict[int, complex] = {}
    L = None
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] in ("L", "l"):
                L = float(parts[1])
                continue
            if len(parts) != 5:
                raise GeometryError(f"bad curve file line: {raw!r}")
            k = int(parts[0])
            xm[k] = complex(float(parts[1]), float(parts[2]))
            ym[k] = complex(float(parts[3]), float(parts[4]))
    if L is None:
        raise GeometryError("curve file is missing the 'L <value>' header line")
    return curve_from_fourier(xm, ym, L)


def _check_simple(pts: np.ndarray) -> None:
    """Reject self-intersecting polygons (sampled segment test)."""
    n = pts.shape[0]
    a = pts
    b = np.roll(pts, -1, axis=0)
    d = b - a
    # cross products for the standard segment-intersection orientation test
    idx = np.arange(n)
    i = np.repeat(idx, n)
    j = np.tile(idx, n)
    keep = (j > i + 1) & ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    ai, di = a[i], d[i]
    aj, dj = a[j], d[j]
    denom = di[:, 0] * dj[:, 1] - di[:, 1] * dj[:, 0]
    rel = aj - ai
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rel[:, 0] * dj[:, 1] - rel[:, 1] * dj[:, 0]) / denom
        s = (rel[:, 0] * di[:, 1] - rel[:, 1] * di[:, 0]) / denom
    hit = (np.abs(denom) > 1e-14) & (t > 0) & (t < 1) & (s > 0) & (s < 1)
    if np.any(hit):
        where = int(np.argmax(hit))
        raise GeometryError(
            f"curve is not simple: sampled segments {i[where]} and {j[where]} intersect"
        )


@dataclass(frozen=True)
class LayerGeometry:
    """A boundary curve together with an admissible relative thickness h."""

    curve: BoundaryCurve
    h: float

    def __post_init__(self):
        h0 = self.curve.h0_max()
        if not 0.0 < self.h < h0:
            raise DomainError(
                f"thickness h = {self.h} outside (0, h0) with h0 = {h0:.6g}"
            )
        # layer Jacobian factor must stay positive throughout the layer
        n = max(4 * max(self.curve.M, self.curve.kappa.M), 64)
        kv = self.curve.kappa.values(n).real
        eta = np.linspace(0.0, 1.0, 17)
        w = 1.0 + self.h * np.multiply.outer(eta, kv)
        if np.min(w) <= 0.0:
            raise DomainError("layer map degenerates: 1 + h*eta*kappa <= 0")

    def layer_map(self, eta, theta) -> np.ndarray:
        """Point Phi(eta, theta) = Psi(theta) + h * eta * n(theta)."""
        e = np.asarray(eta, dtype=float)
        if np.any(e < 0.0) or np.any(e > 1.0):
            raise DomainError("eta must lie in [0, 1]")
        base = self.curve.points(theta)
        nrm = self.curve.normal(theta)
        return base + self.h * e[..., None] * nrm if e.ndim else base + self.h * float(e) * nrm

    def metric_at(self, eta, theta):
        """Metric components (g11, g12, g22) = (h^2, 0, (1 + h*eta*kappa)^2)."""
        e = np.asarray(eta, dtype=float)
        if np.any(e < 0.0) or np.any(e > 1.0):
            raise DomainError("eta must lie in [0, 1]")
        kv = self.curve.kappa.evaluate(theta).real
        g22 = (1.0 + self.h * e * kv) ** 2
        g11 = np.broadcast_to(self.h**2, np.shape(g22)).copy() if np.shape(g22) else self.h**2
        g12 = np.zeros_like(g22) if np.shape(g22) else 0.0
        return g11, g12, g22


def h0_max(curve: BoundaryCurve) -> float:
    return curve.h0_max()
