"""Fields on the layer cylinder C = [0,1] x T, polynomial in the normal coordinate.

A MembraneField is sum_j c_j(theta) * eta^j with TorusFunction coefficients,
so eta-differentiation and eta-integration are exact and the order-by-order
source terms of the rescaled layer Laplacian (``cascade``) vanish to
round-off for a correctly built expansion, not merely to discretization
error.

Sign convention: the codifferential carries the leading minus (see
``forms2d``), so the rescaled operator used here is h^2 (1+h*eta*kappa)^2
times the plain Laplacian; its power-of-h coefficients are what
``cascade_coefficient`` evaluates.

The weighted norms are those of the layer metric diag(h^2, (1+h*eta*kappa)^2):
L2 weight h (1+h*eta*kappa), gradient weights (1+h*eta*kappa)/h for the
eta-derivative and h/(1+h*eta*kappa) for the theta-derivative.  The H1_g
"norm" is literally the sum of the L2 norm and the gradient seminorm.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import CompatibilityError
from .geometry import LayerGeometry
from .torus import TorusFunction

GAUSS_NODES = 32


class MembraneField:
    """Polynomial in eta with TorusFunction coefficients (coefficient of eta^j at index j)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("need at least one coefficient")
        L = coeffs[0].L
        for c in coeffs:
            if abs(c.L - L) > 1e-12 * max(1.0, L):
                raise ValueError("coefficients live on tori of different periods")
        # keep the invariant: leading coefficient nonzero or degree 0
        while len(coeffs) > 1 and not np.any(coeffs[-1].c):
            coeffs.pop()
        self.coeffs = tuple(coeffs)

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, L: float) -> "MembraneField":
        return cls([TorusFunction.zero(0, L)])

    @classmethod
    def from_torus(cls, f: TorusFunction) -> "MembraneField":
        """Field constant in eta."""
        return cls([f])

    # -- queries ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def L(self) -> float:
        return self.coeffs[0].L

    def is_zero(self) -> bool:
        return all(not np.any(c.c) for c in self.coeffs)

    def coeff_scale(self) -> float:
        """Largest coefficient L2 norm; scale for relative residuals."""
        return max(c.l2_norm() for c in self.coeffs)

    def eval_eta(self, eta: float) -> TorusFunction:
        """Horner evaluation at a fixed eta, returning a TorusFunction."""
        out = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            out = c + float(eta) * out
        return out

    def at0(self) -> TorusFunction:
        return self.coeffs[0]

    def at1(self) -> TorusFunction:
        out = self.coeffs[0]
        for c in self.coeffs[1:]:
            out = out + c
        return out

    def values(self, eta_vals: np.ndarray, n_theta: int) -> np.ndarray:
        """Sample on the grid eta_vals x uniform theta grid, shape (n_eta, n_theta)."""
        rows = np.stack([c.values(n_theta) for c in self.coeffs])
        powers = np.power.outer(np.asarray(eta_vals, dtype=float), np.arange(len(self.coeffs)))
        return powers @ rows

    # -- algebra -----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, TorusFunction):
            other = MembraneField.from_torus(other)
        if not isinstance(other, MembraneField):
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        z = TorusFunction.zero(0, self.L)
        a = list(self.coeffs) + [z] * (n - len(self.coeffs))
        b = list(other.coeffs) + [z] * (n - len(other.coeffs))
        return MembraneField([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, TorusFunction):
            other = MembraneField.from_torus(other)
        return self + (-other)

    def __neg__(self):
        return MembraneField([-c for c in self.coeffs])

    def __mul__(self, scalar):
        if isinstance(scalar, (TorusFunction, MembraneField)):
            return NotImplemented
        return MembraneField([c * scalar for c in self.coeffs])

    __rmul__ = __mul__

    def mul_torus(self, g: TorusFunction, policy="expand") -> "MembraneField":
        return MembraneField([c.multiply(g, policy) for c in self.coeffs])

    def mul_eta_power(self, p: int) -> "MembraneField":
        """Multiply by eta^p (shift the coefficient list)."""
        z = TorusFunction.zero(0, self.L)
        return MembraneField([z] * p + list(self.coeffs))

    # -- calculus ------------------------------------------------------

    def eta_diff(self) -> "MembraneField":
        if len(self.coeffs) == 1:
            return MembraneField.zero(self.L)
        return MembraneField([float(j) * c for j, c in enumerate(self.coeffs) if j >= 1])

    def theta_diff(self, order: int = 1) -> "MembraneField":
        return MembraneField([c.diff(order) for c in self.coeffs])

    def eta_antiderivative_from(self, a: float) -> "MembraneField":
        """G(s, theta) = integral_a^s F(eta, theta) d eta, exact; G(a, .) = 0."""
        z = TorusFunction.zero(0, self.L)
        prim = [z] + [c * (1.0 / (j + 1)) for j, c in enumerate(self.coeffs)]
        G = MembraneField(prim)
        return G - G.eval_eta(a)

    def definite_eta_integral(self, lo: float = 0.0, hi: float = 1.0) -> TorusFunction:
        """integral_lo^hi F(eta, .) d eta as a TorusFunction."""
        G = self.eta_antiderivative_from(lo)
        return G.eval_eta(hi)

    def truncate_modes(self, M: int) -> tuple["MembraneField", float]:
        """Truncate every coefficient to |k| <= M; returns dropped L2 energy."""
        out = []
        tail = 0.0
        for c in self.coeffs:
            t, e = c.truncate(M)
            out.append(t)
            tail += e
        return MembraneField(out), tail


# -- the order-by-order source of the rescaled layer operator ---------------


def _kappa_powers(kappa: TorusFunction):
    k2 = kappa.multiply(kappa)
    k3 = k2.multiply(kappa)
    return kappa, k2, k3, kappa.diff()


def cascade_tail_split(
    kappa: TorusFunction,
    deta_prev: MembraneField,
    deta_2: MembraneField,
    field_3: MembraneField,
) -> MembraneField:
    """Source bracket at one order, minus its theta-Laplacian term.

    Takes the normal-derivative data of the two nearest lower orders
    (``deta_prev`` for the previous order, ``deta_2`` two below) and the
    full field three below; the omitted term is d2/dtheta2 of the order-2
    field, which the expansion constructions handle separately because it
    carries the yet-unknown trace.
    """
    k1, k2, k3, k1p = _kappa_powers(kappa)
    d1p = deta_prev.eta_diff()
    out = (d1p.mul_eta_power(1) * 3.0 + deta_prev).mul_torus(k1)
    if not deta_2.is_zero():
        d2p = deta_2.eta_diff()
        out = out + d2p.mul_eta_power(2).mul_torus(k2) * 3.0
        out = out + deta_2.mul_eta_power(1).mul_torus(k2) * 2.0
    if not field_3.is_zero():
        d3 = field_3.eta_diff()
        d3p = d3.eta_diff()
        out = out + d3p.mul_eta_power(3).mul_torus(k3)
        out = out + d3.mul_eta_power(2).mul_torus(k3)
        out = out + field_3.theta_diff(2).mul_eta_power(1).mul_torus(k1)
        out = out - field_3.theta_diff(1).mul_eta_power(1).mul_torus(k1p)
    return out


def cascade_tail(
    kappa: TorusFunction,
    deta_prev: MembraneField,
    field_2: MembraneField,
    field_3: MembraneField,
) -> MembraneField:
    """Full source bracket at one order (all lower-order fields known)."""
    return (
        cascade_tail_split(kappa, deta_prev, field_2.eta_diff(), field_3)
        + field_2.theta_diff(2)
    )


def cascade_coefficient(terms, kappa: TorusFunction, m: int) -> MembraneField:
    """Power-of-h coefficient of the rescaled layer operator applied to a series.

    ``terms`` maps order -> MembraneField; absent orders count as zero.
    A valid expansion makes the returned field vanish for every
    constructed order m.
    """
    L = kappa.L

    def get(j):
        t = terms.get(j) if hasattr(terms, "get") else (terms[j] if 0 <= j < len(terms) else None)
        return t if t is not None else MembraneField.zero(L)

    Tm = get(m)
    rho = Tm.eta_diff().eta_diff()
    return rho + cascade_tail(kappa, get(m - 1).eta_diff(), get(m - 2), get(m - 3))


# -- weighted norms ----------------------------------------------------------


def _quad_grids(F: MembraneField, geom: LayerGeometry, eta_nodes: int):
    xg, wg = leggauss(eta_nodes)
    eta = 0.5 * (xg + 1.0)
    w = 0.5 * wg
    M = max(max((c.M for c in F.coeffs), default=0), geom.curve.kappa.M, 8)
    n_theta = 4 * M
    kv = geom.curve.kappa.values(n_theta).real
    jac = 1.0 + geom.h * np.multiply.outer(eta, kv)  # (n_eta, n_theta)
    return eta, w, n_theta, jac


def l2g_norm(F: MembraneField, geom: LayerGeometry, eta_nodes: int = GAUSS_NODES) -> float:
    """Weighted L2 norm on the layer: (integral h (1+h eta kappa) |F|^2)^(1/2)."""
    eta, w, n_theta, jac = _quad_grids(F, geom, eta_nodes)
    vals = F.values(eta, n_theta)
    dtheta = F.L / n_theta
    s = float(np.sum(w[:, None] * geom.h * jac * np.abs(vals) ** 2) * dtheta)
    return math.sqrt(max(s, 0.0))


def gradient_seminorm(F: MembraneField, geom: LayerGeometry, eta_nodes: int = GAUSS_NODES) -> float:
    """Weighted norm of the differential of F on the layer."""
    eta, w, n_theta, jac = _quad_grids(F, geom, eta_nodes)
    de = F.eta_diff().values(eta, n_theta)
    dt = F.theta_diff().values(eta, n_theta)
    dtheta = F.L / n_theta
    s = float(
        np.sum(w[:, None] * (jac / geom.h * np.abs(de) ** 2 + geom.h / jac * np.abs(dt) ** 2))
        * dtheta
    )
    return math.sqrt(max(s, 0.0))


def h1g_norm(F: MembraneField, geom: LayerGeometry, eta_nodes: int = GAUSS_NODES) -> float:
    """Layer H1 norm: L2 norm plus gradient seminorm (sum, not root-sum-square)."""
    return l2g_norm(F, geom, eta_nodes) + gradient_seminorm(F, geom, eta_nodes)


def poincare_check(F: MembraneField, geom: LayerGeometry, eta_nodes: int = GAUSS_NODES) -> float:
    """Ratio of the weighted L2 norm to the gradient seminorm.

    Requires the gauge: the trace at eta = 0 has (near) zero mean.  The
    thin-layer Poincare inequality bounds the ratio by an h-independent
    constant, which callers assert.
    """
    tr = F.at0()
    mu = tr.mean() * tr.L
    if abs(mu) > 1e-10 * max(1.0, tr.l2_norm()):
        raise CompatibilityError("trace at eta = 0 violates the zero-mean gauge", mean=mu)
    grad = gradient_seminorm(F, geom, eta_nodes)
    if grad == 0.0:
        return 0.0
    return l2g_norm(F, geom, eta_nodes) / grad
