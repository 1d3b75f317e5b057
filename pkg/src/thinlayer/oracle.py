"""Exact per-mode transmission solutions on the unit disk with an annular layer.

Ground truth for every error measurement.  For each Fourier mode k != 0
the inner field is A r^{|k|} e^{ik theta} and the layer field is
(B r^{|k|} + C r^{-|k|}) e^{ik theta} on 1 <= r <= 1 + h; three linear
conditions determine (A, B, C):

* continuity of the potential at r = 1,
* continuity of the conormal flux at r = 1 (which side carries the
  contrast depends on the problem kind),
* the outer Neumann condition d/dr = f at r = 1 + h.

Mode 0 is absent: the outer compatibility forces a zero-mean f and the
boundary gauge kills the constant, so log-mode solutions never activate.
Each solve verifies its three identities to 1e-12 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import CompatibilityError, UsageError
from .harmonic import check_contrast
from .membrane import MembraneField
from .torus import TWO_PI, TorusFunction

ETA_NODES = 48
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class DiskTransmissionSolution:
    """Per-mode coefficient triples of one exact transmission solve."""

    kind: str  # "P1" | "P2" | "U"
    h: float
    alpha: complex | None
    f: TorusFunction
    k: np.ndarray  # active modes, k != 0
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def inner_trace(self) -> TorusFunction:
        modes = {int(k): a for k, a in zip(self.k, self.A)}
        return TorusFunction.from_modes(modes, self.f.L)

    def membrane_profile(self, k: int, r: np.ndarray) -> np.ndarray:
        i = int(np.nonzero(self.k == k)[0][0])
        m = abs(k)
        return self.B[i] * r**m + self.C[i] * r ** (-m)

    def inner_h1_norm(self) -> float:
        m = np.abs(self.k)
        l2 = float(np.sum(np.abs(self.A) ** 2 * np.pi / (m + 1.0)))
        gr = float(np.sum(np.abs(self.A) ** 2 * 2.0 * np.pi * m))
        return math.sqrt(l2) + math.sqrt(gr)

    def membrane_h1g_norm(self, eta_nodes: int = ETA_NODES) -> float:
        eta, w = _gauss01(eta_nodes)
        r = 1.0 + self.h * eta
        l2 = gr = 0.0
        for i, k in enumerate(self.k):
            m = abs(int(k))
            prof = self.B[i] * r**m + self.C[i] * r ** (-m)
            dprof = self.h * m * (self.B[i] * r ** (m - 1) - self.C[i] * r ** (-m - 1))
            l2 += TWO_PI * float(np.sum(w * self.h * r * np.abs(prof) ** 2))
            gr += TWO_PI * float(
                np.sum(w * (r / self.h * np.abs(dprof) ** 2 + self.h / r * k * k * np.abs(prof) ** 2))
            )
        return math.sqrt(l2) + math.sqrt(gr)


def _gauss01(n: int):
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _active_modes(f: TorusFunction):
    mu = f.mean()
    if abs(mu) > 1e-12 * max(f.l2_norm(), 1e-300):
        raise CompatibilityError("outer Neumann data must have zero mean", mean=mu)
    ks, cs = [], []
    for k, c in zip(f.modes(), f.c):
        if k != 0 and c != 0.0:
            ks.append(int(k))
            cs.append(complex(c))
    return np.array(ks, dtype=int), np.array(cs, dtype=complex)


def _solve(kind: str, h: float, alpha: complex | None, f: TorusFunction):
    if not 0.0 < h < 1.0:
        raise UsageError(f"relative thickness h = {h} outside (0, 1)")
    ks, cs = _active_modes(f)
    A = np.zeros(ks.size, dtype=complex)
    B = np.zeros(ks.size, dtype=complex)
    C = np.zeros(ks.size, dtype=complex)
    for i, (k, fk) in enumerate(zip(ks, cs)):
        m = abs(int(k))
        P = (1.0 + h) ** (m - 1)
        Q = (1.0 + h) ** (-m - 1)
        if kind == "P1":
            flux = [1.0, -alpha, alpha]  # A = alpha (B - C)
        elif kind == "P2":
            flux = [alpha, -1.0, 1.0]  # alpha A = B - C
        else:  # U: zero inner flux, inner field = Dirichlet extension of layer trace
            flux = [0.0, 1.0, -1.0]
        M = np.array(
            [[1.0, -1.0, -1.0], flux, [0.0, m * P, -m * Q]],
            dtype=complex,
        )
        det = np.linalg.det(M)
        assert abs(det) > 1e-300, "singular mode system cannot occur under the hypothesis"
        sol = np.linalg.solve(M, np.array([0.0, 0.0, fk], dtype=complex))
        A[i], B[i], C[i] = sol
        _verify_mode(kind, h, alpha, m, fk, sol)
    return DiskTransmissionSolution(kind=kind, h=h, alpha=alpha, f=f, k=ks, A=A, B=B, C=C)


def _verify_mode(kind, h, alpha, m, fk, sol):
    A, B, C = sol
    scale = max(abs(A), abs(B), abs(C), abs(fk), 1e-300)
    r1 = A - B - C
    if kind == "P1":
        r2 = A - alpha * (B - C)
    elif kind == "P2":
        r2 = alpha * A - (B - C)
    else:
        r2 = B - C
    r3 = m * (B * (1.0 + h) ** (m - 1) - C * (1.0 + h) ** (-m - 1)) - fk
    worst = max(abs(r1), abs(r2), abs(r3)) / scale
    assert worst <= IDENTITY_TOL, f"mode identity check failed: {worst:.3e}"


def solve_disk_P1(h: float, alpha: complex, f: TorusFunction) -> DiskTransmissionSolution:
    """Inner coefficient 1, layer coefficient alpha (bounded-contrast problem)."""
    alpha = check_contrast(alpha, "alpha")
    return _solve("P1", h, alpha, f)


def solve_disk_P2(h: float, alpha: complex, f: TorusFunction) -> DiskTransmissionSolution:
    """Inner coefficient alpha, layer coefficient 1 (insulating-inner problem)."""
    alpha = check_contrast(alpha, "alpha")
    return _solve("P2", h, alpha, f)


def solve_disk_U(h: float, f: TorusFunction) -> DiskTransmissionSolution:
    """Zero-inner-flux annulus problem plus Dirichlet extension inward."""
    return _solve("U", h, None, f)


# -- remainder norms -------------------------------------------------------------


_KIND_FOR_REGIME = {"thm1": "P1", "thm2": "P2", "beta0": "U"}


def remainder_norms(
    oracle: DiskTransmissionSolution,
    series,
    h: float,
    N_use: int | None = None,
    eta_nodes: int = ETA_NODES,
) -> tuple[float, float]:
    """(inner H1 error, membrane layer-H1 error) of a partial sum vs the oracle.

    The oracle and series must share the unit circle, the data and the
    contrast convention (for the insulating-inner regime the oracle must
    have been solved at alpha = beta h^q).
    """
    if N_use is None:
        N_use = series.N
    curve = series.curve
    if not (curve.is_circle and abs(curve.radius - 1.0) < 1e-12):
        raise UsageError("oracle comparisons require the unit circle")
    if abs(oracle.h - h) > 1e-15:
        raise UsageError(f"oracle solved at h = {oracle.h}, asked to compare at h = {h}")
    if _KIND_FOR_REGIME[series.regime] != oracle.kind:
        raise UsageError(f"series regime {series.regime} does not match oracle {oracle.kind}")
    if np.max(np.abs((oracle.f - series.f).c)) > 1e-12 * max(series.f.l2_norm(), 1e-300):
        raise UsageError("oracle and series were built from different data")
    if series.regime == "thm1":
        expected = series.alpha
    elif series.regime == "thm2":
        expected = series.beta * h**series.q
    else:
        expected = None
    if expected is not None and abs(oracle.alpha - expected) > 1e-12 * max(abs(expected), 1e-300):
        raise UsageError(
            f"oracle contrast {oracle.alpha} inconsistent with series at h = {h} ({expected})"
        )

    inner_sum, mem_sum = series.evaluate_partial_sum(h, N_use)

    # inner error, closed form per mode
    bsum = inner_sum.trace()
    diff: dict[int, complex] = {int(k): complex(a) for k, a in zip(oracle.k, oracle.A)}
    for k, c in zip(bsum.modes(), bsum.c):
        if c != 0.0:
            diff[int(k)] = diff.get(int(k), 0.0) - complex(c)
    l2 = gr = 0.0
    for k, d in diff.items():
        m = abs(k)
        l2 += np.pi / (m + 1.0) * abs(d) ** 2
        gr += 2.0 * np.pi * m * abs(d) ** 2
    err_inner = math.sqrt(l2) + math.sqrt(gr)

    # membrane error by per-mode quadrature in eta
    eta, w = _gauss01(eta_nodes)
    r = 1.0 + h * eta
    prof: dict[int, np.ndarray] = {}
    dprof: dict[int, np.ndarray] = {}
    for i, k in enumerate(oracle.k):
        m = abs(int(k))
        prof[int(k)] = oracle.B[i] * r**m + oracle.C[i] * r ** (-m)
        dprof[int(k)] = h * m * (oracle.B[i] * r ** (m - 1) - oracle.C[i] * r ** (-m - 1))
    # subtract the partial-sum polynomial profiles
    degs = np.arange(len(mem_sum.coeffs))
    powers = np.power.outer(eta, degs)  # (n_eta, deg+1)
    dpowers = np.zeros_like(powers)
    if len(mem_sum.coeffs) > 1:
        dpowers[:, :-1] = powers[:, 1:] * degs[1:]
    Mmax = max(c.M for c in mem_sum.coeffs)
    coef = np.stack([c.pad(Mmax).c for c in mem_sum.coeffs])  # (deg+1, 2M+1)
    modes_all = set(prof) | {int(k) for k in range(-Mmax, Mmax + 1)}
    l2 = gr = 0.0
    for k in sorted(modes_all):
        pk = prof.get(k, 0.0)
        dk = dprof.get(k, 0.0)
        if abs(k) <= Mmax:
            col = coef[:, k + Mmax]
            pk = pk - powers @ col
            dk = dk - dpowers @ col
        elif isinstance(pk, float):
            continue
        l2 += TWO_PI * float(np.sum(w * h * r * np.abs(pk) ** 2))
        gr += TWO_PI * float(
            np.sum(w * (r / h * np.abs(dk) ** 2 + h / r * k * k * np.abs(pk) ** 2))
        )
    err_membrane = math.sqrt(l2) + math.sqrt(gr)
    return err_inner, err_membrane
