"""Order-by-order construction of the layer expansions and the low-order
approximate boundary conditions.

Two regimes are built from the same cascade machinery:

* ``expand_insulating_membrane`` ("thm1"): inner coefficient 1, layer
  coefficient alpha bounded; inner terms solve gauged Neumann problems and
  the series starts at order 0.
* ``expand_insulating_inner`` ("thm2"): inner coefficient alpha = beta h^q,
  layer coefficient 1; the series starts at order -1 with a mixed
  (Ventcel) problem when q = 1 and Dirichlet problems when q >= 2.
  ``expand_zero_flux_limit`` ("beta0") is the q >= 2 recursion with the
  flux coupling switched off, approximating the zero-inner-flux limit.

Every constructed series stores residual diagnostics: the cascade
coefficient at each order, the outer boundary and transmission identities,
and the gauges.  A correct construction drives all of them to round-off,
which is what the residual CLI and the acceptance suite assert.

Derivative propagation integrates the full cascade bracket from eta = 1.
In the insulating-inner regime the order-k trace equation is

    -u_tt(trace at eta=1) = -beta u_n(inner term k+1-q) + phi_k
                            - integral_0^1 w(eta) u_tt_eta(order k) d eta

with w = eta by default; the sign of the flux term and the inclusion of
the full curvature rows in phi_k were fixed against the exact per-mode
disk solution (both choices are the unique ones that zero the residual
suite and reproduce the oracle's Taylor coefficients).  The alternative
weight w = eta - 1 is selectable to demonstrate that the residuals
discriminate it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CompatibilityError, ParameterError, UsageError
from .geometry import BoundaryCurve
from .harmonic import (
    DiskHarmonic,
    HarmonicField,
    HarmonicSum,
    check_contrast,
    solve_dirichlet,
    solve_neumann_gauged,
    solve_ventcel,
)
from .membrane import MembraneField, cascade_coefficient, cascade_tail, cascade_tail_split
from .torus import TorusFunction

DEFAULT_MODES = 64
RESIDUAL_TOL = 1e-9


@dataclass
class ExpansionSeries:
    """Indexed family of (inner, membrane) expansion terms plus diagnostics."""

    regime: str  # "thm1" | "thm2" | "beta0"
    curve: BoundaryCurve
    f: TorusFunction
    start: int
    N: int
    inner: dict[int, HarmonicField]
    membrane: dict[int, MembraneField]
    deta: dict[int, MembraneField]  # normal-derivative data, orders start..N+2
    alpha: complex | None = None
    beta: complex | None = None
    q: int | None = None
    weight_variant: str = "eta"
    tail_energy: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def orders(self):
        return range(self.start, self.N + 1)

    def scale(self) -> float:
        s = 0.0
        for k in self.orders():
            s = max(s, self.membrane[k].coeff_scale())
        return s or 1.0

    def evaluate_partial_sum(self, h: float, N_use: int | None = None):
        """(inner, membrane) partial sums sum h^k term_k for k = start..N_use."""
        if N_use is None:
            N_use = self.N
        if N_use > self.N or N_use < self.start:
            raise UsageError(f"N_use = {N_use} outside constructed range [{self.start}, {self.N}]")
        if not 0.0 < h < self.curve.h0_max():
            raise UsageError(f"h = {h} outside (0, h0) for this curve")
        ks = list(range(self.start, N_use + 1))
        weights = [h**k for k in ks]
        inner = HarmonicSum([self.inner[k] for k in ks], weights).collapse()
        mem = MembraneField.zero(self.f.L)
        for k, w in zip(ks, weights):
            mem = mem + self.membrane[k] * w
        return inner, mem

    def residual_report(self) -> dict:
        """Max relative residuals per class (cascade, boundary, transmission, gauge)."""
        return self.diagnostics.get("residuals", {})

    def max_residual(self) -> float:
        rep = self.residual_report()
        vals = [v for per_order in rep.values() for v in per_order.values()]
        return max(vals) if vals else 0.0


def _zero_field(L: float) -> MembraneField:
    return MembraneField.zero(L)


def _compat_guard(g: TorusFunction, order: int, what: str, tol: float = 1e-9):
    mu = g.mean()
    if abs(mu) > tol * max(g.l2_norm(), 1e-300):
        raise CompatibilityError(
            f"{what} at order {order} has nonzero mean; the recursion is inconsistent",
            mean=mu,
        )


def _residual_suite(series: ExpansionSeries) -> None:
    """Fill diagnostics['residuals'] with relative residual magnitudes."""
    curve = series.curve
    kappa = curve.kappa
    f = series.f
    scale = series.scale()
    L = f.L
    res: dict[int, dict[str, float]] = {}

    def rel(x: float) -> float:
        return x / scale

    for m in series.orders():
        entry: dict[str, float] = {}
        rho = cascade_coefficient(series.membrane, kappa, m)
        entry["cascade"] = rel(rho.coeff_scale() if not rho.is_zero() else 0.0)
        # outer boundary: deta_m(1) = delta_{m,1} f
        bc = series.deta[m].at1() - (f if m == 1 else TorusFunction.zero(0, L))
        entry["boundary"] = rel(bc.l2_norm())
        # trace continuity: inner trace = membrane value at eta 0
        ctd = series.inner[m].trace() - series.membrane[m].at0()
        entry["trace"] = rel(ctd.l2_norm())
        # flux transmission
        if series.regime == "thm1":
            ctn = series.inner[m].normal_trace() - series.alpha * series.deta[m + 1].at0()
            entry["flux"] = rel(ctn.l2_norm())
            gauge = abs(series.inner[m].trace().mean()) * L
            entry["gauge"] = rel(gauge)
        else:
            lsrc = m + 1 + (series.q if series.q else 0)
            if series.regime == "beta0":
                ctn = series.deta[m].at0()
                entry["flux"] = rel(ctn.l2_norm())
            elif lsrc in series.deta:
                ctn = series.deta[lsrc].at0() - series.beta * series.inner[m].normal_trace()
                entry["flux"] = rel(ctn.l2_norm())
            gauge = abs(series.membrane[m].at0().mean()) * L
            entry["gauge"] = rel(gauge)
        res[m] = entry
    series.diagnostics["residuals"] = res


# -- insulating membrane (bounded contrast) -------------------------------------


def expand_insulating_membrane(
    curve: BoundaryCurve,
    f: TorusFunction,
    alpha: complex,
    N: int,
    modes: int = DEFAULT_MODES,
    backend: str | None = None,
) -> ExpansionSeries:
    """Series for the bounded-contrast layer, orders 0..N (CLI problem "thm1").

    Per order k: integrate the cascade from eta = 1 for the next
    normal-derivative profile, solve the gauged Neumann problem with flux
    alpha times that profile at eta = 0, then assemble the membrane term
    from its normal derivative plus the inner trace.  Terms do not depend
    on h.  The contrast must satisfy Re(alpha) > 0 or be purely imaginary;
    |alpha| <= 1 is the regime of validity but deliberately not enforced
    (the crossover study feeds alpha ~ 1/h to show the expansion failing).
    """
    alpha = check_contrast(alpha, "alpha")
    L = f.L
    if abs(curve.L - L) > 1e-9 * max(1.0, L):
        raise UsageError("data and curve have different periods")
    kappa = curve.kappa
    zero = _zero_field(L)
    deta: dict[int, MembraneField] = {0: zero}
    mem: dict[int, MembraneField] = {}
    inner: dict[int, HarmonicField] = {}
    tail = 0.0
    for k in range(0, N + 1):
        tailf = cascade_tail(kappa, deta[k], mem.get(k - 1, zero), mem.get(k - 2, zero))
        nxt = -tailf.eta_antiderivative_from(1.0)
        if k == 0:
            nxt = nxt + f
        nxt, e = nxt.truncate_modes(modes)
        tail += e
        deta[k + 1] = nxt
        g = alpha * nxt.at0()
        _compat_guard(g, k, "Neumann data")
        inner[k] = solve_neumann_gauged(curve, g, backend=backend)
        term = deta[k].eta_antiderivative_from(0.0) + inner[k].trace()
        term, e = term.truncate_modes(modes)
        tail += e
        mem[k] = term
    # one more derivative profile so flux residuals can be checked at order N
    tailf = cascade_tail(kappa, deta[N + 1], mem.get(N, zero), mem.get(N - 1, zero))
    deta[N + 2] = (-tailf.eta_antiderivative_from(1.0)).truncate_modes(modes)[0]

    series = ExpansionSeries(
        regime="thm1",
        curve=curve,
        f=f,
        start=0,
        N=N,
        inner=inner,
        membrane=mem,
        deta=deta,
        alpha=alpha,
        tail_energy=tail,
    )
    _residual_suite(series)
    return series


# -- insulating inner domain ------------------------------------------------


def expand_insulating_inner(
    curve: BoundaryCurve,
    f: TorusFunction,
    beta: complex,
    q: int,
    N: int,
    modes: int = DEFAULT_MODES,
    weight_variant: str = "eta",
    backend: str | None = None,
) -> ExpansionSeries:
    """Series for inner contrast alpha = beta h^q, orders -1..N (CLI "thm2")."""
    beta = check_contrast(beta, "beta")
    if q < 1:
        raise ParameterError(f"q must be a positive integer, got {q}")
    return _inner_recursion(curve, f, beta, q, N, modes, weight_variant, "thm2", backend)


def expand_zero_flux_limit(
    curve: BoundaryCurve,
    f: TorusFunction,
    N: int,
    modes: int = DEFAULT_MODES,
    weight_variant: str = "eta",
    backend: str | None = None,
) -> ExpansionSeries:
    """Series approximating the zero-inner-flux limit, orders -1..N (CLI "beta0")."""
    return _inner_recursion(curve, f, 0.0, None, N, modes, weight_variant, "beta0", backend)


def _inner_recursion(curve, f, beta, q, N, modes, weight_variant, regime, backend):
    if weight_variant not in ("eta", "eta-1"):
        raise UsageError(f"unknown weight variant {weight_variant!r}")
    L = f.L
    if abs(curve.L - L) > 1e-9 * max(1.0, L):
        raise UsageError("data and curve have different periods")
    kappa = curve.kappa
    zero = _zero_field(L)
    deta: dict[int, MembraneField] = {-1: zero, 0: zero}
    mem: dict[int, MembraneField] = {}
    inner: dict[int, HarmonicField] = {}
    tail = 0.0
    ventcel = regime == "thm2" and q == 1

    # order -1 bootstrap
    if ventcel:
        inner[-1] = solve_ventcel(curve, beta, f, backend=backend)
        mem[-1] = MembraneField.from_torus(inner[-1].trace())
    else:
        _compat_guard(f, -1, "boundary data")
        tr = f.solve_neg_d2()
        mem[-1] = MembraneField.from_torus(tr)
        inner[-1] = solve_dirichlet(curve, tr, backend=backend)

    # derivative profile at order 1 via the cascade (boundary term f at eta = 1)
    tail1 = cascade_tail(kappa, deta[0], mem[-1], zero)
    deta[1] = (f - tail1.eta_antiderivative_from(1.0)).truncate_modes(modes)[0]

    for k in range(0, N + 1):
        phi = cascade_tail_split(
            kappa, deta[k + 1], deta[k], mem.get(k - 1, zero)
        ).definite_eta_integral(0.0, 1.0)
        dk_tt = deta[k].theta_diff(2)
        if ventcel:
            # weight 1 - eta pairs with anchoring the trace at eta = 0
            wterm = dk_tt - dk_tt.mul_eta_power(1)
            g = phi + wterm.definite_eta_integral(0.0, 1.0)
            _compat_guard(g, k, "mixed-condition data")
            inner[k] = solve_ventcel(curve, beta, g, backend=backend)
            term = deta[k].eta_antiderivative_from(0.0) + inner[k].trace()
        else:
            if weight_variant == "eta":
                wterm = dk_tt.mul_eta_power(1)
            else:
                wterm = dk_tt.mul_eta_power(1) - dk_tt
            rhs = phi - wterm.definite_eta_integral(0.0, 1.0)
            src = k + 1 - (q if q is not None else 2)
            if regime == "thm2" and src >= -1:
                rhs = rhs - beta * inner[src].normal_trace()
            _compat_guard(rhs, k, "trace equation data")
            trace1 = rhs.solve_neg_d2()
            body = deta[k].eta_antiderivative_from(1.0)
            # gauge: value at eta = 0 must have zero mean; fix mode 0 of the
            # eta = 1 trace accordingly (only order -1 is pinned by the data)
            mean_fix = body.at0().mean()
            trace1 = trace1 - TorusFunction.constant(mean_fix, L)
            term = body + trace1
            inner[k] = solve_dirichlet(curve, term.at0(), backend=backend)
        term, e = term.truncate_modes(modes)
        tail += e
        mem[k] = term
        # propagate the next derivative profile (full bracket, now that the
        # order-k field is assembled)
        tailf = cascade_tail(kappa, deta[k + 1], mem[k], mem.get(k - 1, zero))
        deta[k + 2] = (-tailf.eta_antiderivative_from(1.0)).truncate_modes(modes)[0]

    series = ExpansionSeries(
        regime=regime,
        curve=curve,
        f=f,
        start=-1,
        N=N,
        inner=inner,
        membrane=mem,
        deta=deta,
        beta=None if regime == "beta0" else beta,
        q=q,
        weight_variant=weight_variant,
        tail_energy=tail,
    )
    _residual_suite(series)
    return series


# -- approximate boundary conditions --------------------------------------------


def abc_order0(curve: BoundaryCurve, f: TorusFunction, alpha: complex) -> HarmonicField:
    """Order-0 condition u_n = alpha f; identical to the order-0 series term."""
    alpha = check_contrast(alpha, "alpha")
    return solve_neumann_gauged(curve, alpha * f)


def abc_order1(
    curve: BoundaryCurve, f: TorusFunction, alpha: complex, h: float
) -> HarmonicField:
    """Order-1 condition u_n - alpha h u_tt = alpha (1 + h kappa) f."""
    alpha = check_contrast(alpha, "alpha")
    if not 0.0 < h < curve.h0_max():
        raise ParameterError(f"h = {h} outside (0, h0)")
    rhs = alpha * (f + h * f.multiply(curve.kappa))
    if curve.is_circle:
        _mean_zero_or_raise(rhs)
        R = float(curve.radius)
        k = rhs.modes()
        denom = np.abs(k) / R + alpha * h * (k.astype(float) / R) ** 2
        b = np.zeros_like(rhs.c)
        nz = k != 0
        assert np.min(np.abs(denom[nz])) > 0.0, "resonance impossible under the hypothesis"
        b[nz] = rhs.c[nz] / denom[nz]
        return DiskHarmonic(curve, TorusFunction(b, rhs.L))
    from . import nystrom

    def op(trace: TorusFunction) -> TorusFunction:
        return -alpha * h * trace.diff(2)

    return nystrom.solve_impedance_bie(curve, op, 1.0, rhs)


def abc_ventcel_order0(
    curve: BoundaryCurve, f: TorusFunction, beta: complex, h: float
) -> HarmonicField:
    """Order-0 condition of the insulating-inner regime at q = 1:

    -(1 - h kappa / 2) u_tt + (h kappa' / 2) u_t + beta u_n = ((1 + h kappa)/h) f.
    """
    beta = check_contrast(beta, "beta")
    if not 0.0 < h < curve.h0_max():
        raise ParameterError(f"h = {h} outside (0, h0)")
    kap = curve.kappa
    rhs = (1.0 / h) * (f + h * f.multiply(kap))
    if curve.is_circle:
        _mean_zero_or_raise(rhs)
        R = float(curve.radius)
        kcurv = 1.0 / R
        k = rhs.modes()
        denom = (1.0 - h * kcurv / 2.0) * (k.astype(float) / R) ** 2 + beta * np.abs(k) / R
        b = np.zeros_like(rhs.c)
        nz = k != 0
        b[nz] = rhs.c[nz] / denom[nz]
        return DiskHarmonic(curve, TorusFunction(b, rhs.L))
    from . import nystrom

    kp = kap.diff()

    def op(trace: TorusFunction) -> TorusFunction:
        tt = trace.diff(2)
        t1 = trace.diff(1)
        out = -tt + 0.5 * h * tt.multiply(kap) + 0.5 * h * t1.multiply(kp)
        return out

    return nystrom.solve_impedance_bie(curve, op, beta, rhs)


def _mean_zero_or_raise(g: TorusFunction, tol: float = 1e-9):
    mu = g.mean()
    if abs(mu) > tol * max(g.l2_norm(), 1e-300):
        raise CompatibilityError("boundary data must have zero mean", mean=mu)


# CLI problem-name dispatch table
REGIME_BUILDERS = {
    "thm1": expand_insulating_membrane,
    "thm2": expand_insulating_inner,
    "beta0": expand_zero_flux_limit,
}
