"""Spectral algebra for periodic functions on the boundary torus T = R/LZ.

A function is held as a finite Fourier series

    f(theta) = sum_{|k| <= M} c_k exp(2i pi k theta / L),

so differentiation, convolution products and the zero-mean inversion of
-d^2/dtheta^2 are exact on the stored modes.  Sobolev norms use the integer
mode index k regardless of L (the L = 2pi normalization is the reference
convention; keeping integer k makes norms comparable across periods).
"""

from __future__ import annotations

import math
import re

import numpy as np

from .errors import CompatibilityError

TWO_PI = 2.0 * math.pi

_MODE_RE = re.compile(r"^\s*(\d+)\s*:\s*(.+?)\s*$")


def parse_complex(text: str) -> complex:
    """Parse 're', 'im i', or 're+im i' strings such as '0.5', 'i', '1e-2-0.3i'."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty complex literal")
    s = s.replace("I", "i")
    # bare 'i' forms: i, +i, -i, 0.5+i, 0.3-i
    s = re.sub(r"(?<![0-9.])i", "1i", s)
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"cannot parse complex value {text!r}") from exc


class TorusFunction:
    """Complex-valued periodic function stored by Fourier coefficients.

    ``c`` is a dense coefficient array for modes -M..M (index k + M).
    Instances are immutable by convention: every operation returns a new
    object, so values can be shared freely across threads.
    """

    __slots__ = ("L", "c")

    def __init__(self, coeffs, L: float = TWO_PI):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficient array must be 1-D with odd length")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Fourier coefficient")
        self.c = c
        self.L = float(L)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, M: int = 0, L: float = TWO_PI) -> "TorusFunction":
        return cls(np.zeros(2 * M + 1, dtype=complex), L)

    @classmethod
    def constant(cls, value, L: float = TWO_PI) -> "TorusFunction":
        return cls(np.array([value], dtype=complex), L)

    @classmethod
    def from_modes(cls, modes: dict, L: float = TWO_PI) -> "TorusFunction":
        """Build from a {mode index: coefficient} mapping."""
        if not modes:
            return cls.zero(0, L)
        M = max(abs(int(k)) for k in modes)
        c = np.zeros(2 * M + 1, dtype=complex)
        for k, v in modes.items():
            c[int(k) + M] += v
        return cls(c, L)

    @classmethod
    def from_samples(cls, values, L: float = TWO_PI) -> "TorusFunction":
        """Interpolate n uniform samples; keeps modes |k| <= (n-1)//2."""
        v = np.asarray(values, dtype=complex)
        n = v.size
        spec = np.fft.fft(v) / n
        M = (n - 1) // 2
        c = np.zeros(2 * M + 1, dtype=complex)
        c[M] = spec[0]
        for k in range(1, M + 1):
            c[M + k] = spec[k]
            c[M - k] = spec[n - k]
        return cls(c, L)

    @classmethod
    def from_mode_string(cls, text: str, L: float = TWO_PI) -> "TorusFunction":
        """Parse boundary data given as 'k:re[+im i]' pairs.

        Each entry contributes v/2 to mode +k and conj(v)/2 to mode -k
        (real symmetric completion), so '1:1.0,3:0.3' is
        cos(theta) + 0.3 cos(3 theta).  An entry with k = 0 adds Re(v).
        """
        modes: dict[int, complex] = {}
        for part in text.split(","):
            if not part.strip():
                continue
            m = _MODE_RE.match(part)
            if m is None:
                raise ValueError(f"bad mode entry {part!r}; expected 'k:value'")
            k = int(m.group(1))
            v = parse_complex(m.group(2))
            if k == 0:
                modes[0] = modes.get(0, 0.0) + v.real
            else:
                modes[k] = modes.get(k, 0.0) + v / 2.0
                modes[-k] = modes.get(-k, 0.0) + v.conjugate() / 2.0
        return cls.from_modes(modes, L)

    # -- basic queries -----------------------------------------------------

    @property
    def M(self) -> int:
        return (self.c.size - 1) // 2

    def coeff(self, k: int) -> complex:
        if abs(k) > self.M:
            return 0.0 + 0.0j
        return complex(self.c[k + self.M])

    def mean(self) -> complex:
        """Mode-0 coefficient, i.e. (1/L) * integral over the torus."""
        return complex(self.c[self.M])

    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def is_real(self, tol: float = 1e-14) -> bool:
        scale = np.max(np.abs(self.c)) or 1.0
        return bool(np.max(np.abs(self.c - np.conj(self.c[::-1]))) <= tol * scale)

    # -- arithmetic --------------------------------------------------------

    def pad(self, M: int) -> "TorusFunction":
        if M < self.M:
            raise ValueError("pad target smaller than current truncation")
        if M == self.M:
            return self
        c = np.zeros(2 * M + 1, dtype=complex)
        c[M - self.M : M + self.M + 1] = self.c
        return TorusFunction(c, self.L)

    def _check_mate(self, other: "TorusFunction") -> None:
        if abs(other.L - self.L) > 1e-12 * max(1.0, abs(self.L)):
            raise ValueError("operands live on tori of different periods")

    def __add__(self, other):
        if not isinstance(other, TorusFunction):
            return NotImplemented
        self._check_mate(other)
        M = max(self.M, other.M)
        return TorusFunction(self.pad(M).c + other.pad(M).c, self.L)

    def __sub__(self, other):
        if not isinstance(other, TorusFunction):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return TorusFunction(-self.c, self.L)

    def __mul__(self, scalar):
        if isinstance(scalar, TorusFunction):
            return NotImplemented
        return TorusFunction(self.c * scalar, self.L)

    __rmul__ = __mul__

    def multiply(self, other: "TorusFunction", policy="expand") -> "TorusFunction":
        """Pointwise product by coefficient convolution.

        ``policy`` is either "expand" (exact, M_out = M_f + M_g) or an
        integer M to truncate the result to.
        """
        self._check_mate(other)
        prod = TorusFunction(np.convolve(self.c, other.c), self.L)
        if policy == "expand":
            return prod
        return prod.truncate(int(policy))[0]

    def diff(self, order: int = 1) -> "TorusFunction":
        """Derivative of the given order: multiply mode k by (2i pi k / L)^n."""
        k = self.modes()
        return TorusFunction(self.c * (2j * np.pi * k / self.L) ** order, self.L)

    def solve_neg_d2(self, rel_tol: float = 1e-10) -> "TorusFunction":
        """Unique zero-mean u with -u'' = f; requires f to have (near) zero mean."""
        scale = self.l2_norm()
        mu = self.mean()
        if abs(mu) > rel_tol * max(scale, 1e-300):
            raise CompatibilityError(
                "right-hand side of -d2/dtheta2 has nonzero mean", mean=mu
            )
        k = self.modes()
        fac = np.zeros_like(self.c)
        nz = k != 0
        fac[nz] = 1.0 / (2.0 * np.pi * k[nz] / self.L) ** 2
        return TorusFunction(self.c * fac, self.L)

    def antiderivative_values(self, theta) -> np.ndarray:
        """Values of F(theta) = integral_0^theta f, valid for any f (mode 0 gives a linear part)."""
        th = np.asarray(theta, dtype=float)
        k = self.modes()
        out = np.full(th.shape, self.mean(), dtype=complex) * th
        for kk, ck in zip(k, self.c):
            if kk == 0 or ck == 0.0:
                continue
            w = 2j * np.pi * kk / self.L
            out = out + ck * (np.exp(w * th) - 1.0) / w
        return out

    # -- norms and evaluation ----------------------------------------------

    def l2_norm(self) -> float:
        """L2 norm over one period: sqrt(L * sum |c_k|^2) (Parseval)."""
        return math.sqrt(self.L * float(np.sum(np.abs(self.c) ** 2)))

    def sobolev_norm(self, s: float) -> float:
        k = self.modes()
        return math.sqrt(float(np.sum((1.0 + k.astype(float) ** 2) ** s * np.abs(self.c) ** 2)))

    def sup_norm(self) -> float:
        n = max(4 * self.M, 16)
        return float(np.max(np.abs(self.values(n))))

    def values(self, n: int) -> np.ndarray:
        """Samples at theta_j = j L / n.  Exact synthesis; requires n >= 2M+1."""
        if n < 2 * self.M + 1:
            return self.evaluate(np.arange(n) * (self.L / n))
        spec = np.zeros(n, dtype=complex)
        M = self.M
        spec[0] = self.c[M]
        for k in range(1, M + 1):
            spec[k] = self.c[M + k]
            spec[n - k] = self.c[M - k]
        return np.fft.ifft(spec) * n

    def evaluate(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        k = self.modes()
        phase = np.exp(2j * np.pi * np.multiply.outer(th, k) / self.L)
        return phase @ self.c

    def truncate(self, M: int) -> tuple["TorusFunction", float]:
        """Drop modes beyond M; returns (truncated, dropped L2 energy)."""
        if M >= self.M:
            return self, 0.0
        lo = self.M - M
        kept = self.c[lo : lo + 2 * M + 1]
        dropped = np.concatenate([self.c[:lo], self.c[lo + 2 * M + 1 :]])
        tail = self.L * float(np.sum(np.abs(dropped) ** 2))
        return TorusFunction(kept.copy(), self.L), tail

    def trim(self, tol: float = 0.0) -> "TorusFunction":
        """Remove zero (or below-tol) outer coefficients."""
        M = self.M
        while M > 0 and abs(self.c[self.M + M]) <= tol and abs(self.c[self.M - M]) <= tol:
            M -= 1
        if M == self.M:
            return self
        return TorusFunction(self.c[self.M - M : self.M + M + 1].copy(), self.L)

    def conjugate(self) -> "TorusFunction":
        return TorusFunction(np.conj(self.c[::-1]), self.L)

    def __repr__(self):  # pragma: no cover - debugging aid
        return f"TorusFunction(M={self.M}, L={self.L:.6g})"
