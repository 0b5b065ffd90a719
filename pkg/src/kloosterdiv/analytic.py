"""Numerical checks of the smoothing / Poisson-summation reduction.

All identities here are exact statements about finite sums; we evaluate
both sides in floating point at small moduli and report the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import QuadratureFailure
from .modcore import PrimePowerModulus, mod_inv

TWO_PI = 2.0 * math.pi
DECAY_REL = 1e-8
# |fhat| <= DECAY_REL * fhat(0) beyond DECAY_WIDTHS / w for the default profile.
DECAY_WIDTHS = 40.0
_GL_NODES = 16


class BumpFunction:
    """Bump supported on [1, 1 + w].

    ``profile="smooth"`` is exp(a*(4 - 1/(s(1-s)))) with s = (y-1)/w, which
    peaks at 1 when s = 1/2. ``profile="step"`` is the indicator of the
    support and exists to show what goes wrong without smoothness.
    """

    def __init__(self, width: float = 0.5, order: int = 4, profile: str = "smooth", sharpness: float = 1.0):
        if width <= 0:
            raise ValueError("width must be positive")
        if profile not in ("smooth", "step"):
            raise ValueError(f"unknown profile {profile!r}")
        self.width = float(width)
        self.order = int(order)
        self.profile = profile
        self.sharpness = float(sharpness)

    @property
    def support(self):
        return (1.0, 1.0 + self.width)

    def __repr__(self):
        return f"BumpFunction(width={self.width}, order={self.order}, profile={self.profile!r})"

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        s = (y - 1.0) / self.width
        inside = (s > 0.0) & (s < 1.0)
        out = np.zeros_like(s)
        if self.profile == "step":
            out[(s >= 0.0) & (s <= 1.0)] = 1.0
            return out
        si = s[inside]
        out[inside] = np.exp(self.sharpness * (4.0 - 1.0 / (si * (1.0 - si))))
        return out

    def derivative_sup(self, j: int, n_grid: int = 40001) -> float:
        """Finite-difference estimate of sup |f^(j)| over the support."""
        lo, hi = self.support
        y = np.linspace(lo, hi, n_grid)
        vals = self(y)
        h = y[1] - y[0]
        for _ in range(j):
            vals = np.gradient(vals, h)
        return float(np.max(np.abs(vals)))

    def derivative_constant(self, j: int) -> float:
        """C_j in sup |f^(j)| <= C_j * w**(-j)."""
        return self.derivative_sup(j) * self.width**j


def _gl_panels(lo, hi, panels):
    x, wt = np.polynomial.legendre.leggauss(_GL_NODES)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


class FourierEvaluator:
    """fhat(xi) = integral f(y) e(-y xi) dy by composite Gauss-Legendre.

    The panel count is doubled until two successive rules agree to
    ``tol`` on the requested batch of frequencies.
    """

    def __init__(self, source: BumpFunction, tol: float = 1e-12, max_panels: int = 1 << 14):
        self.source = source
        self.tol = tol
        self.max_panels = max_panels
        self.cache: Dict[float, complex] = {}
        self._mass: Optional[float] = None

    def _rule(self, xi, panels):
        nodes, weights = _gl_panels(*self.source.support, panels)
        fw = self.source(nodes) * weights
        out = np.empty(xi.size, dtype=complex)
        for lo in range(0, xi.size, 512):
            blk = xi[lo : lo + 512]
            # e(-y xi) = e(-xi) e(-(y-1) xi) keeps the phase argument small
            local = np.exp(-1j * TWO_PI * np.outer(blk, nodes - 1.0)) @ fw
            out[lo : lo + 512] = local * np.exp(-1j * TWO_PI * blk)
        return out

    def evaluate(self, xi) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        missing = np.array([v for v in np.unique(xi) if float(v) not in self.cache])
        if missing.size:
            cycles = float(np.max(np.abs(missing))) * self.source.width
            panels = max(8, int(math.ceil(cycles)) * 2)
            prev = self._rule(missing, panels)
            while True:
                panels *= 2
                if panels > self.max_panels:
                    raise QuadratureFailure("Gauss-Legendre refinement did not converge")
                cur = self._rule(missing, panels)
                if np.max(np.abs(cur - prev)) < self.tol:
                    break
                prev = cur
            self.cache.update(zip(missing.tolist(), cur.tolist()))
        return np.array([self.cache[float(v)] for v in xi])

    __call__ = evaluate

    @property
    def mass(self) -> float:
        if self._mass is None:
            self._mass = float(self.evaluate([0.0])[0].real)
        return self._mass

    def decay_cutoff(self) -> float:
        """Frequency past which |fhat| <= DECAY_REL * mass; checked on a grid.

        Raises QuadratureFailure when the profile does not decay that fast
        (e.g. the step profile).
        """
        w = self.source.width
        cutoff = DECAY_WIDTHS / w
        grid = np.linspace(cutoff, 5 * cutoff, 801)
        if np.max(np.abs(self.evaluate(grid))) > DECAY_REL * self.mass:
            raise QuadratureFailure(f"|fhat| exceeds {DECAY_REL:g} * mass beyond {cutoff:g}")
        return cutoff

    def envelope_constant(self) -> float:
        """A in |fhat(xi)| <= A exp(-2 sqrt(pi a |xi| w)), fitted on mid frequencies."""
        src = self.source
        nu = np.linspace(5.0, 30.0, 251)
        vals = np.abs(self.evaluate(nu / src.width))
        return float(np.max(vals * np.exp(2.0 * np.sqrt(math.pi * src.sharpness * nu))))

    def log_envelope(self, xi):
        """log of an upper envelope for |fhat(xi)|, usable far beyond double range."""
        src = self.source
        xi = np.abs(np.asarray(xi, dtype=float))
        if src.profile == "step":
            return -np.log(math.pi * xi)
        a = self.envelope_constant()
        return math.log(a) - 2.0 * np.sqrt(math.pi * src.sharpness * xi * src.width)


# ---------------------------------------------------------------------------
# h-sum reordering by gcd(h, q)


@dataclass(frozen=True)
class IdentityCheck:
    lhs: complex
    rhs: complex
    equal: bool


def hsum_reorder_check(m: PrimePowerModulus, value: int) -> IdentityCheck:
    """sum_{h=1..q} e(h v / q) against the sum over r of primitive sums mod p^(k-r)."""
    p, k, q = m.p, m.k, m.q
    h = np.arange(1, q + 1)
    lhs = complex(np.exp(1j * TWO_PI * ((h * value) % q) / q).sum())
    rhs = 0j
    for r in range(k + 1):
        mod = p ** (k - r)
        b = np.arange(mod)
        b = b[np.gcd(b, mod) == 1]
        rhs += complex(np.exp(1j * TWO_PI * ((b * value) % mod) / mod).sum())
    return IdentityCheck(lhs, rhs, abs(lhs - rhs) < 1e-9 * q)


def hsum_exhaustive(m: PrimePowerModulus) -> bool:
    return all(hsum_reorder_check(m, v).equal for v in range(m.q))


# ---------------------------------------------------------------------------
# Poisson summation in two variables


@dataclass
class PoissonCheck:
    lhs: complex
    rhs: complex
    abs_error: float
    rhs_st: Optional[complex] = None
    n_cut: int = 0
    m_cut: int = 0
    params: dict = field(default_factory=dict)

    @property
    def scale(self) -> float:
        return self.params["U"] * self.params["V"] / self.params["M"]


def _lattice(U, f: BumpFunction):
    lo, hi = f.support
    us = np.arange(math.ceil(lo * U), math.floor(hi * U) + 1)
    return us, f(us / U)


def _folded_transform(fe: FourierEvaluator, U, M, cut):
    n = np.arange(-cut, cut + 1)
    vals = fe(n * U / M)
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, n % M, vals)
    return folded


def poisson_identity_check(
    f: BumpFunction,
    g: BumpFunction,
    U: float,
    V: float,
    b: int,
    M: int,
    with_st_form: bool = False,
    fe: Optional[FourierEvaluator] = None,
    ge: Optional[FourierEvaluator] = None,
) -> PoissonCheck:
    """Compare sum_{u,v} f(u/U) g(v/V) e(b u v / M) with its dual form

        (UV/M) sum_{n,m} e(-n m bbar / M) fhat(nU/M) ghat(mV/M),

    the dual sums truncated where |fhat|, |ghat| fall below 1e-8 of their
    mass. ``with_st_form`` also evaluates the form before the s-sum is
    completed, (UV/M^2) sum_{s,t} e(bst/M) sum_{n,m} e((sn+tm)/M) fhat ghat.
    """
    if gcd(b, M) != 1:
        raise ValueError(f"b={b} must be coprime to M={M}")
    if U < 1 or V < 1:
        raise ValueError("U, V must be >= 1")
    fe = fe or FourierEvaluator(f)
    ge = ge or FourierEvaluator(g)

    us, fu = _lattice(U, f)
    vs, gv = _lattice(V, g)
    ph = (b * np.outer(us, vs)) % M
    lhs = complex(fu @ np.exp(1j * TWO_PI * ph / M) @ gv)

    n_cut = int(math.ceil(fe.decay_cutoff() * M / U))
    m_cut = int(math.ceil(ge.decay_cutoff() * M / V))
    A = _folded_transform(fe, U, M, n_cut)
    B = _folded_transform(ge, V, M, m_cut)
    r = np.arange(M)
    binv = mod_inv(b, M) if M > 1 else 0
    kern = np.exp(-1j * TWO_PI * ((np.outer(r, r) * binv) % M) / M)
    rhs = complex(U * V / M * (A @ kern @ B))

    rhs_st = None
    if with_st_form:
        dft = np.exp(1j * TWO_PI * (np.outer(r, r) % M) / M)
        As, Bt = dft @ A, dft @ B
        kern_st = np.exp(1j * TWO_PI * ((b * np.outer(r, r)) % M) / M)
        rhs_st = complex(U * V / M**2 * (As @ kern_st @ Bt))

    params = dict(U=U, V=V, b=b, M=M, w_f=f.width, w_g=g.width)
    return PoissonCheck(lhs, rhs, abs(lhs - rhs), rhs_st, n_cut, m_cut, params)


def default_poisson_grid() -> List[dict]:
    """Twenty (U, V, M, b, w) cases at desk scale."""
    cases = []
    moduli = [1, 9, 25, 27, 49, 81, 121, 125, 243, 343]
    for i, M in enumerate(moduli):
        for j, (U, V, w) in enumerate([(40, 40, 0.5), (60 + 7 * i, 25 + 3 * i, 0.3 + 0.05 * (i % 3))]):
            b = 1 if M == 1 else next(c for c in range(2 + i + j, M + 2 + i + j) if gcd(c, M) == 1) % M or 1
            cases.append(dict(U=U, V=V, M=M, b=b, w=w))
    return cases


def _run_case(case):
    w = case["w"]
    f = BumpFunction(w)
    g = BumpFunction(case.get("w_g", w))
    return poisson_identity_check(f, g, case["U"], case["V"], case["b"], case["M"])


def poisson_grid(cases: Optional[Sequence[dict]] = None, map_fn=map) -> List[PoissonCheck]:
    return list(map_fn(_run_case, cases or default_poisson_grid()))


# ---------------------------------------------------------------------------
# truncation of the dual sum


def truncation_range_check(
    f: BumpFunction, U: float, q: int, delta_param: float, p_r: int = 1, fe: Optional[FourierEvaluator] = None
) -> bool:
    """True iff sum over |n| >= q^(1+6 delta) / (p^r U) of |fhat(nU/q)| < q^-50.

    The tail is bounded with the profile's decay envelope (first term plus
    the integral of the envelope), in log space.
    """
    fe = fe or FourierEvaluator(f)
    n0 = math.ceil(q ** (1 + 6 * delta_param) / (p_r * U))
    n0 = max(n0, 1)
    target = -50.0 * math.log(q)
    step = U / q
    if f.profile == "step":
        # 1/(pi n step) is not summable
        return False
    a = fe.envelope_constant()
    c = 2.0 * math.sqrt(math.pi * f.sharpness * step * f.width)
    # sum_{n>=n0} A e^{-c sqrt n} <= A e^{-c sqrt n0} (1 + 2(1 + c sqrt n0)/c^2)
    root = math.sqrt(n0)
    log_tail = math.log(2 * a) - c * root + math.log1p(2.0 * (1.0 + c * root) / c**2)
    return log_tail < target


# ---------------------------------------------------------------------------
# almost-dyadic cover of [1, x]


def almost_dyadic_cover(x: float, eps: float):
    """Intervals [(1+eps)^(i-1), (1+eps)^i] for i = 1.. until x is covered."""
    if x < 1 or eps <= 0:
        raise ValueError("need x >= 1 and eps > 0")
    out = []
    lo = 1.0
    while True:
        hi = lo * (1.0 + eps)
        out.append((lo, hi))
        if hi >= x:
            return out
        lo = hi
