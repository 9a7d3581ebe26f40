"""One-variable hypergeometric functions and the numerical monodromy oracle.

The differential operator used throughout is

    L = (-1)**sigma * x * prod_j (theta + mu_j) - prod_j (theta + nu_j - 1),

with ``theta = x d/dx``, ``mu_j = 1 - a_j``, ``nu_j = 1 - b_j`` and
``sigma = q - p``.  It is the operator annihilated by the G-function basis at
infinity; the basis at 0 is ``x**b_h * F_{p,q-1}(...; (-1)**sigma x)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import numerics as nm
from .errors import CaseError, GenericityError, NoConvergence, PoleError, SectorError, StepFailure

N_MAX = 100_000
EPS = float(np.finfo(float).eps)


def _as_complex_tuple(values) -> tuple:
    return tuple(complex(v) for v in values)


@dataclass(frozen=True)
class HyperParams:
    """Upper parameters ``a`` (length p) and lower parameters ``b`` (length q)."""

    a: tuple
    b: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", _as_complex_tuple(self.a))
        object.__setattr__(self, "b", _as_complex_tuple(self.b))
        if self.p > self.q:
            raise ValueError(f"need p <= q, got p={self.p}, q={self.q}")

    @classmethod
    def from_mu_nu(cls, mu, nu) -> "HyperParams":
        return cls(tuple(1 - complex(m) for m in mu), tuple(1 - complex(n) for n in nu))

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    @property
    def sigma(self) -> int:
        return self.q - self.p

    @property
    def mu(self) -> tuple:
        return tuple(1 - a for a in self.a)

    @property
    def nu(self) -> tuple:
        return tuple(1 - b for b in self.b)

    def genericity_violations(self, tol: float = nm.TAU_INT) -> list:
        bad = []
        for i, ai in enumerate(self.a):
            for j, aj in enumerate(self.a):
                if i < j and nm.is_near_integer(ai - aj, tol):
                    bad.append(f"a[{i + 1}] - a[{j + 1}] = {ai - aj} is an integer")
            for j, bj in enumerate(self.b):
                if nm.is_near_integer(ai - bj, tol):
                    bad.append(f"a[{i + 1}] - b[{j + 1}] = {ai - bj} is an integer")
        return bad

    def is_generic(self) -> bool:
        return not self.genericity_violations()

    def require_generic(self) -> None:
        bad = self.genericity_violations()
        if bad:
            raise GenericityError("; ".join(bad))


@dataclass(frozen=True)
class Evaluation:
    value: complex
    err_estimate: float
    terms_used: int


# --------------------------------------------------------------------------
# convergent series


def hypergeometric_terms(alpha: Sequence, beta: Sequence, z: complex):
    """Yield the terms ``(alpha)_n / ((beta)_n n!) z**n`` of F(alpha; beta; z)."""
    alpha = [complex(v) for v in alpha]
    beta = [complex(v) for v in beta]
    z = complex(z)
    t = 1 + 0j
    n = 0
    while True:
        yield t
        num = 1 + 0j
        for v in alpha:
            num *= v + n
        den = complex(n + 1)
        for v in beta:
            den *= v + n
        t = t * num / den * z
        n += 1


def _check_lower(beta) -> None:
    for j, v in enumerate(beta):
        if nm.is_nonpositive_integer(v):
            raise PoleError(f"lower parameter {j + 1} = {v} is a nonpositive integer")


def _monotone_start(alpha, beta, z) -> int:
    scale = max([abs(v) for v in alpha] + [abs(v) for v in beta] + [1.0])
    return int(2 * scale + 2 * abs(z) ** (1.0 / max(1, len(beta) + 1 - len(alpha))) + 2)


def hypergeometric_jet(alpha, beta, z, tol, shift=0j, order=0):
    """Sum ``sum_n (n + shift)**k t_n`` for ``k = 0..order``.

    These are the theta-derivatives of ``x**shift * F`` divided by
    ``x**shift``.  Returns ``(values, err_estimate, terms_used)``.
    Requires ``len(alpha) <= len(beta) + 1``; for equality ``|z| < 1``.
    """
    _check_lower(beta)
    ks = np.arange(order + 1)
    sums = np.zeros(order + 1, dtype=np.complex128)
    abs_sum = 0.0
    n0 = _monotone_start(alpha, beta, z)
    terms = hypergeometric_terms(alpha, beta, z)
    t = next(terms)
    for n in range(N_MAX):
        weights = (n + shift) ** ks
        sums += weights * t
        abs_sum += float(np.max(np.abs(weights))) * abs(t)
        t_next = next(terms)
        if t_next == 0:
            return sums, float((n + 1) * EPS * abs_sum), n + 1
        if n >= n0:
            rho = abs(t_next / t) if t != 0 else 0.0
            if rho < 1:
                grow = max(1.0, abs(n + 1 + shift) ** order)
                err = grow * abs(t_next) / (1 - rho)
                scale = max(abs(sums[0]), np.max(np.abs(sums)) if order else 0.0)
                if err <= tol * scale or err < 1e-300:
                    return sums, float(err + (n + 1) * EPS * abs_sum), n + 1
        t = t_next
    raise NoConvergence(f"series needed more than {N_MAX} terms")


def eval_hypergeometric(alpha, beta, z, tol=1e-15) -> Evaluation:
    vals, err, n = hypergeometric_jet(alpha, beta, z, tol)
    return Evaluation(complex(vals[0]), err, n)


def eval_fpq(params: HyperParams, x: complex, tol: float = 1e-15) -> Evaluation:
    """F_{p,q}(a; b; x) by direct summation with a geometric tail bound."""
    return eval_hypergeometric(params.a, params.b, x, tol)


def fpq_series(alpha, beta, order: int, scale: complex = 1) -> nm.TruncatedSeries:
    """Truncated Taylor series of ``F(alpha; beta; scale*x)`` up to ``x**order``."""
    _check_lower(beta)
    terms = hypergeometric_terms(alpha, beta, scale)
    return nm.TruncatedSeries([next(terms) for _ in range(order + 1)])


def annihilator_params(alpha, beta) -> tuple:
    """Parameters whose operator annihilates ``F(alpha; beta; s*x)``.

    Returns ``(params, s)``; ``F`` is the h=1 element of the basis at 0 for
    ``a = 1 - alpha``, ``b = (0, 1 - beta)``, where ``s = (-1)**sigma``.
    """
    params = HyperParams([1 - complex(v) for v in alpha], [0j] + [1 - complex(v) for v in beta])
    return params, (-1) ** params.sigma


# --------------------------------------------------------------------------
# basis at 0


def _basis_parts(params: HyperParams, h: int):
    bh = params.b[h]
    others = [b for j, b in enumerate(params.b) if j != h]
    alpha = [1 + bh - a for a in params.a]
    beta = [1 + bh - b for b in others]
    pref = nm.gamma_ratio(alpha, beta)
    return bh, alpha, beta, pref


def basis_jet_at_zero(params: HyperParams, x: complex, order: int = 0, tol: float = 1e-15, winding: int = 0):
    """theta-derivatives of the q basis functions at 0.

    Returns ``(jet, err)`` where ``jet[k, h]`` is ``theta**k`` of basis
    element ``h`` at ``x`` and ``err[h]`` bounds the truncation error of
    ``jet[:, h]``.
    """
    x = complex(x)
    if x == 0:
        raise ValueError("the basis at 0 is singular at x = 0")
    z = (-1) ** params.sigma * x
    jet = np.zeros((order + 1, params.q), dtype=np.complex128)
    errs = np.zeros(params.q)
    terms = np.zeros(params.q, dtype=int)
    for h in range(params.q):
        bh, alpha, beta, pref = _basis_parts(params, h)
        vals, err, n = hypergeometric_jet(alpha, beta, z, tol, shift=bh, order=order)
        mono = pref * nm.cpow(x, bh, winding)
        jet[:, h] = mono * vals
        errs[h] = abs(mono) * err
        terms[h] = n
    return jet, errs, terms


def eval_basis_at_zero(params: HyperParams, x: complex, tol: float = 1e-15, winding: int = 0) -> list:
    """The q functions ``G^{1,p}_{p,q}`` with ``b_h`` moved to the front."""
    jet, errs, terms = basis_jet_at_zero(params, x, 0, tol, winding)
    return [Evaluation(complex(jet[0, h]), float(errs[h]), int(terms[h])) for h in range(params.q)]


def basis_series_at_zero(params: HyperParams, h: int, order: int) -> nm.TruncatedSeries:
    """Basis element ``h`` (0-based) as ``x**b_h`` times a truncated series."""
    bh, alpha, beta, pref = _basis_parts(params, h)
    s = fpq_series(alpha, beta, order, scale=(-1) ** params.sigma)
    return nm.TruncatedSeries(pref * s.coeffs, bh)


# --------------------------------------------------------------------------
# asymptotics at infinity


def index_set(sigma: int) -> list:
    """The index set ``I_sigma`` labelling the exponentially dominant solutions."""
    if sigma < 1:
        return []
    if sigma % 2 == 0:
        return list(range(1 - sigma // 2, sigma // 2 + 1))
    return list(range(-(sigma - 1) // 2, (sigma - 1) // 2 + 1))


def lam(params: HyperParams) -> complex:
    return 0.5 * (params.sigma + 1) + sum(params.mu) - sum(params.nu)


def asymptotic_subdominant_terms(params: HyperParams, h: int, x: complex):
    """Prefactor and term stream of the algebraic expansion for element ``h`` (1-based)."""
    if not 1 <= h <= params.p:
        raise CaseError(f"h must lie in 1..{params.p}, got {h}")
    ah = params.a[h - 1]
    others = [a for j, a in enumerate(params.a) if j != h - 1]
    num = [1 + b - ah for b in params.b]
    den = [1 + a - ah for a in others]
    return num, den, hypergeometric_terms(num, den, -1 / complex(x))


def eval_asymptotic_subdominant(
    params: HyperParams, h: int, x: complex, n_terms: int | None = None, winding: int = 0
) -> Evaluation:
    """Truncated algebraic expansion of ``G^{q,1}`` at infinity.

    ``n_terms=None`` selects optimal truncation (stop at the smallest term);
    larger requests are clamped to that point.
    """
    x = complex(x)
    arg = nm.principal_arg(x) + 2 * math.pi * winding
    if abs(arg) >= math.pi * (params.sigma / 2 + 1):
        raise SectorError(f"|arg x| = {abs(arg)} outside the sector of validity")
    num, den, terms = asymptotic_subdominant_terms(params, h, x)
    pref = nm.gamma_ratio(num, den) * nm.cpow(x, params.a[h - 1] - 1, winding)
    limit = N_MAX if n_terms is None else n_terms
    total = 0j
    t = next(terms)
    used = 0
    while used < limit:
        total += t
        used += 1
        t_next = next(terms)
        if t_next == 0 or abs(t_next) >= abs(t):
            t = t_next
            break
        t = t_next
    return Evaluation(pref * total, abs(pref * t), used)


def eval_asymptotic_dominant(params: HyperParams, h: int, x: complex, winding: int = 0) -> Evaluation:
    """Leading term of the exponentially small/large basis element ``h``.

    ``(2 pi)**((sigma-1)/2) sigma**(-1/2) exp(-sigma w) w**lam`` with
    ``w = (x e^{2 h pi i})**(1/sigma)``, times ``exp(2 i h lam pi / sigma)``.
    """
    sigma = params.sigma
    if sigma < 1:
        raise CaseError("no exponential factors when sigma < 1")
    if h not in index_set(sigma):
        raise CaseError(f"h={h} not in I_{sigma} = {index_set(sigma)}")
    x = complex(x)
    lx = nm.principal_log(x) + 2j * math.pi * (winding + h)
    logw = lx / sigma
    w = cmath.exp(logw)
    lm = lam(params)
    log_val = (
        0.5 * (sigma - 1) * math.log(2 * math.pi)
        - 0.5 * math.log(sigma)
        - sigma * w
        + lm * logw
        + 2j * h * lm * math.pi / sigma
    )
    if log_val.real > 700:
        raise OverflowError(f"log|value| = {log_val.real:.6g} overflows double precision")
    # M == 1 truncation: the correction is O(|w|^-1)
    return Evaluation(cmath.exp(log_val), abs(cmath.exp(log_val)) / max(abs(w), 1.0), 1)


# --------------------------------------------------------------------------
# the operator


def operator_polys(params: HyperParams):
    """``(P, Q)``: ascending theta-coefficients of ``prod(theta+nu-1)`` and ``prod(theta+mu)``."""
    P = nm.poly_from_shifts([n - 1 for n in params.nu])
    Q = nm.poly_from_shifts(list(params.mu))
    return P, Q


def _fornberg_weights(offsets: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights at 0 for derivatives 0..order on ``offsets``."""
    n = offsets.size
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = offsets[0]
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = offsets[i]
        for j in range(i):
            c3 = offsets[i] - offsets[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def theta_derivatives(f: Callable, x: complex, order: int, step: float = 1e-2, points: int | None = None):
    """``theta**k f(x)`` for k = 0..order from a central stencil in ``log x``."""
    if points is None:
        points = max(5, 2 * order + 1)
    half = points // 2
    offsets = np.arange(-half, half + 1, dtype=float) * step
    vals = np.array([f(complex(x) * math.exp(s)) for s in offsets], dtype=np.complex128)
    w = _fornberg_weights(offsets, order)
    return w @ vals


def apply_operator_series(params: HyperParams, f: nm.TruncatedSeries) -> nm.TruncatedSeries:
    """``L f`` as a series of order K+1 (theta acts termwise: ``theta x^(n+rho) = (n+rho) x^(n+rho)``).

    For a solution, every coefficient but the last vanishes up to rounding;
    the last one is the boundary term ``(-1)^sigma Q(K+rho) c_K``.
    """
    P, Q = operator_polys(params)
    polyval = np.polynomial.polynomial.polyval
    n = np.arange(f.order + 2) + f.exponent
    c = np.zeros(f.order + 2, dtype=np.complex128)
    c[:-1] = f.coeffs
    shifted = np.zeros_like(c)
    shifted[1:] = polyval(n[:-1], Q) * c[:-1]
    out = (-1) ** params.sigma * shifted - polyval(n, P) * c
    return nm.TruncatedSeries(out, f.exponent)


def ode_residual(params: HyperParams, f, x: complex, step: float = 1e-2, points: int | None = None) -> float:
    """``|L f|(x)``.

    ``f`` is a :class:`TruncatedSeries` (theta acts termwise, exactly) or a
    callable (theta-powers from finite differences in ``log x``).
    """
    x = complex(x)
    if isinstance(f, nm.TruncatedSeries):
        return float(abs(apply_operator_series(params, f)(x)))
    P, Q = operator_polys(params)
    thetas = theta_derivatives(f, x, params.q, step, points)
    lhs = (-1) ** params.sigma * x * np.dot(Q, thetas[: Q.size])
    rhs = np.dot(P, thetas[: P.size])
    return float(abs(lhs - rhs))


# --------------------------------------------------------------------------
# monodromy oracle


def _companion(params: HyperParams):
    P, Q = operator_polys(params)
    q = params.q
    s = (-1) ** params.sigma
    Qp = np.zeros(q + 1, dtype=np.complex128)
    Qp[: Q.size] = Q

    def matrix(x):
        C = np.zeros((q, q), dtype=np.complex128)
        C[np.arange(q - 1), np.arange(1, q)] = 1.0
        lead = 1 - s * x * Qp[q]
        C[q - 1, :] = (-P[:q] + s * x * Qp[:q]) / lead
        return C

    return matrix


def numerical_monodromy(
    params: HyperParams,
    base_x: complex,
    n_steps: int = 512,
    center: complex = 0j,
    rtol: float = 1e-12,
) -> np.ndarray:
    """Monodromy of the basis at 0 along the circle through ``base_x`` about ``center``.

    The loop is traversed once counterclockwise; the result ``M`` satisfies
    ``continued basis = basis @ M`` in the basis of :func:`eval_basis_at_zero`.
    """
    if n_steps < 256:
        raise ValueError("n_steps must be at least 256")
    base_x = complex(base_x)
    if base_x == 0:
        raise ValueError("base point must be nonzero")
    q = params.q
    Y0, _, _ = basis_jet_at_zero(params, base_x, q - 1)
    C = _companion(params)
    center = complex(center)
    r0 = base_x - center

    def rhs(phi, y):
        x = center + r0 * cmath.exp(1j * phi)
        Y = y.reshape(q, q)
        return (1j * (x - center) / x * (C(x) @ Y)).ravel()

    scale = float(np.max(np.abs(Y0)))
    sol = solve_ivp(
        rhs,
        (0.0, 2 * math.pi),
        Y0.ravel().astype(np.complex128),
        method="DOP853",
        rtol=rtol,
        atol=rtol * 1e-2 * scale,
        max_step=2 * math.pi / n_steps,
    )
    if not sol.success:
        raise StepFailure(sol.message)
    Y1 = sol.y[:, -1].reshape(q, q)
    return np.linalg.solve(Y0, Y1)
