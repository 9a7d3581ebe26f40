"""Rank-1 GKZ lift of the hypergeometric equation.

Variables ``x_1..x_{p+q+1}``; the lattice is generated by
``g = (-1, ..., -1, +1, ..., +1)`` (p minus signs).  The exponent vectors
``gamma_i`` are stored exactly (as pairs of Fractions for real and
imaginary parts) so that the Euler eigenvalue identities can be checked
without rounding.

The one-variable equation attached to the lift has parameters
``(-a_1..-a_p; -b_1..-b_{q+1})`` and argument ``s z`` with
``z = x_{p+1}...x_{p+q+1} / (x_1...x_p)`` and ``s = (-1)**(q+1)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import special

from . import numerics as nm
from .errors import CaseError, DomainError, GenericityError, NoConvergence
from .hyperfun import HyperParams, Evaluation, eval_basis_at_zero, index_set
from .stokes import build_structure, line_angles, period, transition_count, valid_labels

N_MAX = 100_000
DOMAIN_TOL = 1e-12


# --------------------------------------------------------------------------
# exact complex numbers


def _exact(z) -> tuple:
    z = complex(z)
    return (Fraction(z.real), Fraction(z.imag))


def _xadd(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _xsub(u, v):
    return (u[0] - v[0], u[1] - v[1])


def _xneg(u):
    return (-u[0], -u[1])


def _xint(n: int):
    return (Fraction(n), Fraction(0))


def _xcomplex(u) -> complex:
    return complex(float(u[0]), float(u[1]))


def _xis_integer(u):
    return u[1] == 0 and u[0].denominator == 1


# --------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class GkzModel:
    p: int
    q: int
    a: tuple
    b: tuple  # length q + 1
    lattice_gen: tuple
    gammas_exact: tuple  # q+1 vectors of exact complex entries
    beta_exact: dict  # j (2..p+q+1) -> exact complex
    b_completed: bool = False

    @property
    def n_vars(self) -> int:
        return self.p + self.q + 1

    @property
    def sigma_eff(self) -> int:
        return self.q + 1 - self.p

    @property
    def regular(self) -> bool:
        return self.p == self.q + 1

    @property
    def gammas(self) -> list:
        return [np.array([_xcomplex(u) for u in g]) for g in self.gammas_exact]

    @property
    def beta(self) -> dict:
        return {(1, j): _xcomplex(v) for j, v in self.beta_exact.items()}

    def one_variable_params(self) -> HyperParams:
        """Parameters ``(-a; -b)`` of the one-variable equation behind the lift."""
        return HyperParams([-v for v in self.a], [-v for v in self.b])

    def lift_sign(self) -> int:
        return (-1) ** (self.q + 1)


def annihilator_row(model: GkzModel, j: int) -> list:
    """The vector ``a_{1,j}`` (1-based j = 2..n_vars) of the Euler equations."""
    n = model.n_vars
    v = [0] * n
    v[0] = 1
    if j <= model.p:
        v[j - 1] = -1
    else:
        v[j - 1] = 1
    return v


def _pair(vec, row):
    acc = _xint(0)
    for u, c in zip(vec, row):
        if c == 1:
            acc = _xadd(acc, u)
        elif c == -1:
            acc = _xsub(acc, u)
    return acc


def build_model(p: int, q: int, a, b) -> GkzModel:
    """Model for ``F(a; b)``: ``b`` has length q+1 (length q is completed by ``b_{q+1} = 1``)."""
    a = [complex(v) for v in a]
    b = [complex(v) for v in b]
    if len(a) != p:
        raise ValueError(f"expected {p} upper parameters, got {len(a)}")
    completed = False
    if len(b) == q:
        b = b + [1 + 0j]
        completed = True
    if len(b) != q + 1:
        raise ValueError(f"expected {q + 1} lower parameters, got {len(b)}")
    if p < 1:
        raise ValueError("the Euler equations are written relative to x_1, so p >= 1 is required")
    if p > q + 1:
        raise CaseError("the Stokes machinery needs p <= q + 1")
    bad = []
    for i in range(p):
        for j in range(i + 1, p):
            if nm.is_near_integer(a[i] - a[j]):
                bad.append(f"a[{i + 1}] - a[{j + 1}] is an integer")
        for j in range(q + 1):
            if nm.is_near_integer(a[i] - b[j]):
                bad.append(f"a[{i + 1}] - b[{j + 1}] is an integer")
    if bad:
        raise GenericityError("; ".join(bad))

    ax = [_exact(v) for v in a]
    bx = [_exact(v) for v in b]
    one = _xint(1)
    gammas = []
    for i in range(q + 1):
        g = [_xsub(_xsub(bx[i], ax[j]), one) for j in range(p)]
        g += [_xsub(bx[j], bx[i]) if j != i else _xint(0) for j in range(q + 1)]
        gammas.append(tuple(g))
    base = [_xneg(v) for v in ax] + [_xsub(v, one) for v in bx]
    n = p + q + 1
    lattice = tuple([-1] * p + [1] * (q + 1))
    model = GkzModel(p, q, tuple(a), tuple(b), lattice, tuple(gammas), {}, completed)
    beta = {j: _pair(base, annihilator_row(model, j)) for j in range(2, n + 1)}
    return GkzModel(p, q, tuple(a), tuple(b), lattice, tuple(gammas), beta, completed)


def euler_defects(model: GkzModel, gamma_exact, m: int = 0) -> list:
    """Exact ``<gamma + m g, a_{1,j}> - beta_{1,j}`` for j = 2..n_vars (all zero for solutions)."""
    shifted = [_xadd(u, _xint(m * c)) for u, c in zip(gamma_exact, model.lattice_gen)]
    return [_xsub(_pair(shifted, annihilator_row(model, j)), model.beta_exact[j]) for j in range(2, model.n_vars + 1)]


def singular_divisor(p: int, q: int) -> dict:
    if p < q + 1:
        return {"type": "coordinate-hyperplanes", "indices": list(range(1, p + 1)), "regular": False,
                "equation": "*".join(f"x{j}" for j in range(1, p + 1)) + " = 0"}
    if p == q + 1:
        lhs = "*".join(f"x{j}" for j in range(1, p + 1))
        rhs = "*".join(f"x{j}" for j in range(p + 1, p + q + 2))
        return {"type": "binomial-hypersurface", "indices": list(range(1, p + q + 2)), "regular": True,
                "equation": f"{lhs} - {rhs} = 0"}
    return {"type": "coordinate-hyperplanes", "indices": list(range(p + 1, p + q + 2)), "regular": False,
            "equation": "*".join(f"x{j}" for j in range(p + 1, p + q + 2)) + " = 0"}


# --------------------------------------------------------------------------
# Gamma-series


def _logs(model: GkzModel, x, winding=None) -> np.ndarray:
    x = [complex(v) for v in x]
    if len(x) != model.n_vars:
        raise ValueError(f"point must have {model.n_vars} coordinates")
    for j in range(model.p):
        if abs(x[j]) < DOMAIN_TOL:
            raise DomainError(f"x_{j + 1} = 0 lies on the singular divisor")
    if any(v == 0 for v in x):
        raise DomainError("all coordinates must be nonzero for the multivalued monomials")
    w = np.zeros(model.n_vars) if winding is None else np.asarray(winding, dtype=float)
    return np.array([nm.principal_log(v) for v in x]) + nm.TWO_PI_I * w


def _shifted_gamma(model: GkzModel, i: int, shift: int):
    if not 1 <= i <= model.q + 1:
        raise CaseError(f"gamma index i must lie in 1..{model.q + 1}")
    return tuple(_xadd(u, _xint(shift * c)) for u, c in zip(model.gammas_exact[i - 1], model.lattice_gen))


def _m_min(model: GkzModel, gamma_exact) -> int:
    """First lattice multiple with a possibly nonzero term.

    Needs an integer entry in the ``+1`` block; its ``1/Gamma`` factor kills
    every term below.
    """
    bounds = []
    for u, c in zip(gamma_exact, model.lattice_gen):
        if c == 1 and _xis_integer(u):
            bounds.append(-int(u[0]))
    if not bounds:
        raise NoConvergence("Gamma-series is two-sided (no integer slot in the +1 block)")
    return max(bounds)


def gamma_series_terms(model: GkzModel, gamma_exact, x, winding=None, derivative=None):
    """Yield ``(m, term)`` for the Gamma-series, starting at ``m_min``.

    ``derivative`` is an optional 0/1 vector: apply ``prod d/dx_k`` over the
    marked slots termwise (``d/dx x^e / Gamma(e+1) = x^(e-1) / Gamma(e)``).
    """
    logs = _logs(model, x, winding)
    d = np.zeros(model.n_vars) if derivative is None else np.asarray(derivative, dtype=float)
    m = _m_min(model, gamma_exact)
    while True:
        # exact lattice point, so shifted gammas reproduce identical terms
        e = np.array([_xcomplex(_xadd(u, _xint(m * c))) for u, c in zip(gamma_exact, model.lattice_gen)]) - d
        args = e + 1
        if any(nm.is_nonpositive_integer(v) for v in args):
            yield m, 0j
        else:
            yield m, complex(np.exp(np.sum(e * logs) - np.sum(special.loggamma(args))))
        m += 1


def _sum_terms(terms, tol, ratio_start=8):
    total = 0j
    prev = None
    count = 0
    for _, t in terms:
        total += t
        count += 1
        if count > N_MAX:
            raise NoConvergence(f"Gamma-series needed more than {N_MAX} terms")
        if prev is not None and count > ratio_start and t != 0 and prev != 0:
            rho = abs(t / prev)
            if rho < 1:
                err = abs(t) * rho / (1 - rho)
                if err <= tol * abs(total) or err < 1e-300:
                    return total, err, count
        elif prev == 0 and t == 0 and count > ratio_start:
            return total, 0.0, count
        prev = t


def eval_gamma_series(model: GkzModel, i: int, x, tol: float = 1e-15, shift: int = 0, winding=None) -> Evaluation:
    """``F_B(gamma_i + shift g, x)`` summed over the lattice from ``m_min`` upwards."""
    gam = _shifted_gamma(model, i, shift)
    logs = _logs(model, x, winding)
    zabs = math.exp(float(np.sum(logs[model.p:].real) - np.sum(logs[: model.p].real)))
    m0 = _m_min(model, gam)
    scale = max(abs(_xcomplex(u) + m0 * c) for u, c in zip(gam, model.lattice_gen))
    start = int(2 * scale + 2 * zabs ** (1 / max(1, model.sigma_eff)) + 8)
    total, err, count = _sum_terms(gamma_series_terms(model, gam, x, winding), tol, start)
    return Evaluation(total, err, count)


def truncated_gamma_series(model: GkzModel, i: int, x, K: int, winding=None, derivative=None):
    """Terms ``m_min .. m_min + K`` and the next term, as ``(terms, next_term)``."""
    gam = _shifted_gamma(model, i, 0)
    gen = gamma_series_terms(model, gam, x, winding, derivative)
    terms = [next(gen) for _ in range(K + 1)]
    return terms, next(gen)


def gamma_series_factorized(model: GkzModel, i: int, x, tol: float = 1e-15) -> Evaluation:
    """Closed form of ``F_B(gamma_i, x)`` as a Gamma prefactor, a monomial and ``F_{p,q}``.

    The series argument is ``(-1)**p z``.
    """
    from .hyperfun import eval_hypergeometric

    p, q = model.p, model.q
    a, b = model.a, model.b
    bi = b[i - 1]
    logs = _logs(model, x)
    pref = 1 + 0j
    for aj in a:
        pref *= nm.reciprocal_gamma(bi - aj)
    for j, bj in enumerate(b):
        if j != i - 1:
            pref *= nm.reciprocal_gamma(bj - bi + 1)
    expo = [bi - aj - 1 for aj in a] + [bj - bi for bj in b]
    mono = cmath.exp(sum(e * lg for e, lg in zip(expo, logs)))
    z = cmath.exp(sum(logs[p:]) - sum(logs[:p]))
    alpha = [1 + aj - bi for aj in a]
    beta = [1 + bj - bi for j, bj in enumerate(b) if j != i - 1]
    ev = eval_hypergeometric(alpha, beta, (-1) ** p * z, tol)
    return Evaluation(pref * mono * ev.value, abs(pref * mono) * ev.err_estimate, ev.terms_used)


# --------------------------------------------------------------------------
# the lift


def lift_constant(model: GkzModel, i: int) -> complex:
    """``1 / (prod Gamma(1 + a_j - b_i) prod Gamma(b_i - a_j))``."""
    bi = model.b[i - 1]
    out = 1 + 0j
    for aj in model.a:
        out *= nm.reciprocal_gamma(1 + aj - bi) * nm.reciprocal_gamma(bi - aj)
    return out


def lift_solution(model: GkzModel, f: Callable, i: int | None = None) -> Callable:
    """Multivariable evaluator ``x -> C * prod x_j^(-a_j-1) prod x_{p+j}^(b_j) * f(s z)``.

    ``f(y, winding)`` is a one-variable solution on the sheet
    ``log y = Log y + 2 pi i winding``.  The sheet of ``s z`` is fixed by
    ``log(s z) = sum log x_{p+j} - sum log x_j (+ i pi when s = -1)``.
    ``C`` is :func:`lift_constant` for ``i`` (1 when ``i`` is None).
    """
    p = model.p
    const = 1 + 0j if i is None else lift_constant(model, i)
    expo = np.array([-aj - 1 for aj in model.a] + list(model.b))
    sign = model.lift_sign()

    def evaluator(x, winding=None):
        logs = _logs(model, x, winding)
        mono = cmath.exp(np.sum(expo * logs))
        log_y = complex(np.sum(logs[p:]) - np.sum(logs[:p])) + (1j * math.pi if sign < 0 else 0)
        y = cmath.exp(log_y)
        w = round((log_y.imag - nm.principal_arg(y)) / (2 * math.pi))
        return const * mono * f(y, w)

    return evaluator


def lifted_basis(model: GkzModel, i: int, tol: float = 1e-15) -> Callable:
    """Lift of the i-th element of the basis at 0 of the one-variable equation."""
    params = model.one_variable_params()

    def f(y, w):
        return eval_basis_at_zero(params, y, tol, winding=w)[i - 1].value

    return lift_solution(model, f, i)


def lift_phase(model: GkzModel, i: int) -> complex:
    """``lifted_basis(i) / F_B(gamma_i)`` — the branch factor ``s**(-b_i)``."""
    if model.lift_sign() > 0:
        return 1 + 0j
    return cmath.exp(-1j * math.pi * model.b[i - 1])


def euler_fd_residuals(model: GkzModel, F: Callable, x, step: float = 1e-4) -> list:
    """``|x_1 d1 F -/+ x_j dj F - beta_{1,j} F|`` by central differences in ``log x_k``."""
    x = np.array([complex(v) for v in x])
    f0 = F(x)

    def theta(k):
        xp, xm = x.copy(), x.copy()
        xp[k] *= math.exp(step)
        xm[k] *= math.exp(-step)
        return (F(xp) - F(xm)) / (2 * step)

    t1 = theta(0)
    out = []
    beta = model.beta
    for j in range(2, model.n_vars + 1):
        sgn = -1 if j <= model.p else 1
        out.append(abs(t1 + sgn * theta(j - 1) - beta[(1, j)] * f0))
    return out


@dataclass
class PdeResidual:
    euler: list  # max termwise residual per Euler equation (j = 2..n_vars)
    euler_termwise_exact: bool  # every eigenvalue defect is exactly zero
    toric: float  # |d_P S_K - d_Q S_K| for the K-truncated series
    toric_bound: float  # |d_Q t_{K+1}|, the telescoped boundary term

    def as_list(self) -> list:
        return list(self.euler) + [self.toric]


def pde_residual(model: GkzModel, i: int, x, K: int = 40, winding=None) -> PdeResidual:
    """Residuals of the GKZ system for the K-truncated Gamma-series ``F_B(gamma_i)``.

    Euler equations act diagonally on every monomial, so their residual is
    assembled termwise from the exact eigenvalue defects.  The toric
    equation is applied termwise as derivative exponent shifts; the sum
    telescopes to the boundary term.
    """
    gam = _shifted_gamma(model, i, 0)
    terms, _ = truncated_gamma_series(model, i, x, K, winding)
    euler = [0.0] * (model.n_vars - 1)
    exact = True
    for m, t in terms:
        for j, d in enumerate(euler_defects(model, gam, m)):
            if d != _xint(0):
                exact = False
            euler[j] = max(euler[j], abs(_xcomplex(d) * t))
    dP = np.array([1] * model.p + [0] * (model.q + 1))
    dQ = 1 - dP
    sP = sum(t for _, t in truncated_gamma_series(model, i, x, K, winding, dP)[0])
    termsQ, nextQ = truncated_gamma_series(model, i, x, K, winding, dQ)
    sQ = sum(t for _, t in termsQ)
    return PdeResidual(euler, exact, float(abs(sP - sQ)), float(abs(nextQ[1])))


# --------------------------------------------------------------------------
# exponential factors and Stokes hypersurfaces


def exponential_factors(model: GkzModel) -> list:
    """Factor descriptors: ``0`` (multiplicity p) and ``-sigma (-e^{2 h pi i} z)^{1/sigma}``."""
    sigma = model.sigma_eff
    if sigma < 1:
        raise CaseError("no exponential factors in the regular case")
    p, q = model.p, model.q
    vec = [-1 / sigma] * p + [1 / sigma] * (q + 1)
    out = [{"kind": "zero", "multiplicity": p, "exponent_vector": [0.0] * model.n_vars}]
    for h in index_set(sigma):
        coef = -sigma * cmath.exp(1j * math.pi * (2 * h + 1) / sigma)
        out.append({"kind": "exponential", "h": h, "sigma": sigma, "multiplicity": 1,
                    "coefficient": coef, "exponent_vector": vec})
    return out


def is_good_decomposition(factors: list) -> bool:
    """Every pairwise difference is a single monomial (or zero)."""
    for i, f in enumerate(factors):
        for g in factors[i + 1:]:
            cf = f.get("coefficient", 0)
            cg = g.get("coefficient", 0)
            vecs = {tuple(v["exponent_vector"]) for v in (f, g) if v["kind"] == "exponential"}
            if len(vecs) > 1 and cf != cg:
                return False
    return True


@dataclass(frozen=True)
class SlicePoint:
    """A point of ``D_1 ... D_l``: the remaining arguments and ``theta_2..theta_l``."""

    l: int
    fixed_args: tuple  # arg x_{l+1} .. arg x_{p+q+1}
    fixed_thetas: tuple = ()  # theta_2 .. theta_l

    def __post_init__(self):
        norm = lambda vals: tuple(float(v) % (2 * math.pi) for v in vals)
        object.__setattr__(self, "fixed_args", norm(self.fixed_args))
        object.__setattr__(self, "fixed_thetas", norm(self.fixed_thetas))
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if len(self.fixed_thetas) != self.l - 1:
            raise ValueError(f"need {self.l - 1} fixed theta values")


def _slice_linear_parts(model: GkzModel, sl: SlicePoint):
    p = model.p
    if not 1 <= sl.l <= p:
        raise CaseError(f"slice codimension l must lie in 1..{p}")
    expected = model.n_vars - sl.l
    if len(sl.fixed_args) != expected:
        raise ValueError(f"need {expected} fixed arguments (x_{sl.l + 1}..x_{model.n_vars})")
    n_div = p - sl.l
    A = sum(sl.fixed_args[:n_div]) - sum(sl.fixed_args[n_div:])
    T = sum(sl.fixed_thetas)
    return A, T


@dataclass(frozen=True)
class SliceSolution:
    theta1: float
    pair: tuple  # (0, h) or (h1, h2)
    family: str  # "sps1" or "sps2"
    branch_sign: int
    n: int


def _wrap(value: float):
    n = -math.floor(value / (2 * math.pi))
    theta = value + 2 * math.pi * n
    if theta >= 2 * math.pi - 1e-15:
        theta -= 2 * math.pi
        n -= 1
    return theta, n


def factor_pairs(sigma: int) -> list:
    hs = index_set(sigma)
    pairs = [("sps1", (0, h)) for h in hs]
    if sigma > 1:
        pairs += [("sps2", (h1, h2)) for k, h1 in enumerate(hs) for h2 in hs[k + 1:]]
    return pairs


def hypersurface_slice(model: GkzModel, sl: SlicePoint, hpi_literal: bool = False) -> list:
    """Solve the hypersurface equations for ``theta_1`` in ``[0, 2 pi)``.

    (0, h):   theta_1 = +-pi/2 + 2 pi n - pi + 2 h pi + A - T
    (h1, h2): theta_1 = +-pi/2 + 2 pi n - pi + (h1 + h2) pi / sigma + A - T

    with ``A = sum_{j=l+1..p} arg x_j - sum_{j>p} arg x_j`` and
    ``T = theta_2 + ... + theta_l``.  ``hpi_literal`` drops the pi from the
    ``2 h pi`` term.
    """
    sigma = model.sigma_eff
    if sigma < 1:
        raise CaseError("no Stokes hypersurfaces in the regular case")
    A, T = _slice_linear_parts(model, sl)
    out = []
    for family, pair in factor_pairs(sigma):
        if family == "sps1":
            shift = 2 * pair[1] * (1.0 if hpi_literal else math.pi)
        else:
            shift = (pair[0] + pair[1]) * math.pi / sigma
        for sgn in (1, -1):
            theta, n = _wrap(sgn * math.pi / 2 - math.pi + shift + A - T)
            out.append(SliceSolution(theta, pair, family, sgn, n))
    out.sort(key=lambda s: (s.theta1, s.pair, s.branch_sign))
    return out


def rotation_angle(model: GkzModel, sl: SlicePoint) -> float:
    """``(pi - A + T) / sigma``; the argument of ``-z`` on the slice is ``theta_1 + sigma * angle``."""
    A, T = _slice_linear_parts(model, sl)
    return (math.pi - A + T) / model.sigma_eff


def rotate_lines(angles, angle: float, sigma: int) -> list:
    """Move one-variable directions onto the theta_1 circle: ``alpha - sigma * angle`` mod 2 pi."""
    return sorted(_wrap(a - sigma * angle)[0] for a in angles)


def rotated_stokes_lines(model: GkzModel, sl: SlicePoint) -> list:
    params = model.one_variable_params()
    return rotate_lines(line_angles(params), rotation_angle(model, sl), model.sigma_eff)


def circle_set_distance(u, v) -> float:
    """Symmetric Hausdorff distance between two finite sets of angles on the circle."""
    u, v = list(u), list(v)
    if not u or not v:
        return 0.0 if not u and not v else math.inf

    def d(x, y):
        r = abs(x - y) % (2 * math.pi)
        return min(r, 2 * math.pi - r)

    return max(max(min(d(x, y) for y in v) for x in u), max(min(d(x, y) for x in u) for y in v))


def label_angle(sigma: int, n: int) -> float:
    """Direction attached to ``S_n`` by its label: n pi, n pi/2sigma or n pi/sigma."""
    if sigma <= 2:
        return n * math.pi
    return n * math.pi / (2 * sigma) if sigma % 2 else n * math.pi / sigma


def gluing_data(model: GkzModel, sl: SlicePoint, **flags) -> dict:
    """Hypersector transitions on the theta_1 circle, labelled by one-variable Stokes matrices."""
    sigma = model.sigma_eff
    if sigma < 1:
        raise CaseError("no hypersectors in the regular case")
    params = model.one_variable_params()
    structure = build_structure(params, **flags)
    ang = rotation_angle(model, sl)
    N = transition_count(sigma)
    per = period(sigma)
    labels = valid_labels(sigma)
    transitions = []
    for n in range(N):
        m, r = divmod(n, per)
        transitions.append({
            "n": n,
            "theta1": _wrap(label_angle(sigma, n) - sigma * ang)[0],
            "label": labels[r],
            "conjugation_power": m,
            "matrix": structure.propagate(n),
        })
    grading = {"0": model.p}
    for h in index_set(sigma):
        grading[f"h={h}"] = 1
    return {
        "transitions": transitions,
        "grading_dimensions": grading,
        "rank": sum(grading.values()),
        "divisor_monodromy": "M_inf",
        "M_inf": structure.total_monodromy(),
        "rotation_angle": ang,
    }
