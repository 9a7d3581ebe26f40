"""Stokes structure of the hypergeometric equation at infinity.

Matrices act on the basis at infinity ordered as: the p power-like
solutions first (h = 1..p), then the sigma exponential solutions indexed by
``I_sigma`` in increasing order.  Elementary matrices ``E(k, l)`` use
1-based row/column indices so that the case formulas read naturally.

Index conventions for the independent matrices and their labels:

==========  ==============================  ========================
sigma       labels (n)                      transitions per x-turn
==========  ==============================  ========================
1           S_0 (0), S_pi (1)               2
2           S_0 (0)                         1
odd >= 3    S_0, S_pi/2s, S_pi/s, S_3pi/2s  4
even >= 4   S_0, S_pi/s                     2
==========  ==============================  ========================
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import numerics as nm
from .errors import CaseError
from .hyperfun import HyperParams, index_set, lam, numerical_monodromy

LINE_DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class StokesConstants:
    lam: complex
    zeta: complex
    A: tuple  # A[h] for h = 0..sigma (A[0] = -1)
    B: tuple  # B[h] = -exp(2 pi i lam) A[h]
    index_set: tuple


def compute_constants(params: HyperParams) -> StokesConstants:
    """lambda, zeta, I_sigma and the Taylor-derived constants A_h, B_h."""
    sigma = params.sigma
    if sigma < 1:
        raise CaseError("Stokes constants need sigma >= 1")
    order = sigma
    num = nm.linear_product_series([cmath.exp(nm.TWO_PI_I * v) for v in params.nu], order)
    den = nm.linear_product_series([cmath.exp(nm.TWO_PI_I * m) for m in params.mu], order)
    taylor = nm.series_divide(num, den).coeffs
    derivs = [math.factorial(h) * taylor[h] for h in range(order + 1)]
    lm = lam(params)
    e2 = cmath.exp(nm.TWO_PI_I * lm)
    A = tuple(complex(-d) for d in derivs)
    B = tuple(complex(e2 * d) for d in derivs)
    return StokesConstants(lm, cmath.exp(nm.TWO_PI_I / sigma), A, B, tuple(index_set(sigma)))


# --------------------------------------------------------------------------
# lines and sectors


@dataclass(frozen=True)
class StokesLine:
    family: str  # "sl1" for (0, h), "sl2" for (h1, h2)
    pair: tuple
    angles: tuple  # arg t in [0, 2 pi)


def _mod2pi(a: float) -> float:
    r = math.fmod(a, 2 * math.pi)
    if r < 0:
        r += 2 * math.pi
    if 2 * math.pi - r < LINE_DEDUP_TOL:
        r = 0.0
    return r


def _dedup(values) -> list:
    out = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > LINE_DEDUP_TOL:
            out.append(v)
    if len(out) > 1 and 2 * math.pi - out[-1] + out[0] < LINE_DEDUP_TOL:
        out.pop()
    return out


def stokes_lines(params: HyperParams) -> list:
    """Stokes directions in the ramified coordinate ``t = x**(1/sigma)``."""
    sigma = params.sigma
    if sigma < 1:
        raise CaseError("Stokes lines need sigma >= 1")
    hs = index_set(sigma)
    lines = []
    for h in hs:
        base = -2 * h * math.pi / sigma - math.pi / 2
        lines.append(StokesLine("sl1", (0, h), tuple(_dedup(_mod2pi(base + n * math.pi) for n in (0, 1)))))
    if sigma > 2:
        for i, h1 in enumerate(hs):
            for h2 in hs[i + 1:]:
                base = (h1 + h2) * math.pi / sigma
                lines.append(StokesLine("sl2", (h1, h2), tuple(_dedup(_mod2pi(base + n * math.pi) for n in (0, 1)))))
    return lines


def line_angles(params: HyperParams) -> list:
    """All Stokes directions (t-coordinate) as one deduplicated sorted list."""
    return _dedup(a for line in stokes_lines(params) for a in line.angles)


@dataclass(frozen=True)
class Sector:
    n: int
    lo: float  # arg x, open interval
    hi: float


def stokes_sectors(params: HyperParams) -> list:
    sigma = params.sigma
    if sigma < 1:
        raise CaseError("Stokes sectors need sigma >= 1")
    if sigma <= 2:
        return [Sector(n, -math.pi / 2 + (n - 1) * math.pi, math.pi / 2 + n * math.pi) for n in range(3)]
    count = 4 * sigma if sigma % 2 else 2 * sigma
    step = math.pi / (2 * sigma)
    return [Sector(n, -math.pi / 2 + (n - 1) * step, math.pi / 2 + n * step) for n in range(count + 1)]


# --------------------------------------------------------------------------
# formal monodromy and matrices


def formal_monodromy(params: HyperParams) -> np.ndarray:
    sigma, p, q = params.sigma, params.p, params.q
    if sigma < 1:
        raise CaseError("formal monodromy at infinity needs sigma >= 1")
    M = np.zeros((q, q), dtype=np.complex128)
    for j, m in enumerate(params.mu):
        M[j, j] = cmath.exp(-nm.TWO_PI_I * m)
    if sigma == 1:
        M[p, p] = cmath.exp(nm.TWO_PI_I * lam(params))
        return M
    R = np.zeros((sigma, sigma))
    R[0, sigma - 1] = 1.0
    R[np.arange(1, sigma), np.arange(sigma - 1)] = 1.0
    M[p:, p:] = R
    return M


LABELS = {
    "S_0": "S_0",
    "S0": "S_0",
    "S_pi": "S_pi",
    "Spi": "S_pi",
    "S_pi/2sigma": "S_pi/2sigma",
    "S_pi/2s": "S_pi/2sigma",
    "S_pi/sigma": "S_pi/sigma",
    "S_pi/s": "S_pi/sigma",
    "S_3pi/2sigma": "S_3pi/2sigma",
    "S_3pi/2s": "S_3pi/2sigma",
}


def valid_labels(sigma: int) -> list:
    if sigma == 1:
        return ["S_0", "S_pi"]
    if sigma == 2:
        return ["S_0"]
    if sigma % 2:
        return ["S_0", "S_pi/2sigma", "S_pi/sigma", "S_3pi/2sigma"]
    return ["S_0", "S_pi/sigma"]


def canonical_label(sigma: int, label: str) -> str:
    lab = LABELS.get(str(label).strip())
    if lab is None or lab not in valid_labels(sigma):
        raise CaseError(f"label {label!r} is not valid for sigma={sigma}; expected one of {valid_labels(sigma)}")
    return lab


def label_to_n(sigma: int, label: str) -> int:
    return valid_labels(sigma).index(canonical_label(sigma, label))


def period(sigma: int) -> int:
    """Number of stored independent matrices: S_{n + period} = M^{-1} S_n M."""
    if sigma < 1:
        raise CaseError("sigma >= 1 required")
    return len(valid_labels(sigma))


def transition_count(sigma: int) -> int:
    """N in ``M_inf = M S_{N-1} ... S_0``, inferred from the sector counts."""
    if sigma <= 2:
        return 2
    return 4 * sigma if sigma % 2 else 2 * sigma


def _g1(mu, nu, k):
    return nm.gamma_ratio([1 + mu[k] - m for m in mu], [1 + mu[k] - n for n in nu])


def _g2(mu, nu, k):
    return nm.gamma_ratio([m - mu[k] for i, m in enumerate(mu) if i != k], [n - mu[k] for n in nu])


class _Assembler:
    """Accumulates ``coef * E(row, col)`` terms and records index anomalies."""

    def __init__(self, q: int, label: str):
        self.q = q
        self.label = label
        self.S = np.eye(q, dtype=np.complex128)
        self.issues = []

    def add(self, row: int, col: int, coef: complex, term: str):
        if not (1 <= row <= self.q and 1 <= col <= self.q):
            self.issues.append(f"{self.label}: {term} index E[{row},{col}] outside 1..{self.q}; term dropped")
            return
        if row == col:
            self.issues.append(f"{self.label}: {term} lands on diagonal E[{row},{col}]")
        self.S[row - 1, col - 1] += coef


def stokes_matrix_with_issues(
    params: HyperParams, label: str, k0_term: bool = False, raw_sigma2_prefactor: bool = False
):
    """Assemble one independent Stokes matrix; returns ``(S, issues)``.

    ``k0_term`` includes the k=0 summand of the A-sum for sigma = 0 mod 4;
    ``raw_sigma2_prefactor`` squares the ``(2 pi)**sigma * i`` factor for
    sigma = 2 mod 4 (the factor written twice).
    """
    sigma, p, q = params.sigma, params.p, params.q
    label = canonical_label(sigma, label)
    mu, nu = params.mu, params.nu
    c = compute_constants(params)
    lm, A, B = c.lam, c.A, c.B
    e2m = cmath.exp(-nm.TWO_PI_I * lm)  # e^{-2 i pi lambda}

    def zeta(x):
        return cmath.exp(nm.TWO_PI_I * x / sigma)

    out = _Assembler(q, label)
    two_pi = 2 * math.pi

    if sigma == 1:
        if label == "S_0":
            for k in range(1, q):
                out.add(q, k, 2j * math.pi * _g1(mu, nu, k - 1), "G1")
        else:
            for k in range(1, q):
                out.add(k, q, 2j * math.pi * cmath.exp(1j * math.pi * (lm + mu[k - 1])) * _g2(mu, nu, k - 1), "G2")
        return out.S, out.issues

    if sigma == 2:
        out.add(q - 1, q, A[1], "A1")
        for k in range(1, q - 1):
            out.add(k, q, 4j * math.pi**2 * _g2(mu, nu, k - 1), "G2")
            out.add(q, k, 2j * math.pi * _g1(mu, nu, k - 1), "G1")
        return out.S, out.issues

    if sigma % 2 == 0 and label == "S_0":
        pref = two_pi**sigma * 1j
        if sigma % 4 == 2 and raw_sigma2_prefactor:
            pref = pref * pref
        for k in range(1, p + 1):
            out.add(k, q, pref * _g2(mu, nu, k - 1), "G2")
            out.add(sigma // 2 + p, k, two_pi * _g1(mu, nu, k - 1), "G1")
        if sigma % 4 == 0:
            s4 = sigma // 4
            for k in range(0 if k0_term else 1, s4 + 1):
                out.add(3 * s4 + p - k, 3 * s4 + p + k, zeta(-2 * lm * k) * A[2 * k], f"A{2 * k}")
            for k in range(1, s4):
                out.add(s4 + p + k, s4 + p - k, e2m * zeta(2 * lm * k) * B[2 * k], f"B{2 * k}")
        else:
            up, dn = (sigma + 2) // 4, (sigma - 2) // 4
            for k in range(1, up + 1):
                out.add(3 * up + p - k, 3 * dn + p + k + 1, zeta(-lm * (2 * k - 1)) * A[2 * k - 1], f"A{2 * k - 1}")
            for k in range(1, dn + 1):
                out.add(dn + p + k - 1, up + p - k, e2m * zeta(lm * (2 * k - 1)) * B[2 * k - 1], f"B{2 * k - 1}")
        return out.S, out.issues

    if sigma % 2 == 0:  # S_pi/sigma
        if sigma % 4 == 0:
            s4 = sigma // 4
            for k in range(1, s4 + 1):
                out.add(3 * s4 + p - k, 3 * s4 + p + k - 1, zeta(-lm * (2 * k - 1)) * A[2 * k - 1], f"A{2 * k - 1}")
            for k in range(1, s4):
                out.add(s4 + p + k - 1, s4 + p - k, e2m * zeta(lm * (2 * k - 1)) * B[2 * k - 1], f"B{2 * k - 1}")
            out.add(sigma // 2 + p - 1, q, cmath.exp(-1j * lm * math.pi) * B[sigma // 2 - 1], f"B{sigma // 2 - 1}")
        else:
            dn = (sigma - 2) // 4
            for k in range(1, dn + 1):
                out.add(3 * dn + p - k, 3 * dn + p + k + 1, zeta(-2 * lm * k) * A[2 * k], f"A{2 * k}")
            out.add(
                sigma // 2 + p - 1, q, cmath.exp(-1j * math.pi * lm) * zeta(-lm) * B[sigma // 2 - 1], f"B{sigma // 2 - 1}"
            )
            for k in range(1, dn):
                out.add(dn + p + k - 1, dn + p - k, e2m * zeta(2 * lm * k) * B[2 * k], f"B{2 * k}")
        return out.S, out.issues

    # odd sigma >= 3
    if label == "S_0":
        for k in range(1, p + 1):
            out.add((p + q + 1) // 2, k, 2j * math.pi * _g1(mu, nu, k - 1), "G1")
        return out.S, out.issues
    if label == "S_pi/sigma":
        for k in range(1, p + 1):
            coef = two_pi**sigma * cmath.exp(1j * math.pi * (mu[k - 1] + lm / sigma)) * _g2(mu, nu, k - 1)
            out.add(k, q, coef, "G2")
        return out.S, out.issues
    tail = cmath.exp(-1j * lm * math.pi) * zeta(-lm / 2) * B[(sigma - 1) // 2]
    if sigma % 4 == 1:
        s = (sigma - 1) // 4
        if label == "S_pi/2sigma":
            for k in range(1, s + 1):
                out.add(3 * s + p - k + 1, 3 * s + p + k + 1, zeta(-2 * lm * k) * A[2 * k], f"A{2 * k}")
            for k in range(1, s + 1):
                out.add(s + p + k, s + p - k + 1, e2m * zeta(lm * (2 * k - 1)) * B[2 * k - 1], f"B{2 * k - 1}")
        else:
            for k in range(1, s + 1):
                out.add(3 * s + p - k + 1, 3 * s + p + k, zeta(-lm * (2 * k - 1)) * A[2 * k - 1], f"A{2 * k - 1}")
            for k in range(1, s):
                out.add(s + p + k, s + p - k, e2m * zeta(2 * lm * k) * B[2 * k], f"B{2 * k}")
            out.add((sigma - 1) // 2 + p, q, tail, f"B{(sigma - 1) // 2}")
    else:
        s = (sigma + 1) // 4
        if label == "S_pi/2sigma":
            for k in range(1, s + 1):
                out.add(3 * s + p - k, 3 * s + p + k - 1, zeta(-lm * (2 * k - 1)) * A[2 * k - 1], f"A{2 * k - 1}")
            for k in range(1, s):
                out.add(s + p + k, s + p - k, e2m * zeta(2 * lm * k) * B[2 * k], f"B{2 * k}")
        else:
            for k in range(1, s):
                out.add(3 * s + p - k - 1, 3 * s + p + k - 1, zeta(-2 * lm * k) * A[2 * k], f"A{2 * k}")
            for k in range(1, s):
                out.add(s + p + k - 1, s + p - k, e2m * zeta(lm * (2 * k - 1)) * B[2 * k - 1], f"B{2 * k - 1}")
            out.add((sigma + 1) // 2 + p, q, tail, f"B{(sigma - 1) // 2}")
    return out.S, out.issues


def stokes_matrix(params: HyperParams, label: str, k0_term: bool = False, raw_sigma2_prefactor: bool = False):
    return stokes_matrix_with_issues(params, label, k0_term, raw_sigma2_prefactor)[0]


# --------------------------------------------------------------------------
# structure, propagation, total monodromy


@dataclass(frozen=True)
class StokesStructure:
    params: HyperParams
    constants: StokesConstants
    lines: tuple
    sectors: tuple
    formal_monodromy: np.ndarray
    matrices: dict  # canonical label -> matrix
    exponential_factors: tuple
    issues: tuple
    flags: dict = field(default_factory=dict)

    @property
    def sigma(self) -> int:
        return self.params.sigma

    def independent(self) -> list:
        return [self.matrices[lab] for lab in valid_labels(self.sigma)]

    def propagate(self, n: int) -> np.ndarray:
        """``S_n = M^{-m} S_r M^m`` with ``(m, r) = divmod(n, period)``."""
        N = transition_count(self.sigma)
        if not 0 <= n <= N:
            raise CaseError(f"transition index n={n} outside 0..{N}")
        m, r = divmod(n, period(self.sigma))
        S = self.independent()[r]
        if m == 0:
            return S.copy()
        Mm = np.linalg.matrix_power(self.formal_monodromy, m)
        return np.linalg.solve(Mm, S @ Mm)

    def total_monodromy(self, n_transitions: int | None = None) -> np.ndarray:
        """``M S_{N-1} ... S_1 S_0``."""
        N = transition_count(self.sigma) if n_transitions is None else n_transitions
        out = np.eye(self.params.q, dtype=np.complex128)
        for n in range(N):
            out = self.propagate(n) @ out
        return self.formal_monodromy @ out


def exponential_factor_list(sigma: int, p: int) -> list:
    """Descriptors of the factor set: ``0`` (multiplicity p) and ``-sigma (e^{2h pi i} x)^{1/sigma}``."""
    out = [{"kind": "zero", "multiplicity": p}]
    for h in index_set(sigma):
        out.append(
            {
                "kind": "exponential",
                "h": h,
                "sigma": sigma,
                "coefficient": -sigma * cmath.exp(nm.TWO_PI_I * h / sigma),
            }
        )
    return out


def build_structure(params: HyperParams, k0_term: bool = False, raw_sigma2_prefactor: bool = False) -> StokesStructure:
    if params.sigma < 1:
        raise CaseError("Stokes structure needs sigma >= 1")
    mats, issues = {}, []
    for lab in valid_labels(params.sigma):
        S, iss = stokes_matrix_with_issues(params, lab, k0_term, raw_sigma2_prefactor)
        mats[lab] = S
        issues.extend(iss)
    return StokesStructure(
        params=params,
        constants=compute_constants(params),
        lines=tuple(stokes_lines(params)),
        sectors=tuple(stokes_sectors(params)),
        formal_monodromy=formal_monodromy(params),
        matrices=mats,
        exponential_factors=tuple(exponential_factor_list(params.sigma, params.p)),
        issues=tuple(issues),
        flags={"k0_term": k0_term, "raw_sigma2_prefactor": raw_sigma2_prefactor},
    )


def propagate_stokes(params: HyperParams, n: int, **flags) -> np.ndarray:
    return build_structure(params, **flags).propagate(n)


def total_monodromy(params: HyperParams, **flags) -> np.ndarray:
    return build_structure(params, **flags).total_monodromy()


# --------------------------------------------------------------------------
# audit


def multiset_distance(u, v) -> float:
    """Largest deviation under the optimal one-to-one matching of two multisets."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.size != v.size:
        return math.inf
    cost = np.abs(u[:, None] - v[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols])) if u.size else 0.0


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    mandatory: bool = True
    detail: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.residual = float(self.residual)


@dataclass
class AuditReport:
    sigma: int
    checks: list
    issues: list
    flags: dict
    closed_form: dict
    oracle: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.mandatory)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def audit(
    params: HyperParams,
    k0_term: bool = False,
    raw_sigma2_prefactor: bool = False,
    tol: float = 1e-8,
    oracle: bool = True,
    base_x: complex = 0.8 + 0.3j,
) -> AuditReport:
    """Cross-check the closed-form Stokes data; failures become report entries."""
    params.require_generic()
    st = build_structure(params, k0_term, raw_sigma2_prefactor)
    sigma, q = st.sigma, params.q
    N = transition_count(sigma)
    per = period(sigma)
    M = st.formal_monodromy
    checks = []

    Ss = [st.propagate(n) for n in range(N + 1)]
    diag_res = max(float(np.max(np.abs(np.diag(S) - 1))) for S in Ss)
    checks.append(Check("unipotent_diagonal", diag_res < 1e-12, diag_res, True, "max |S_nn - 1| over all S_n"))
    det_res = max(abs(np.linalg.det(S) - 1) for S in Ss)
    checks.append(Check("det_one", det_res < 1e-10, float(det_res), True, "max |det S_n - 1|"))
    nil = 0.0
    for S in Ss:
        D = S - np.eye(q)
        scale = max(1.0, float(np.linalg.norm(D, 2))) ** q
        nil = max(nil, float(np.max(np.abs(np.linalg.matrix_power(D, q)))) / scale)
    checks.append(Check("nilpotent_part", nil < 1e-12, nil, False, "relative |(S_n - I)^q|"))
    checks.append(Check("index_issues", not st.issues, float(len(st.issues)), True, "; ".join(st.issues)))

    Minv = np.linalg.inv(M)
    clos = max(float(np.max(np.abs(Ss[n + per] - Minv @ Ss[n] @ M))) for n in range(N + 1 - per))
    checks.append(Check("conjugation_closure", clos < 1e-10, clos, True, "S_{n+period} = M^-1 S_n M"))

    c = st.constants
    e2 = cmath.exp(nm.TWO_PI_I * c.lam)
    bres = max(abs(b + e2 * a) for a, b in zip(c.A, c.B))
    checks.append(Check("B_equals_minus_e2pilam_A", bres == 0.0, float(bres), True))
    if sigma >= 2:
        R = M[params.p:, params.p:]
        rres = float(np.max(np.abs(np.linalg.matrix_power(R, sigma) - np.eye(sigma))))
        checks.append(Check("R_power_sigma", rres < 1e-14, rres, True))

    Minf = st.total_monodromy()
    ev = np.linalg.eigvals(Minf)
    target = [cmath.exp(nm.TWO_PI_I * n) for n in params.nu]
    reverse = [cmath.exp(-nm.TWO_PI_I * n) for n in params.nu]
    spectral = multiset_distance(ev, target)
    mandatory = sigma in (1, 2)
    checks.append(Check("spectral_identity", spectral < tol, spectral, mandatory, "eig(M_inf) vs exp(2 pi i nu)"))
    rev = multiset_distance(ev, reverse)
    checks.append(Check("spectral_identity_reversed", rev < tol, rev, False, "eig(M_inf) vs exp(-2 pi i nu)"))
    Mturn = st.total_monodromy(per)
    turn = multiset_distance(np.linalg.eigvals(Mturn), target)
    turn_rev = multiset_distance(np.linalg.eigvals(Mturn), reverse)
    checks.append(
        Check("spectral_per_x_turn", min(turn, turn_rev) < tol, min(turn, turn_rev), False,
              f"M S_{per - 1}..S_0: vs exp(2 pi i nu) {turn:.3e}, vs exp(-2 pi i nu) {turn_rev:.3e}")
    )
    dres = abs(np.linalg.det(Minf) * cmath.exp(-nm.TWO_PI_I * sum(params.nu)) - 1)
    checks.append(Check("det_identity", dres < 1e-10, float(dres), False, "|det(M_inf) exp(-2 pi i sum nu) - 1|"))

    oracle_vals = {}
    if oracle:
        M0 = numerical_monodromy(params, base_x)
        expected = np.diag([cmath.exp(nm.TWO_PI_I * b) for b in params.b])
        ores = float(np.max(np.abs(M0 - expected)))
        checks.append(Check("zero_monodromy_oracle", ores < 1e-6, ores, True, "numerical M_0 vs diag(exp(2 pi i b))"))
        oracle_vals["M0"] = M0
        o_inv = multiset_distance(ev, np.linalg.eigvals(np.linalg.inv(M0)))
        o_dir = multiset_distance(ev, np.linalg.eigvals(M0))
        checks.append(
            Check("oracle_spectrum_match", min(o_inv, o_dir) < tol, min(o_inv, o_dir), False,
                  f"eig(M_inf) vs eig(M_0^-1) {o_inv:.3e}, vs eig(M_0) {o_dir:.3e}")
        )

    closed = {"M": M, "M_inf": Minf, "eig_M_inf": ev, "matrices": dict(st.matrices)}
    return AuditReport(sigma, checks, list(st.issues), dict(st.flags), closed, oracle_vals)
