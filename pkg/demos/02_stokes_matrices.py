"""Stokes data at infinity and an audit of the closed-form matrices.

Computes the constants, Stokes lines, sectors, formal monodromy and the
explicit Stokes matrices for a few values of sigma = q - p, then runs the
audit: algebraic checks (unipotency, det 1, propagation), the spectral
identity for the total monodromy, and the numerical monodromy oracle.
"""

import math

import numpy as np

from stokes_atlas import stokes as st
from stokes_atlas.hyperfun import HyperParams

np.set_printoptions(precision=5, suppress=True, linewidth=110)

params = HyperParams.from_mu_nu([0.1], [0.25, 0.55])
c = st.compute_constants(params)
print(f"sigma = {params.sigma}, lambda = {c.lam:.4f}, I_sigma = {list(c.index_set)}")
print("Stokes directions (t-plane):", [f"{a / math.pi:.3f} pi" for a in st.line_angles(params)])
print("Sectors:", [(f"{s.lo / math.pi:.2f} pi", f"{s.hi / math.pi:.2f} pi") for s in st.stokes_sectors(params)])
structure = st.build_structure(params)
for label, S in structure.matrices.items():
    print(f"{label}:\n{S}")
print("M_inf = M S_pi S_0:\n", structure.total_monodromy())

print("\nAudit for sigma = 1 .. 6 (mandatory checks marked *):")
rng = np.random.default_rng(1)
for sigma in range(1, 7):
    b = list(np.linspace(0.11, 0.93, sigma + 1) + 0.05j * rng.standard_normal(sigma + 1))
    P = HyperParams([0.37 + 0.02j], b)
    rep = st.audit(P, oracle=sigma <= 2)
    failed = [("*" if ch.mandatory else "") + ch.name for ch in rep.checks if not ch.passed]
    print(f"  sigma={sigma}: {'all pass' if not failed else 'failing: ' + ', '.join(failed)}")
    if rep.issues:
        print(f"           index issues: {list(rep.issues)}")

print("\nsigma = 1 orientation: eigenvalues of M_inf against exp(+-2 pi i nu)")
rep = st.audit(params)
for name in ("spectral_identity", "spectral_identity_reversed", "oracle_spectrum_match"):
    ch = rep.check(name)
    print(f"  {name:28s} residual {ch.residual:.2e}")
