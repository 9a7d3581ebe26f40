"""Stokes hypersurfaces on a slice through the singular divisor.

For points of D_1 with the remaining arguments fixed, solves the
hypersurface equations for theta_1, compares with the one-variable Stokes
directions rotated by the rotation angle, and lists the hypersector
transitions labelled by one-variable Stokes matrices.
"""

import math

import numpy as np

from stokes_atlas import gkz

for p, q in [(2, 2), (1, 2)]:
    model = gkz.build_model(p, q, [0.1, 0.3][:p], [0.25, 0.55, 0.9])
    sl = gkz.SlicePoint(1, [0.4] * (p + q))
    sols = gkz.hypersurface_slice(model, sl)
    rotated = gkz.rotated_stokes_lines(model, sl)
    print(f"(p,q)=({p},{q}), sigma_eff={model.sigma_eff}, rotation angle {gkz.rotation_angle(model, sl) / math.pi:.4f} pi")
    for s in sols:
        print(f"   theta_1 = {s.theta1 / math.pi:.4f} pi  pair {s.pair} ({s.family}, sign {s.branch_sign:+d})")
    print(f"   rotated one-variable lines: {[round(a / math.pi, 4) for a in rotated]} (units of pi)")
    print(f"   set distance: {gkz.circle_set_distance([s.theta1 for s in sols], rotated):.2e}")
    g = gkz.gluing_data(model, sl)
    print(f"   grading dimensions {g['grading_dimensions']} (rank {g['rank']})")
    for t in g["transitions"]:
        print(f"   transition n={t['n']} at theta_1={t['theta1'] / math.pi:.4f} pi: {t['label']} conjugated {t['conjugation_power']}x")
    print()
