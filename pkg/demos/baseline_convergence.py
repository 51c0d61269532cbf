# Error estimates for a reduced Burgers model
# ===========================================
#
# We train POD and DEIM bases on one implicit-Euler run of the viscous
# Burgers equation and then ask how well the cheap dual-weighted-residual
# estimate tracks the actual error in the quantity of interest,
#
#     Q = sum over steps of sum of u^2 over nodes in [0.05, 0.1].
#
# Everything here uses the default configuration: 201 grid points,
# 201 time steps, viscosity 0.1.

from romqoi.config import ExperimentConfig
from romqoi.experiments import BurgersStudy

study = BurgersStudy(ExperimentConfig())
fom, q_full = study.truth()
print(f"full model: Q = {q_full:.10f}")

# The state basis is built from forward states and adjoint multipliers
# side by side, so a handful of modes already describe both.

sv = study.offline.state_basis.singular_values
print("leading singular values:", " ".join(f"{s:.2e}" for s in sv[:8]))

# Now sweep the POD dimension with 40 DEIM points. ``ratio`` is
# estimate / true error; values close to one mean the estimate can stand
# in for the unknown error.

print(f"\n{'k':>3} {'true error':>12} {'estimate':>12} {'ratio':>7}")
for k in (5, 10, 12, 15, 20, 25, 30):
    r = study.row(k, 40)
    print(f"{k:>3} {r['true_error']:>12.3e} {r['estimated_error']:>12.3e} {r['ratio']:>7.3f}")

# For small k the Galerkin error dominates and the estimate misses it:
# the projected residual is orthogonal to the basis, so only the DEIM part
# of the defect is seen. Once k is around 12 both errors are small and the
# estimate is within a few percent.

# Same thing at fixed k = 15, varying the number of DEIM points.

print(f"\n{'m':>3} {'true error':>12} {'ratio':>7}")
for m in (6, 10, 14, 20, 30, 40):
    r = study.row(15, m)
    print(f"{m:>3} {r['true_error']:>12.3e} {r['ratio']:>7.3f}")
