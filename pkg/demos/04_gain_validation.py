"""Gain validation walkthrough: strict inequalities and the advisory bound.

Shows the three strict conditions of the state-dependent-gain variant
(boundary values fail), the empirical check of declared drift constants,
and the partial lower bounds reported for the constant-gain variant,
whose full theorem bound contains terms that cannot be computed and must
be acknowledged explicitly.

    python3 demos/04_gain_validation.py
"""
import numpy as np

from datsim import (
    GainSetLipschitz,
    SamplingBox,
    algebraic_connectivity,
    estimate_lipschitz,
    family_graph,
    incidence,
    make_dynamics,
    validate_gains_bounded,
    validate_gains_lipschitz,
)

print("strict gain conditions (rho1 = 1, rho2 = 0.5)")
print("=" * 60)
candidates = {
    "good set": GainSetLipschitz(kappa=2.0, alpha=3.5, gamma=0.5, eta=1.5),
    "kappa at boundary": GainSetLipschitz(kappa=1.0, alpha=3.5, gamma=0.5, eta=1.5),
    "alpha at boundary": GainSetLipschitz(kappa=2.0, alpha=3.0, gamma=0.5, eta=1.5),
    "eta at boundary": GainSetLipschitz(kappa=2.0, alpha=3.5, gamma=0.5, eta=1.0),
}
for label, gains in candidates.items():
    report = validate_gains_lipschitz(gains, rho1=1.0, rho2=0.5)
    print(f"\n{label}:")
    for line in report.lines():
        print(f"  {line}")

print("\n\nempirical check of declared Lipschitz constants")
print("=" * 60)
spec = make_dynamics("pendulum", 2, {"a": 1.0, "b": 0.5})
rho1_hat, rho2_hat = estimate_lipschitz(spec, SamplingBox(), 10_000, seed=1)
print(f"pendulum(a=1, b=0.5): sampled quotients "
      f"rho1_hat = {rho1_hat:.6f} (declared {spec.rho1}), "
      f"rho2_hat = {rho2_hat:.6f} (declared {spec.rho2})")

misdeclared = make_dynamics("pendulum", 2, {"a": 1.0, "b": 0.5}, rho1=0.5)
rho1_hat, _ = estimate_lipschitz(misdeclared, SamplingBox(), 10_000, seed=1)
print(f"misdeclared rho1 = 0.5 is caught: sampled {rho1_hat:.6f} "
      f"> 0.5 * (1 + 1e-6) -> {rho1_hat > 0.5 * (1 + 1e-6)}")

print("\n\nadvisory bounds for the constant-gain variant")
print("=" * 60)
g = family_graph("ring", 4)
lam2 = algebraic_connectivity(g)
rng = np.random.default_rng(11)
x0 = rng.uniform(-1.0, 1.0, (4, 2))
advisory = validate_gains_bounded(alpha=4.0, eta=2.5, lambda2=lam2, fbar=1.0,
                                  n=4, x0=x0, d_matrix=incidence(g))
for line in advisory.lines():
    print(line)
