import logging

from src import ostrovskywaves as ow


logging.basicConfig(level=logging.INFO)

family = ow.ModelFamily.SignedPower
p = 2.0

curve = ow.costCurve(family, p, [0.5, 1.0, 1.5, 2.0], workers=2)
report = ow.checkSubadditivity(curve)

print(f'Strictly subadditive: {report.passed} (minimum margin {report.minimumMargin:.3e})')

for profile in curve.profiles:
    pohozaev = ow.pohozaevResiduals(profile)
    decay = ow.fitDecay(profile)
    stability = ow.analyzeStability(profile)

    print(
        f'lambda={profile.lam:g} omega={profile.omega:.8f} m={profile.energy:.8f} '
        f'r1={pohozaev.r1:.1e} r2={pohozaev.r2:.1e} kappa ratio={decay.ratio:.4f} verdict={stability.verdict.value}'
    )

profile = curve.profiles[1]
result = ow.perturbationExperiment(profile, 1e-3, 10.0, 1e-3, seed=7)

print(f'Orbital stability ratio after t=10: {result.ratio:.3f}')

ow.writeProfile(profile, 'out')
ow.writeTrace(result.trace, 'out/trace_example.csv')
