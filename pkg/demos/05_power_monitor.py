# Countermeasure: faked states ride on continuous blinding light, so a power
# meter at the analyzer entrance sees far more than single photons ever
# deliver. The monitor flags every attack scenario and stays quiet for a
# genuine source.
from fakebell import config_from_dict, run

for scenario in ("genuine", "intercept_resend", "twin_fsg_passive", "twin_fsg_active"):
    rep = run(config_from_dict({"scenario": scenario, "n_pairs": 50_000, "seed": 1}))
    power = ", ".join(f"{p} {v:.3f}" for p, v in rep.mean_power.items())
    print(f"{scenario:18s} S = {rep.chsh.S:+.3f}  mean input power: {power}  alarm: {rep.alarm}")
