"""A small randomized-experiment suite over sampled contractions.

Each experiment draws random contractions (Gaussian matrices divided by
their certified norm) and aggregates a statistic: orbit decay, eigenvalue
moduli, and the approximate-point-spectrum gain grid.  The aggregates are
illustrative statistics about the sampling distribution, not evidence about
topological genericity.
"""

from __future__ import annotations

from lplab.montecarlo import ExperimentConfig, ExperimentKind, run_suite
from lplab.spaces import PNorm

configs = [
    ExperimentConfig(
        space=PNorm.lp(2.0), dim=24, samples=20, seed=11,
        experiment=ExperimentKind.ORBIT_DECAY,
    ),
    ExperimentConfig(
        space=PNorm.lp(2.0), dim=24, samples=20, seed=11,
        experiment=ExperimentKind.EIGEN_STATS,
    ),
    ExperimentConfig(
        space=PNorm.lp(2.0), dim=12, samples=4, seed=11,
        experiment=ExperimentKind.AP_SPECTRUM_GRID,
    ),
]

report = run_suite(configs)
for sec in report.sections:
    agg = next(r for r in sec.records if r.get("aggregate"))
    print(f"[{sec.status.upper():4}] {sec.name}")
    for key, val in agg.items():
        if key in ("aggregate", "note"):
            continue
        print(f"    {key}: {val}")
print()
print("note:", agg.get("note", ""))
