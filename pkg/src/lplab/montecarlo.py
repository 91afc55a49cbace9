"""Randomized experiments on contractions: sampling and summary statistics.

Every experiment here is illustrative: it samples random contractions on a
finite window, measures something, and reports the distribution.  Nothing in
this module is evidence about category-theoretic (Baire) genericity, and the
emitted reports say so explicitly.

Determinism contract: a suite run is a pure function of its configuration
list.  Per-sample random streams are split from each experiment's seed with
``SeedSequence.spawn``, samples are aggregated in index order, and the worker
count (``LPLAB_THREADS``) never affects the emitted bytes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .operators import StructuredOperator, op_norm
from .reports import Report, Section, make_report, make_section
from .spaces import PNorm

__all__ = [
    "ExperimentKind",
    "ExperimentConfig",
    "sample_contraction",
    "isometry_defect",
    "ap_grid_points",
    "ap_grid_matrix",
    "ap_gain_profile",
    "exp_orbit_decay",
    "exp_eigen_stats",
    "exp_isometry_defect",
    "exp_apspectrum_grid",
    "exp_disjoint_support",
    "run_experiment",
    "run_suite",
    "space_to_token",
    "space_from_token",
]

MAX_DIM = 256
MAX_SAMPLES = 100_000
ORBIT_STEPS = 200
DECAY_THRESHOLD = 0.01
SUPPORT_TOL = 1e-9
_SCALE_PAD = 1e-9

ILLUSTRATIVE_NOTE = (
    "illustrative statistics over random samples; not evidence about "
    "Baire-category genericity"
)


class ExperimentKind(Enum):
    ORBIT_DECAY = "OrbitDecay"
    EIGEN_STATS = "EigenStats"
    ISOMETRY_DEFECT = "IsometryDefect"
    AP_SPECTRUM_GRID = "ApSpectrumGrid"
    DISJOINT_SUPPORT = "DisjointSupport"


def space_to_token(pn: PNorm) -> str:
    """Short parseable space name: "c0" or the exponent as text."""
    return "c0" if pn.is_c0 else repr(pn.p)


def space_from_token(token: str) -> PNorm:
    """Inverse of :func:`space_to_token`; also accepts labels like "l2"."""
    tok = token.strip().lower()
    if tok == "c0":
        return PNorm.c0()
    if tok.startswith("l"):
        tok = tok[1:]
    return PNorm.lp(float(tok))


@dataclass(frozen=True)
class ExperimentConfig:
    """One randomized experiment: which statistic, on which space, how much."""

    space: PNorm
    dim: int
    samples: int
    seed: int
    experiment: ExperimentKind

    def __post_init__(self) -> None:
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be in [1, {MAX_DIM}], got {self.dim}")
        if not 0 <= self.samples <= MAX_SAMPLES:
            raise ValueError(
                f"samples must be in [0, {MAX_SAMPLES}], got {self.samples}"
            )
        if not isinstance(self.experiment, ExperimentKind):
            raise ValueError("experiment must be an ExperimentKind")

    def to_dict(self) -> dict[str, Any]:
        return {
            "space": space_to_token(self.space),
            "dim": self.dim,
            "samples": self.samples,
            "seed": self.seed,
            "experiment": self.experiment.value,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> "ExperimentConfig":
        return ExperimentConfig(
            space=space_from_token(str(data["space"])),
            dim=int(data["dim"]),
            samples=int(data["samples"]),
            seed=int(data["seed"]),
            experiment=ExperimentKind(data["experiment"]),
        )


# ---------------------------------------------------------------------------
# sampling


def sample_contraction(dim: int, pn: PNorm, rng: np.random.Generator) -> np.ndarray:
    """Draw a random strict contraction on the dim-dimensional window.

    A complex Gaussian matrix is divided by its certified operator norm
    times (1 + 1e-9), so the result's norm is at most 1 up to the
    certificate's own residual.
    """
    G = (
        rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    ) / np.sqrt(2.0)
    cert = op_norm(StructuredOperator.from_dense(G), pn)
    if cert.value <= 0.0:
        return G
    return G / (cert.value * (1.0 + _SCALE_PAD))


def _vec_norm(v: np.ndarray, pn: PNorm) -> float:
    a = np.abs(v)
    if a.size == 0:
        return 0.0
    if pn.is_c0:
        return float(a.max())
    return float((a**pn.p).sum() ** (1.0 / pn.p))


# ---------------------------------------------------------------------------
# per-sample machinery


def _thread_count() -> int:
    raw = os.environ.get("LPLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def _map_samples(
    cfg: ExperimentConfig,
    fn: Callable[[int, np.random.Generator], dict[str, Any]],
) -> list[dict[str, Any]]:
    """Run fn once per sample on an independent seeded stream.

    Exceptions become error records with ok=False instead of aborting;
    results always come back in sample-index order regardless of the
    worker count.
    """
    streams = np.random.SeedSequence(cfg.seed).spawn(max(cfg.samples, 1))

    def run(i: int) -> dict[str, Any]:
        rng = np.random.default_rng(streams[i])
        try:
            rec = fn(i, rng)
        except Exception as exc:  # propagate per sample, keep the suite alive
            return {
                "sample": i,
                "error": f"{type(exc).__name__}: {exc}",
                "ok": False,
            }
        rec.setdefault("sample", i)
        return rec

    workers = _thread_count()
    if workers == 1 or cfg.samples <= 1:
        return [run(i) for i in range(cfg.samples)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(cfg.samples)))


def _summary(values: Sequence[float]) -> dict[str, float | None]:
    if not values:
        return {"min": None, "mean": None, "max": None}
    arr = np.asarray(values, dtype=float)
    return {
        "min": float(arr.min()),
        "mean": float(arr.mean()),
        "max": float(arr.max()),
    }


def _aggregate(records: list[dict[str, Any]], **stats: Any) -> dict[str, Any]:
    errors = sum(1 for r in records if "error" in r)
    agg: dict[str, Any] = {"aggregate": True, "errors": errors}
    agg.update(stats)
    agg["note"] = ILLUSTRATIVE_NOTE
    return agg


# ---------------------------------------------------------------------------
# experiments


def exp_orbit_decay(cfg: ExperimentConfig) -> Section:
    """Orbit of e_0: norms along 200 iterates of a random contraction.

    Per sample the orbit norms must be non-increasing (a contraction cannot
    grow them); the headline statistic is the fraction of samples whose
    orbit has dropped below 0.01 by step 200.
    """

    def one(i: int, rng: np.random.Generator) -> dict[str, Any]:
        M = sample_contraction(cfg.dim, cfg.space, rng)
        v = np.zeros(cfg.dim, dtype=complex)
        v[0] = 1.0
        norms = np.empty(ORBIT_STEPS + 1)
        norms[0] = _vec_norm(v, cfg.space)
        for n in range(ORBIT_STEPS):
            v = M @ v
            norms[n + 1] = _vec_norm(v, cfg.space)
        monotone = bool(
            np.all(norms[1:] <= norms[:-1] * (1.0 + 1e-9) + 1e-15)
        )
        return {
            "final_norm": float(norms[-1]),
            "half_norm": float(norms[ORBIT_STEPS // 2]),
            "monotone": monotone,
            "ok": monotone,
        }

    records = _map_samples(cfg, one)
    finals = [r["final_norm"] for r in records if "final_norm" in r]
    frac = (
        float(np.mean([f < DECAY_THRESHOLD for f in finals])) if finals else None
    )
    records.append(
        _aggregate(
            records,
            fraction_decayed=frac,
            final_norm=_summary(finals),
        )
    )
    return make_section(cfg.experiment.value, records)


def exp_eigen_stats(cfg: ExperimentConfig) -> Section:
    """Eigenvalue moduli of random contractions on the window.

    The spectral radius of each sample must stay at most 1 (up to 1e-8);
    the distribution of moduli is reported as a ten-bin histogram.
    """
    bins = np.linspace(0.0, 1.0, 11)
    hist_total = np.zeros(10, dtype=int)

    def one(i: int, rng: np.random.Generator) -> dict[str, Any]:
        M = sample_contraction(cfg.dim, cfg.space, rng)
        moduli = np.abs(np.linalg.eigvals(M))
        rad = float(moduli.max()) if moduli.size else 0.0
        counts, _ = np.histogram(np.clip(moduli, 0.0, 1.0), bins=bins)
        return {
            "spectral_radius": rad,
            "hist": counts,
            "ok": rad <= 1.0 + 1e-8,
        }

    records = _map_samples(cfg, one)
    radii = [r["spectral_radius"] for r in records if "spectral_radius" in r]
    for r in records:
        if "hist" in r:
            hist_total += np.asarray(r["hist"], dtype=int)
            r["hist"] = [int(c) for c in r["hist"]]
    records.append(
        _aggregate(
            records,
            spectral_radius=_summary(radii),
            fraction_radius_below_0p99=(
                float(np.mean([r < 0.99 for r in radii])) if radii else None
            ),
            modulus_histogram=[int(c) for c in hist_total],
            histogram_bins=[float(b) for b in bins],
        )
    )
    return make_section(cfg.experiment.value, records)


def isometry_defect(M: np.ndarray) -> float:
    """min over columns j of |M[0, j]| * |M[1, j]|.

    Zero exactly when some column avoids one of the first two coordinate
    functionals; a forward shift has defect zero, a dense Gaussian sample
    has positive defect almost surely.
    """
    if M.shape[0] < 2 or M.shape[1] < 1:
        raise ValueError("isometry_defect needs at least 2 rows and 1 column")
    return float(np.min(np.abs(M[0, :]) * np.abs(M[1, :])))


def exp_isometry_defect(cfg: ExperimentConfig) -> Section:
    """Distribution of the two-row column defect over random contractions.

    Only meaningful on spaces whose isometries are not plentiful, so the
    Hilbert exponent p = 2 and the extreme-point-rich p = 1 are rejected.
    """
    if not cfg.space.is_c0 and cfg.space.p in (1.0, 2.0):
        raise ValueError(
            "isometry defect is not informative for p in {1, 2}; "
            "use another exponent or c0"
        )
    if cfg.dim < 2:
        raise ValueError("isometry defect needs dim >= 2")

    def one(i: int, rng: np.random.Generator) -> dict[str, Any]:
        M = sample_contraction(cfg.dim, cfg.space, rng)
        d = isometry_defect(M)
        return {"defect": d, "positive": d > 0.0}

    records = _map_samples(cfg, one)
    defects = [r["defect"] for r in records if "defect" in r]
    records.append(
        _aggregate(
            records,
            defect=_summary(defects),
            fraction_positive=(
                float(np.mean([d > 0.0 for d in defects])) if defects else None
            ),
        )
    )
    return make_section(cfg.experiment.value, records)


# ---------------------------------------------------------------------------
# approximate point spectrum probe


def ap_grid_points(n_radial: int = 20, n_angular: int = 20) -> list[complex]:
    """n_radial x n_angular polar grid on the closed unit disk."""
    radii = np.linspace(0.0, 1.0, n_radial)
    angles = np.linspace(0.0, 2.0 * np.pi, n_angular, endpoint=False)
    return [
        complex(r * np.exp(1j * t)) for r in radii for t in angles
    ]


def ap_grid_matrix(A: np.ndarray, D: int) -> np.ndarray:
    """Dense window of (A on the head) + (backward shift on the tail).

    The head block occupies coordinates 0..dim-1; on coordinates >= dim the
    operator maps e_{j} to e_{j-1} for j >= dim+1 and kills e_{dim}, so the
    two blocks never interact.
    """
    dim = A.shape[0]
    if A.shape != (dim, dim):
        raise ValueError("A must be square")
    if D < dim + 2:
        raise ValueError(f"window D={D} too small for head dim={dim}")
    M = np.zeros((D, D), dtype=complex)
    M[:dim, :dim] = A
    for j in range(dim + 1, D):
        M[j - 1, j] = 1.0
    return M


def ap_gain_profile(
    A: np.ndarray,
    D: int = 80,
    n_radial: int = 20,
    n_angular: int = 20,
) -> dict[str, Any]:
    """Euclidean window gains sigma_min(M - lambda) over the disk grid.

    Gains measure how far each grid point is from being an approximate
    eigenvalue of the windowed operator.  Interior points (|lambda| <= 0.9)
    see geometric approximate eigenvectors of the shift tail and give tiny
    gains; on the unit circle the D-window cannot do better than roughly
    pi/(2D), so boundary gains are reported separately.
    """
    M = ap_grid_matrix(A, D)
    lams = ap_grid_points(n_radial, n_angular)
    eye = np.eye(D, dtype=complex)
    gains = np.empty(len(lams))
    for idx, lam in enumerate(lams):
        gains[idx] = np.linalg.svd(M - lam * eye, compute_uv=False)[-1]
    moduli = np.abs(np.asarray(lams))
    interior = moduli <= 0.9 + 1e-12
    boundary = moduli >= 1.0 - 1e-12
    kmax = int(np.argmax(gains))
    return {
        "max_gain": float(gains.max()),
        "argmax_lambda": complex(lams[kmax]),
        "min_gain": float(gains.min()),
        "interior_max_gain": float(gains[interior].max()),
        "boundary_max_gain": (
            float(gains[boundary].max()) if boundary.any() else None
        ),
        "window": D,
    }


def exp_apspectrum_grid(cfg: ExperimentConfig) -> Section:
    """Grid gains for random-head + shift-tail windows.

    Every grid point in the open disk should be close to the approximate
    point spectrum regardless of the random head, because the shift tail
    supplies geometric near-eigenvectors on its own.
    """
    D = max(80, cfg.dim + 40)

    def one(i: int, rng: np.random.Generator) -> dict[str, Any]:
        A = sample_contraction(cfg.dim, cfg.space, rng)
        prof = ap_gain_profile(A, D=D)
        prof["argmax_lambda"] = [
            prof["argmax_lambda"].real,
            prof["argmax_lambda"].imag,
        ]
        return dict(prof)

    records = _map_samples(cfg, one)
    interior = [
        r["interior_max_gain"] for r in records if "interior_max_gain" in r
    ]
    overall = [r["max_gain"] for r in records if "max_gain" in r]
    records.append(
        _aggregate(
            records,
            interior_max_gain=_summary(interior),
            max_gain=_summary(overall),
            window=D,
        )
    )
    return make_section(cfg.experiment.value, records)


def exp_disjoint_support(cfg: ExperimentConfig) -> Section:
    """How often a random contraction has two columns with disjoint support.

    Dense Gaussian samples essentially never do; the statistic calibrates
    how special disjointly-supported constructions are among random ones.
    """

    def one(i: int, rng: np.random.Generator) -> dict[str, Any]:
        M = sample_contraction(cfg.dim, cfg.space, rng)
        B = (np.abs(M) > SUPPORT_TOL).astype(int)
        overlap = B.T @ B
        off = ~np.eye(cfg.dim, dtype=bool)
        n_disjoint = int(np.count_nonzero((overlap == 0) & off)) // 2
        return {
            "n_disjoint_pairs": n_disjoint,
            "has_disjoint_pair": n_disjoint > 0,
        }

    records = _map_samples(cfg, one)
    flags = [
        r["has_disjoint_pair"] for r in records if "has_disjoint_pair" in r
    ]
    records.append(
        _aggregate(
            records,
            fraction_with_disjoint_pair=(
                float(np.mean(flags)) if flags else None
            ),
        )
    )
    return make_section(cfg.experiment.value, records)


# ---------------------------------------------------------------------------
# suite driver


_RUNNERS: dict[ExperimentKind, Callable[[ExperimentConfig], Section]] = {
    ExperimentKind.ORBIT_DECAY: exp_orbit_decay,
    ExperimentKind.EIGEN_STATS: exp_eigen_stats,
    ExperimentKind.ISOMETRY_DEFECT: exp_isometry_defect,
    ExperimentKind.AP_SPECTRUM_GRID: exp_apspectrum_grid,
    ExperimentKind.DISJOINT_SUPPORT: exp_disjoint_support,
}


def run_experiment(cfg: ExperimentConfig) -> Section:
    """Dispatch one configuration to its experiment."""
    return _RUNNERS[cfg.experiment](cfg)


def run_suite(
    configs: ExperimentConfig | Sequence[ExperimentConfig],
) -> Report:
    """Run each configuration and assemble a deterministic report.

    A configuration that raises (for example the p = 2 guard of the
    isometry-defect experiment) becomes a failed section; the remaining
    configurations still run.  An empty configuration list yields a report
    with no sections.
    """
    if isinstance(configs, ExperimentConfig):
        configs = [configs]
    configs = list(configs)
    sections: list[Section] = []
    seen: dict[str, int] = {}
    for cfg in configs:
        base = cfg.experiment.value
        seen[base] = seen.get(base, 0) + 1
        name = base if seen[base] == 1 else f"{base}#{seen[base]}"
        try:
            sec = run_experiment(cfg)
        except Exception as exc:
            sections.append(
                make_section(
                    name,
                    [
                        {
                            "error": f"{type(exc).__name__}: {exc}",
                            "config": cfg.to_dict(),
                            "ok": False,
                        }
                    ],
                )
            )
            continue
        if sec.name != name:
            sec = Section(name=name, status=sec.status, records=sec.records)
        sections.append(sec)
    seeds = {cfg.seed for cfg in configs}
    seed = seeds.pop() if len(seeds) == 1 else None
    return make_report(
        seed=seed,
        config=[cfg.to_dict() for cfg in configs],
        sections=sections,
    )
