"""Analytic sensitivity models for the measurement protocols.

Five strategies are compared on the same chain, deviation pattern, and
hardware parameters:

* ``sql``              -- independent probes per isotope, classical fit
* ``squeezed``         -- spin-squeezed subarrays, classical fit
* ``same_isotope_cat`` -- one GHZ cat per isotope, classical fit
* ``cross_cat_ideal``  -- single global cat matched to the useful sign
                          pattern; the Heisenberg-scaling benchmark
* ``cross_cat_noisy``  -- same state paying the contrast of one global cat
                          over all atoms

plus ``dfs_cat``, a reversal-pair encoding of the global cat in which common
phase noise cancels, with its own contrast model.

Per-isotope protocols produce frequency uncertainties delta omega_A that are
combined into delta theta by a two-parameter weighted fit in which the
common scale Omega is a marginalized nuisance.  Cat protocols measure the
slope directly.  All functions are pure; delta theta scales exactly as
(R * T_avg)^(-1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import DeviationPattern, IsotopeChain, ProjectedPattern, _pattern_values, project_deviation

__all__ = [
    "ProtocolConfig",
    "NoiseCounts",
    "SensitivityResult",
    "PROTOCOLS",
    "GATE_COUNT_MODELS",
    "UnidentifiableThetaError",
    "ZeroSignalError",
    "gate_counts",
    "squeezing_factor",
    "cat_contrast",
    "dfs_contrast",
    "sql_per_isotope",
    "squeezed_per_isotope",
    "same_isotope_cat_per_isotope",
    "combine_classical_fit",
    "cross_cat_sensitivity",
    "dfs_cat_sensitivity",
    "protocol_table",
]

PROTOCOLS = (
    "sql",
    "squeezed",
    "same_isotope_cat",
    "cross_cat_ideal",
    "cross_cat_noisy",
    "dfs_cat",
)

GATE_COUNT_MODELS = ("linear", "log_depth")

DFS_BUDGET_MODES = ("per_channel", "split")


class UnidentifiableThetaError(ValueError):
    """The deviation direction is degenerate with the common scale."""


class ZeroSignalError(ValueError):
    """The weighted orthogonal component of the deviation pattern vanishes."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Experimental knobs shared by all protocols.

    omega        common signal scale Omega (Hz) in omega_A = Omega(q_A + theta h_A)
    tau          Ramsey interrogation time (s)
    c0           state-preparation base contrast
    f1, f2       one- and two-qubit gate fidelities
    p_surv       per-atom survival probability over one cycle
    t2           single-particle coherence time (s); may be math.inf
    t2_local     local dephasing time inside a reversal pair (s)
    t2_diff      residual differential coherence time after common-mode
                 cancellation (s); enters once, independent of atom number
    squeezing_db metrological squeezing gain (dB)
    rep_rate     repetitions per second R; None means 1/tau (zero dead time)
    t_avg        total averaging time (s)
    c_sql        readout contrast of unentangled measurements
    """

    omega: float = 1.0
    tau: float = 1.0
    c0: float = 1.0
    f1: float = 0.9999
    f2: float = 0.999
    p_surv: float = 1.0
    t2: float = math.inf
    t2_local: float = math.inf
    t2_diff: float = math.inf
    squeezing_db: float = 4.0
    rep_rate: float | None = None
    t_avg: float = 3600.0
    c_sql: float = 1.0
    gate_count_model: str = "linear"
    dfs_budget: str = "per_channel"

    @property
    def reps(self) -> float:
        """Total repetition count R * T_avg."""
        r = self.rep_rate if self.rep_rate is not None else 1.0 / self.tau
        return r * self.t_avg


@dataclass(frozen=True)
class NoiseCounts:
    """Gate counts of the cat-preparation circuit for a given atom number."""

    n1: float
    n2: float

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError(f"gate counts must be >= 0, got n1={self.n1}, n2={self.n2}")


@dataclass(frozen=True)
class SensitivityResult:
    """One protocol's uncertainty on theta with its intermediates.

    ``per_isotope`` holds delta omega_A (Hz) in chain order where the
    protocol goes through a classical fit (math.inf marks isotopes without
    atoms); ``eigsep`` is the generator eigenvalue separation for cat
    protocols.  A failed row carries an ``error`` slug and NaN delta_theta.
    """

    protocol: str
    delta_theta: float
    per_isotope: tuple[float, ...] | None = None
    contrast_used: float | None = None
    eigsep: float | None = None
    error: str | None = None


def gate_counts(n_atoms: float, model: str = "linear") -> NoiseCounts:
    """Gate counts needed to prepare an n-atom cat.

    "linear" is a linear entangling chain (n1 = N, n2 = N-1); "log_depth"
    trades depth for extra single-qubit gates (n1 = 2N, n2 = N-1).
    """
    if model not in GATE_COUNT_MODELS:
        raise ValueError(f"unknown gate count model {model!r}; choose from {GATE_COUNT_MODELS}")
    if n_atoms < 1:
        raise ValueError(f"need at least one atom, got {n_atoms}")
    if model == "linear":
        return NoiseCounts(n1=n_atoms, n2=n_atoms - 1)
    return NoiseCounts(n1=2 * n_atoms, n2=n_atoms - 1)


def squeezing_factor(gain_db: float) -> float:
    """Projection-noise reduction xi = 10^(-G_dB / 20)."""
    return 10.0 ** (-gain_db / 20.0)


def _check_contrast_inputs(cfg: ProtocolConfig, n_atoms: float, tau: float):
    if n_atoms < 1:
        raise ValueError(f"contrast model needs n_atoms >= 1, got {n_atoms}")
    if tau < 0:
        raise ValueError(f"tau must be >= 0, got {tau}")


def cat_contrast(
    cfg: ProtocolConfig,
    n_atoms: float,
    tau: float | None = None,
    counts: NoiseCounts | None = None,
) -> float:
    """Fringe contrast of an n-atom cat.

    C_N = C0 * F1^n1 * F2^n2 * p_surv^N * exp(-N tau / T2).
    The exponential collapse with N is what ultimately penalizes large
    single cats.
    """
    tau = cfg.tau if tau is None else tau
    _check_contrast_inputs(cfg, n_atoms, tau)
    if cfg.t2 <= 0:
        raise ValueError(f"t2 must be positive, got {cfg.t2}")
    if counts is None:
        counts = gate_counts(n_atoms, cfg.gate_count_model)
    decay = math.exp(-n_atoms * tau / cfg.t2) if math.isfinite(cfg.t2) else 1.0
    return cfg.c0 * cfg.f1**counts.n1 * cfg.f2**counts.n2 * cfg.p_surv**n_atoms * decay


def dfs_contrast(
    cfg: ProtocolConfig,
    n_atoms: float,
    tau: float | None = None,
    counts: NoiseCounts | None = None,
) -> float:
    """Contrast of a reversal-pair cat.

    C = C0 * F1^n1 * F2^n2 * p_surv^N * exp(-N tau / T2_local) * exp(-tau / T2_diff).
    Common-mode noise cancels between the paired channels, so only the
    local dephasing scales with N; the residual differential term enters
    once regardless of atom number.
    """
    tau = cfg.tau if tau is None else tau
    _check_contrast_inputs(cfg, n_atoms, tau)
    if cfg.t2_local <= 0 or cfg.t2_diff <= 0:
        raise ValueError("t2_local and t2_diff must be positive")
    if counts is None:
        counts = gate_counts(n_atoms, cfg.gate_count_model)
    local = math.exp(-n_atoms * tau / cfg.t2_local) if math.isfinite(cfg.t2_local) else 1.0
    diff = math.exp(-tau / cfg.t2_diff) if math.isfinite(cfg.t2_diff) else 1.0
    return cfg.c0 * cfg.f1**counts.n1 * cfg.f2**counts.n2 * cfg.p_surv**n_atoms * local * diff


def _check_reps(cfg: ProtocolConfig) -> float:
    reps = cfg.reps
    if reps < 1:
        raise ValueError(f"need rep_rate * t_avg >= 1 for a meaningful estimate, got {reps}")
    return reps


def sql_per_isotope(cfg: ProtocolConfig, n_atoms: float) -> float:
    """Standard-quantum-limit frequency uncertainty of one isotope (Hz).

    delta omega = 1 / (2 pi C tau sqrt(N_A R T_avg)).
    """
    if n_atoms < 1:
        raise ValueError(f"need at least one atom, got {n_atoms}")
    reps = _check_reps(cfg)
    return 1.0 / (2.0 * math.pi * cfg.c_sql * cfg.tau * math.sqrt(n_atoms * reps))


def squeezed_per_isotope(cfg: ProtocolConfig, n_atoms: float) -> float:
    """Squeezed-array frequency uncertainty: xi times the SQL value."""
    return squeezing_factor(cfg.squeezing_db) * sql_per_isotope(cfg, n_atoms)


def same_isotope_cat_per_isotope(
    cfg: ProtocolConfig, n_atoms: float, counts: NoiseCounts | None = None
) -> float:
    """Frequency uncertainty of one isotope measured with its own cat (Hz).

    delta omega = 1 / (2 pi C_N tau N_A sqrt(R T_avg)); the subarray pays
    only its own contrast C_{N_A}.
    """
    if n_atoms < 1:
        raise ValueError(f"need at least one atom, got {n_atoms}")
    reps = _check_reps(cfg)
    contrast = cat_contrast(cfg, n_atoms, counts=counts)
    return 1.0 / (2.0 * math.pi * contrast * cfg.tau * n_atoms * math.sqrt(reps))


def combine_classical_fit(
    chain: IsotopeChain,
    h: DeviationPattern | tuple[float, ...] | list[float],
    per_isotope: tuple[float, ...] | list[float],
    cfg: ProtocolConfig,
) -> float:
    """Extract delta theta from per-isotope frequency uncertainties.

    Weighted least squares of omega_A = Omega(q_A + theta h_A) around
    theta = 0 with weights 1/delta omega_A^2: the 2x2 information matrix over
    (Omega, theta) is inverted and the sqrt of the (theta, theta) element of
    the inverse returned, i.e. Omega is marginalized, not assumed known.

    Entries of ``per_isotope`` that are None, infinite, or NaN are treated
    as unmeasured.  Raises :class:`UnidentifiableThetaError` when h is
    parallel to q under the given weights.
    """
    hv = _pattern_values(h)
    if len(hv) != len(chain.isotopes) or len(per_isotope) != len(chain.isotopes):
        raise ValueError("h and per_isotope must match the chain length")
    rows = []
    for qa, ha, dw in zip(chain.q, hv, per_isotope):
        if dw is None or not math.isfinite(dw):
            continue
        if dw <= 0:
            raise ValueError(f"frequency uncertainties must be positive, got {dw}")
        rows.append((qa, cfg.omega * ha, 1.0 / dw**2))
    if len(rows) < 2:
        raise ValueError(f"need >= 2 isotopes with finite uncertainties, got {len(rows)}")
    f_qq = math.fsum(w * x * x for x, _, w in rows)
    f_qt = math.fsum(w * x * y for x, y, w in rows)
    f_tt = math.fsum(w * y * y for _, y, w in rows)
    det = f_qq * f_tt - f_qt * f_qt
    if det <= 1e-12 * f_qq * f_tt:
        raise UnidentifiableThetaError(
            "deviation pattern is parallel to the weak-charge pattern under these weights"
        )
    return math.sqrt(f_qq / det)


def _input_scale(chain: IsotopeChain, proj: ProjectedPattern) -> float:
    # reconstructed sum_A N_A |h_A|, used to decide whether h_perp is just
    # rounding dust left over from an h parallel to q
    return math.fsum(
        iso.n_atoms * abs(hp + proj.beta * qa)
        for iso, hp, qa in zip(chain.isotopes, proj.h_perp, chain.q)
    )


def eigenvalue_separation(cfg: ProtocolConfig, weighted_l1: float) -> float:
    """Generator eigenvalue separation 2 pi tau Omega sum_A N_A |h_perp_A|."""
    return 2.0 * math.pi * cfg.tau * cfg.omega * weighted_l1


def cross_cat_sensitivity(
    chain: IsotopeChain,
    proj: ProjectedPattern,
    cfg: ProtocolConfig,
    noisy: bool = False,
    counts: NoiseCounts | None = None,
) -> SensitivityResult:
    """Sensitivity of the single global cat matched to the sign pattern.

    Ideal: delta theta = 1 / (2 pi tau Omega sum_A N_A |h_perp_A| sqrt(R T_avg)),
    linear in the total atom number.  The noisy variant divides by the
    contrast of one cat spanning all atoms.
    """
    reps = _check_reps(cfg)
    if proj.weighted_l1 <= 1e-12 * _input_scale(chain, proj):
        raise ZeroSignalError("deviation pattern has no weighted component orthogonal to q")
    sep = eigenvalue_separation(cfg, proj.weighted_l1)
    contrast = 1.0
    name = "cross_cat_ideal"
    if noisy:
        contrast = cat_contrast(cfg, chain.total_atoms, counts=counts)
        name = "cross_cat_noisy"
    return SensitivityResult(
        protocol=name,
        delta_theta=1.0 / (sep * contrast * math.sqrt(reps)),
        contrast_used=contrast,
        eigsep=sep,
    )


def dfs_cat_sensitivity(
    chain: IsotopeChain,
    proj: ProjectedPattern,
    cfg: ProtocolConfig,
    noisy: bool = True,
) -> SensitivityResult:
    """Sensitivity of the reversal-pair global cat.

    Each isotope occupies two channels with opposite signal sign, so every
    atom contributes |h_perp_A| to the eigenvalue separation and the
    differential phase doubles relative to a plain cat on the same
    per-isotope allocation.  ``cfg.dfs_budget`` selects the atom accounting:

    * "per_channel": N_A atoms in each channel (2 N_A per isotope in total)
    * "split": the allocation N_A is divided between the channels

    Contrast uses the reversal-pair model over the total atom count.
    """
    reps = _check_reps(cfg)
    if proj.weighted_l1 <= 1e-12 * _input_scale(chain, proj):
        raise ZeroSignalError("deviation pattern has no weighted component orthogonal to q")
    if cfg.dfs_budget not in DFS_BUDGET_MODES:
        raise ValueError(f"unknown dfs budget mode {cfg.dfs_budget!r}; choose from {DFS_BUDGET_MODES}")
    factor = 2.0 if cfg.dfs_budget == "per_channel" else 1.0
    total = factor * chain.total_atoms
    sep = 2.0 * math.pi * cfg.tau * cfg.omega * factor * proj.weighted_l1
    contrast = dfs_contrast(cfg, total) if noisy else 1.0
    return SensitivityResult(
        protocol="dfs_cat",
        delta_theta=1.0 / (sep * contrast * math.sqrt(reps)),
        contrast_used=contrast,
        eigsep=sep,
    )


def _per_isotope_row(chain, h, cfg, name, dw_of_n, contrast_used):
    dws = tuple(
        dw_of_n(iso.n_atoms) if iso.n_atoms >= 1 else math.inf for iso in chain.isotopes
    )
    delta = combine_classical_fit(chain, h, dws, cfg)
    return SensitivityResult(
        protocol=name, delta_theta=delta, per_isotope=dws, contrast_used=contrast_used
    )


_ERROR_SLUGS = {
    UnidentifiableThetaError: "singular_fit",
    ZeroSignalError: "no_signal",
}


def protocol_table(
    chain: IsotopeChain,
    h: DeviationPattern | tuple[float, ...] | list[float],
    cfg: ProtocolConfig,
    protocols: tuple[str, ...] = PROTOCOLS,
) -> list[SensitivityResult]:
    """Evaluate the requested protocols on one (chain, pattern, config).

    A protocol that cannot be evaluated contributes a row with an error
    slug instead of aborting the table.  Output order follows the request.
    """
    unknown = [name for name in protocols if name not in PROTOCOLS]
    if unknown:
        raise ValueError(f"unknown protocols {unknown}; choose from {PROTOCOLS}")
    proj = project_deviation(chain, h)
    xi = squeezing_factor(cfg.squeezing_db)
    rows: list[SensitivityResult] = []
    for name in protocols:
        try:
            if name == "sql":
                rows.append(_per_isotope_row(
                    chain, h, cfg, name, lambda n: sql_per_isotope(cfg, n), cfg.c_sql))
            elif name == "squeezed":
                rows.append(_per_isotope_row(
                    chain, h, cfg, name, lambda n: xi * sql_per_isotope(cfg, n), cfg.c_sql))
            elif name == "same_isotope_cat":
                rows.append(_per_isotope_row(
                    chain, h, cfg, name, lambda n: same_isotope_cat_per_isotope(cfg, n), None))
            elif name == "cross_cat_ideal":
                rows.append(cross_cat_sensitivity(chain, proj, cfg, noisy=False))
            elif name == "cross_cat_noisy":
                rows.append(cross_cat_sensitivity(chain, proj, cfg, noisy=True))
            else:
                rows.append(dfs_cat_sensitivity(chain, proj, cfg, noisy=True))
        except (UnidentifiableThetaError, ZeroSignalError, ValueError) as exc:
            slug = _ERROR_SLUGS.get(type(exc), "invalid_config")
            rows.append(SensitivityResult(protocol=name, delta_theta=math.nan, error=slug))
    return rows
