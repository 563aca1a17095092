"""Exact small-register state-vector oracle.

Brute-force validation of the analytic sensitivity formulas: build the
probe states explicitly over the 2^M computational basis, build the
(diagonal) phase generator, and compute variances, fringes, and Fisher
information by enumeration.

Basis convention: qubit j maps to bit j of the basis index, and bit value 0
means sigma_z eigenvalue +1.  Generators are diagonal, so evolution is a
per-basis-state phase and everything stays exact to floating precision.

States are immutable snapshots; every operation returns a new value.
Summations run in fixed index order, so results are reproducible bit for
bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import IsotopeChain, ProjectedPattern

__all__ = [
    "QUBIT_CAP",
    "STATE_KINDS",
    "StateVector",
    "DiagonalGenerator",
    "NonCatStateError",
    "NonInformativePointError",
    "build_state",
    "build_generator",
    "build_common_generator",
    "qfi",
    "ramsey_evolve",
    "parity_fringe",
    "cfi_parity",
    "common_noise_check",
]

QUBIT_CAP = 14

STATE_KINDS = ("product_x", "ghz_per_isotope", "cross_cat", "dfs_cat")


class NonCatStateError(ValueError):
    """Branch-parity readout needs a state with exactly two branches."""


class NonInformativePointError(ValueError):
    """The fringe probability sits at 0 or 1; the slope carries no information."""


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the computational basis plus per-qubit labels.

    ``labels[j] = (isotope_index, channel)`` with channel +1/-1 for the two
    reversal channels of a paired register and 0 for an unpaired one.
    """

    amplitudes: np.ndarray
    labels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    @property
    def num_qubits(self) -> int:
        return len(self.labels)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


@dataclass(frozen=True)
class DiagonalGenerator:
    """Diagonal phase generator: diag[b] = sum_j g_j z_j(b).

    ``per_qubit_coeff`` holds the g_j; z_j(b) is +1 when bit j of b is 0.
    """

    diag: np.ndarray
    per_qubit_coeff: tuple[float, ...]
    labels: tuple[tuple[int, int], ...]

    def __post_init__(self):
        self.diag.setflags(write=False)


def _register(chain: IsotopeChain, dfs: bool) -> tuple[tuple[int, int], ...]:
    labels: list[tuple[int, int]] = []
    for i, iso in enumerate(chain.isotopes):
        if iso.n_atoms == 0:
            continue
        if dfs:
            labels.extend([(i, +1)] * iso.n_atoms)
            labels.extend([(i, -1)] * iso.n_atoms)
        else:
            labels.extend([(i, 0)] * iso.n_atoms)
    return tuple(labels)


def _check_register(labels, cap):
    m = len(labels)
    if m == 0:
        raise ValueError("register is empty: no isotope carries atoms")
    if m > cap:
        raise ValueError(f"register needs {m} qubits, exceeding the cap of {cap}")
    return m


def _diag_from_coeffs(coeffs: list[float]) -> np.ndarray:
    m = len(coeffs)
    idx = np.arange(1 << m)
    diag = np.zeros(1 << m, dtype=np.float64)
    for j, g in enumerate(coeffs):
        z = 1.0 - 2.0 * ((idx >> j) & 1)
        diag += g * z
    return diag


def build_generator(
    chain: IsotopeChain,
    proj: ProjectedPattern,
    tau: float,
    omega: float,
    dfs: bool = False,
    cap: int = QUBIT_CAP,
) -> DiagonalGenerator:
    """Signal generator: g_j = pi tau Omega h_perp_A(j) per qubit.

    On a paired (dfs=True) register the sign of g_j is flipped on the
    minus channel -- the signal is reversal-odd, which is what lets the cat
    add signal phase while common noise cancels.
    """
    labels = _register(chain, dfs)
    _check_register(labels, cap)
    coeffs = []
    for iso_idx, chan in labels:
        g = math.pi * tau * omega * proj.h_perp[iso_idx]
        if chan == -1:
            g = -g
        coeffs.append(g)
    return DiagonalGenerator(diag=_diag_from_coeffs(coeffs), per_qubit_coeff=tuple(coeffs), labels=labels)


def build_common_generator(
    chain: IsotopeChain,
    tau: float,
    omega: float,
    dfs: bool = False,
    cap: int = QUBIT_CAP,
) -> DiagonalGenerator:
    """Common-noise generator: the same coefficient pi tau Omega on every
    qubit, with no channel sign flip (ordinary Zeeman or scalar shifts do
    not know about the reversal)."""
    labels = _register(chain, dfs)
    _check_register(labels, cap)
    g = math.pi * tau * omega
    coeffs = [g] * len(labels)
    return DiagonalGenerator(diag=_diag_from_coeffs(coeffs), per_qubit_coeff=tuple(coeffs), labels=labels)


def _branch_indices(labels, proj: ProjectedPattern) -> tuple[int, int]:
    """Basis index of the sign-matched branch and of its global flip."""
    b1 = 0
    for j, (iso_idx, chan) in enumerate(labels):
        s = proj.signs[iso_idx] * (chan if chan != 0 else 1)
        if s < 0:
            b1 |= 1 << j
    return b1, b1 ^ ((1 << len(labels)) - 1)


def build_state(
    kind: str,
    chain: IsotopeChain,
    proj: ProjectedPattern | None = None,
    phase: float = 0.0,
    cap: int = QUBIT_CAP,
) -> StateVector:
    """Construct one of the probe states over the chain's register.

    * "product_x":       every qubit in (|0> + |1>)/sqrt(2)
    * "ghz_per_isotope": an independent all-up/all-down cat per isotope
    * "cross_cat":       one global two-branch cat whose branches follow the
                         sign pattern of ``proj`` (and its global flip)
    * "dfs_cat":         the cross cat on a paired register, with the minus
                         channel holding the opposite sign in each branch

    ``phase`` is the relative phase between cat branches.  ``proj`` is
    required for the sign-matched kinds.
    """
    if kind not in STATE_KINDS:
        raise ValueError(f"unknown state kind {kind!r}; choose from {STATE_KINDS}")
    labels = _register(chain, dfs=(kind == "dfs_cat"))
    m = _check_register(labels, cap)
    dim = 1 << m
    amp = np.zeros(dim, dtype=np.complex128)

    if kind == "product_x":
        amp[:] = 2.0 ** (-m / 2.0)
    elif kind == "ghz_per_isotope":
        blocks: dict[int, int] = {}
        for j, (iso_idx, _) in enumerate(labels):
            blocks[iso_idx] = blocks.get(iso_idx, 0) | (1 << j)
        masks = [blocks[i] for i in sorted(blocks)]
        k = len(masks)
        mag = 2.0 ** (-k / 2.0)
        for combo in range(1 << k):
            idx = 0
            for a, mask in enumerate(masks):
                if (combo >> a) & 1:
                    idx |= mask
            amp[idx] = mag * np.exp(1j * phase * bin(combo).count("1"))
    else:
        if proj is None:
            raise ValueError(f"state kind {kind!r} needs a projected pattern for its signs")
        b1, b2 = _branch_indices(labels, proj)
        amp[b1] = 1.0 / math.sqrt(2.0)
        amp[b2] = np.exp(1j * phase) / math.sqrt(2.0)

    return StateVector(amplitudes=amp, labels=labels)


def _check_pair(state: StateVector, gen: DiagonalGenerator):
    if state.labels != gen.labels:
        raise ValueError("state and generator were built over different registers")


def qfi(state: StateVector, gen: DiagonalGenerator) -> float:
    """Quantum Fisher information of a pure state: 4 Var(G)."""
    _check_pair(state, gen)
    p = np.abs(state.amplitudes) ** 2
    mean = float(np.dot(p, gen.diag))
    mean_sq = float(np.dot(p, gen.diag * gen.diag))
    return 4.0 * (mean_sq - mean * mean)


def ramsey_evolve(state: StateVector, gen: DiagonalGenerator, theta: float) -> StateVector:
    """Phase evolution amp[b] -> amp[b] * exp(-i theta diag[b])."""
    _check_pair(state, gen)
    amp = state.amplitudes * np.exp(-1j * theta * gen.diag)
    return StateVector(amplitudes=amp, labels=state.labels)


def _cat_branches(state: StateVector, gen: DiagonalGenerator) -> tuple[int, int]:
    """Indices of the two populated branches, higher generator eigenvalue first."""
    mags = np.abs(state.amplitudes)
    nz = np.flatnonzero(mags > 1e-9 * mags.max())
    if len(nz) != 2:
        raise NonCatStateError(
            f"branch-parity readout needs exactly 2 populated branches, found {len(nz)}"
        )
    i, j = int(nz[0]), int(nz[1])
    if gen.diag[i] >= gen.diag[j]:
        return i, j
    return j, i


def parity_fringe(state: StateVector, gen: DiagonalGenerator, theta: float) -> float:
    """Probability of the branch-symmetric outcome after evolving by theta.

    For a two-branch cat this is the interference fringe
    p(theta) = (1 + C cos(theta * dlam + phi)) / 2, with dlam the eigenvalue
    separation of the branches and phi the cat's internal phase.
    """
    _check_pair(state, gen)
    hi, lo = _cat_branches(state, gen)
    a_hi = state.amplitudes[hi] * np.exp(-1j * theta * gen.diag[hi])
    a_lo = state.amplitudes[lo] * np.exp(-1j * theta * gen.diag[lo])
    return float(abs(a_hi + a_lo) ** 2) / 2.0


def cfi_parity(
    state: StateVector,
    gen: DiagonalGenerator,
    theta: float,
    rel_step: float = 1e-6,
    p_tol: float = 1e-12,
) -> float:
    """Classical Fisher information of the branch-parity readout at theta.

    (dp/dtheta)^2 / (p (1 - p)) with the slope by central finite difference,
    step ``rel_step`` times the fringe period.  At a fringe extremum the
    outcome distribution is deterministic and the point carries no slope
    information; that raises :class:`NonInformativePointError`.
    """
    _check_pair(state, gen)
    hi, lo = _cat_branches(state, gen)
    dlam = float(gen.diag[hi] - gen.diag[lo])
    if dlam <= 0:
        raise ValueError("branches are degenerate; the fringe has no period")
    p = parity_fringe(state, gen, theta)
    if p <= p_tol or p >= 1.0 - p_tol:
        raise NonInformativePointError(f"fringe probability {p} is at an extremum")
    step = rel_step * 2.0 * math.pi / dlam
    slope = (parity_fringe(state, gen, theta + step) - parity_fringe(state, gen, theta - step)) / (
        2.0 * step
    )
    return slope**2 / (p * (1.0 - p))


def common_noise_check(state: StateVector, gen: DiagonalGenerator, phase: float) -> float:
    """|<psi| U(phase) |psi>| for the phase evolution generated by ``gen``.

    Equals 1 for any phase when both branches carry the same eigenvalue,
    which is exactly the decoherence-free condition of the paired register
    under common noise.
    """
    _check_pair(state, gen)
    p = np.abs(state.amplitudes) ** 2
    return float(abs(np.dot(p, np.exp(-1j * phase * gen.diag))))
