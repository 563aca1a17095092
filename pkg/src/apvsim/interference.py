"""Interference of a weak parity-violating amplitude with a large reference.

The parity-violating amplitude is far too small to detect as a rate on its
own; it is measured through the cross term with a parity-conserving
amplitude, either as a reversal-odd rate asymmetry or, coherently, as a
light shift read out as a Ramsey phase.  These helpers convert physical
amplitudes into the per-isotope frequencies the estimation model consumes.

All functions are pure; shifts are returned as angular frequencies (energy
over hbar) so no dimensional constants appear.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "AmplitudePair",
    "interference_rate",
    "amplitude_ratio",
    "pv_light_shift",
    "ramsey_phase",
]


@dataclass(frozen=True)
class AmplitudePair:
    """Parity-conserving and parity-violating amplitudes in common units.

    Both are complex; relative phases matter because the observable cross
    term is a real part.  Interpreted as Rabi frequencies (rad/s) when fed
    to :func:`pv_light_shift`.
    """

    a_pc: complex
    a_pnc: complex

    @property
    def magnitude_ratio(self) -> float:
        """Diagnostic |a_pnc| / |a_pc| (not enforced to be small)."""
        return abs(self.a_pnc) / abs(self.a_pc)


def interference_rate(pair: AmplitudePair) -> dict[str, float]:
    """Transition rate |a_pc + a_pnc|^2 and its reversal-odd part.

    The reversal-odd part 2 Re(a_pc* a_pnc) changes sign under field or
    polarization reversals and is the experimental signal channel.  The
    returned rate is exact (the |a_pnc|^2 term is retained).
    """
    a = complex(pair.a_pc)
    b = complex(pair.a_pnc)
    rate = abs(a + b) ** 2
    reversal_odd = 2.0 * (a.conjugate() * b).real
    return {"rate": rate, "reversal_odd": reversal_odd}


def amplitude_ratio(zeta_over_beta: float, e_field: float) -> float:
    """Weak-to-Stark amplitude ratio zeta / (beta E).

    ``zeta_over_beta`` is the field-equivalent of the weak-induced amplitude
    (V/m); ``e_field`` the applied static field (V/m).
    """
    if e_field == 0:
        raise ValueError("amplitude ratio undefined at zero applied field")
    return zeta_over_beta / e_field


def pv_light_shift(pair: AmplitudePair, detuning: float) -> dict[str, float]:
    """Off-resonant light shift of a dressed state and its parity-odd part.

    total = |O_pc + O_pnc|^2 / (4 Delta),  pv = 2 Re(O_pc* O_pnc) / (4 Delta),
    with Rabi amplitudes and detuning in rad/s; outputs in rad/s.
    """
    if detuning == 0:
        raise ValueError("light shift undefined at zero detuning")
    terms = interference_rate(pair)
    return {
        "total_shift": terms["rate"] / (4.0 * detuning),
        "pv_shift": terms["reversal_odd"] / (4.0 * detuning),
    }


def ramsey_phase(pv_shift: float, tau: float) -> float:
    """Phase accumulated by the shifted superposition over time tau (rad)."""
    if tau < 0:
        raise ValueError(f"interrogation time must be >= 0, got {tau}")
    return pv_shift * tau
