"""Analytic quantum-noise spectral densities of the demodulated photocurrent.

Every matrix cell (n, d) carries the effective amplitude
a_nd = c_n e^{-i phi(d)}; the conjugated sum over a coincidence group,
sum_j conj(a_j) = sum_j conj(c_j) e^{+i phi(d_j)}, multiplies the
upper-sideband vacuum and its plain conjugate multiplies the lower
sideband.  Coherent contributions collapse to the closed forms

    unique:  S = E(f0 + F_nd) |c_n|^2 / 4^M
    group:   S = E(f0 + F_rep) |sum_j conj(c_j) e^{i phi(d_j)}|^2 / 4^M

with E the vacuum energy density (h f, or the configured override).  When
a transfer set is attached, the two-sideband form applies instead:

    S = E0/(2 4^M) [ |A* t00(+) + A t10(+)|^2 (1 + F/(f0+F_rep))
                   + |A* t01(-) + A t11(-)|^2 (1 - F/(f0+F_rep)) ]

where (+)/(-) mean evaluation at f0 +- F + F_rep.  The narrowband flag
replaces all vacuum energies by their value at f0 (and then the weight
factors by 1), which is what makes the textbook closed forms exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    SchemeValidationError,
    SqueezerNotCentered,
    UnmatchedSqueezer,
    ZeroAmplitude,
)
from .fmatrix import (
    Cell,
    CoincidenceGroup,
    FrequencyMatrix,
    build_frequency_matrix,
    demod_phase,
    group_entries,
)
from .model import DetectionConfig, Scheme, SqueezerSpec, validate_scheme
from .squeeze import pure_squeeze_transfers

DEFAULT_GRID_POINTS = 101


@dataclass
class Contribution:
    """One ledger entry of the spectrum breakdown."""

    label: str
    kind: str  # "unique" or "group"
    members: tuple[Cell, ...]
    freq_hz: float
    squeezed: bool
    values: np.ndarray


@dataclass
class SpectrumResult:
    """Single-sided PSD samples over current frequencies in [0, B]."""

    freqs_hz: np.ndarray
    values: np.ndarray
    unit: str  # "W^2/Hz" or "dimensionless"
    breakdown: list[Contribution] | None = None

    def __post_init__(self):
        self.freqs_hz = np.asarray(self.freqs_hz, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.freqs_hz.shape != self.values.shape:
            raise ValueError("frequency grid and values disagree in shape")
        if self.freqs_hz.size and self.freqs_hz[0] < 0:
            raise ValueError("current frequencies must be >= 0")
        if np.any(np.diff(self.freqs_hz) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("negative spectral density")

    def band_average(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class EvalContext:
    """Everything the per-entry evaluators need, prepared once per scheme."""

    scheme: Scheme
    demods: tuple
    config: DetectionConfig
    matrix: FrequencyMatrix
    groups: tuple[CoincidenceGroup, ...]
    uniques: tuple[Cell, ...]
    transfers: dict  # ("group", index) or ("unique", cell) -> TransferSet


def build_context(components, demods, squeezers, config: DetectionConfig) -> EvalContext:
    """Validate, build the matrix, group entries, and attach squeezers."""
    scheme = validate_scheme(components, config)
    demods = tuple(demods)
    matrix = build_frequency_matrix(scheme, demods)
    groups, uniques = group_entries(matrix, config)
    transfers: dict = {}
    for spec in squeezers or ():
        key = None
        for gi, group in enumerate(groups):
            if abs(group.freq_hz - spec.ref_offset_hz) <= config.coincidence_tol_hz:
                key = ("group", gi)
                break
        if key is None:
            for cell in uniques:
                if (
                    abs(matrix.entries[cell] - spec.ref_offset_hz)
                    <= config.coincidence_tol_hz
                ):
                    key = ("unique", cell)
                    break
        if key is None:
            raise UnmatchedSqueezer(
                f"squeezer reference {spec.ref_offset_hz:g} Hz coincides with "
                f"no frequency-matrix entry"
            )
        if key in transfers:
            raise SchemeValidationError(
                f"two squeezers attached to the same matrix entry at "
                f"{spec.ref_offset_hz:g} Hz"
            )
        transfers[key] = pure_squeeze_transfers(
            spec, halfwidth_hz=config.bandwidth_hz
        )
    return EvalContext(
        scheme, demods, config, matrix, tuple(groups), tuple(uniques), transfers
    )


def _conj_amplitude_sum(members, ctx: EvalContext) -> complex:
    """sum_j conj(c_{n_j}) e^{+i phi(d_j)} over the member cells."""
    return sum(
        ctx.scheme.components[n].amplitude.conjugate()
        * cmath.exp(1j * demod_phase(d, ctx.demods))
        for n, d in members
    )


def _density(members, rep_freq_hz, transfers, freqs, ctx: EvalContext) -> np.ndarray:
    """Spectral density of one entry/group over the current-frequency grid."""
    config = ctx.config
    freqs = np.asarray(freqs, dtype=float)
    scale = 4.0 ** -len(ctx.demods)
    f_center = config.f0_hz + rep_freq_hz
    if transfers is None:
        # coherent closed form: the F dependence cancels exactly
        if len(members) == 1:
            mod2 = ctx.scheme.components[members[0][0]].power_w
        else:
            mod2 = abs(_conj_amplitude_sum(members, ctx)) ** 2
        e0 = config.noise_energy(config.f0_hz if config.narrowband else f_center)
        return np.full(freqs.shape, scale * e0 * mod2)
    a_conj = _conj_amplitude_sum(members, ctx)
    a_plain = a_conj.conjugate()
    upper = a_conj * transfers.t00(f_center + freqs) + a_plain * transfers.t10(
        f_center + freqs
    )
    lower = a_conj * transfers.t01(f_center - freqs) + a_plain * transfers.t11(
        f_center - freqs
    )
    if config.narrowband:
        e0 = config.noise_energy(config.f0_hz)
        w_up = w_dn = 1.0
    else:
        e0 = config.noise_energy(f_center)
        w_up = 1.0 + freqs / f_center
        w_dn = 1.0 - freqs / f_center
    return (scale * e0 / 2.0) * (
        np.abs(upper) ** 2 * w_up + np.abs(lower) ** 2 * w_dn
    )


def unique_contribution(n: int, d: int, freqs, ctx: EvalContext) -> np.ndarray:
    """PSD contribution of the unique matrix entry (n, d)."""
    return _density(
        ((n, d),),
        float(ctx.matrix.entries[n, d]),
        ctx.transfers.get(("unique", (n, d))),
        freqs,
        ctx,
    )


def group_contribution(group: CoincidenceGroup, freqs, ctx: EvalContext) -> np.ndarray:
    """PSD contribution of a coincidence group (coherent or squeezed)."""
    transfers = None
    for key, candidate in ctx.transfers.items():
        if key[0] == "group" and ctx.groups[key[1]].members == group.members:
            transfers = candidate
            break
    if transfers is not None and (
        abs(transfers.ref_offset_hz - group.freq_hz) > ctx.config.coincidence_tol_hz
    ):
        raise SqueezerNotCentered(
            f"squeezer referenced at {transfers.ref_offset_hz:g} Hz is attached "
            f"to a group at {group.freq_hz:g} Hz"
        )
    return _density(group.members, group.freq_hz, transfers, freqs, ctx)


def total_spectrum(
    components,
    demods,
    squeezers,
    config: DetectionConfig,
    grid=None,
    grid_points: int = DEFAULT_GRID_POINTS,
    with_breakdown: bool = False,
) -> SpectrumResult:
    """Sum all unique and group contributions over the current-frequency grid.

    ``grid`` defaults to ``grid_points`` uniform samples of [0, B].  With
    ``with_breakdown`` the result carries one ledger entry per contribution;
    their sum reproduces the total at every grid point.
    """
    ctx = build_context(components, demods, squeezers, config)
    if grid is None:
        freqs = np.linspace(0.0, config.bandwidth_hz, grid_points)
    else:
        freqs = np.asarray(grid, dtype=float)
        if freqs.ndim != 1 or freqs.size == 0:
            raise SchemeValidationError("grid must be a nonempty 1-d array")
        if freqs[0] < 0 or freqs[-1] > config.bandwidth_hz:
            raise SchemeValidationError("grid must lie within [0, B]")
    # rectifying demodulation differs from the harmonic chain by (pi/4)^2
    # per stage on low-frequency spectra
    rect = (4.0 / math.pi) ** (2 * len(ctx.demods)) if config.rectifier_equivalent else 1.0
    scale = config.output_scale * rect
    entries: list[Contribution] = []
    for n, d in ctx.uniques:
        entries.append(
            Contribution(
                label=f"unique_n{n}_d{d}",
                kind="unique",
                members=((n, d),),
                freq_hz=float(ctx.matrix.entries[n, d]),
                squeezed=("unique", (n, d)) in ctx.transfers,
                values=scale * unique_contribution(n, d, freqs, ctx),
            )
        )
    for gi, group in enumerate(ctx.groups):
        entries.append(
            Contribution(
                label=f"group{gi}",
                kind="group",
                members=group.members,
                freq_hz=group.freq_hz,
                squeezed=("group", gi) in ctx.transfers,
                values=scale * group_contribution(group, freqs, ctx),
            )
        )
    total = np.zeros_like(freqs)
    for entry in entries:
        total = total + entry.values
    return SpectrumResult(
        freqs_hz=freqs,
        values=total,
        unit=config.unit,
        breakdown=entries if with_breakdown else None,
    )


def off_center_penalty(power_w: float, spec: SqueezerSpec, config: DetectionConfig) -> float:
    """Noise density of a single component under off-centered squeezing.

    Squeezing whose reference misses the measured band always increases the
    noise: S = P0 E(f0) cosh(2r).  Reported as a diagnostic only, never
    folded into `total_spectrum`.
    """
    e0 = float(config.noise_energy(config.f0_hz))
    return config.output_scale * power_w * e0 * math.cosh(2.0 * spec.r)


class PhaseOptimum(NamedTuple):
    phi_squeeze_opt: float
    phi_demod_opt: float
    alpha: float
    delta_alpha: float


def optimal_phases(c1: complex, c2: complex) -> PhaseOptimum:
    """Noise-minimizing demodulation and squeezing phases for a two-member group.

    For a group pairing c1 (through its +D column) with c2 (through its -D
    column): the demodulation phase phi0 = (pi - delta_alpha)/2 with
    delta_alpha = arg c2 - arg c1 turns the amplitudes antiparallel, and the
    squeezing phase pi/2 + alpha, alpha = arg(c1 e^{-i phi0} + c2 e^{i phi0}),
    aligns the squeezed quadrature, leaving the group contribution at
    E0 (P1 + P2 - 2 sqrt(P1 P2)) e^{-2r} / 4.
    """
    if c1 == 0 or c2 == 0:
        raise ZeroAmplitude("phase optimization needs two nonzero amplitudes")
    delta_alpha = cmath.phase(c2) - cmath.phase(c1)
    phi_demod = (math.pi - delta_alpha) / 2.0
    alpha = cmath.phase(
        c1 * cmath.exp(-1j * phi_demod) + c2 * cmath.exp(1j * phi_demod)
    )
    return PhaseOptimum(math.pi / 2.0 + alpha, phi_demod, alpha, delta_alpha)
