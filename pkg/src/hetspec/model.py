"""Domain types, unit conventions, and scheme validation.

Conventions used throughout the package:

* Frequencies are offsets from the optical reference f0 unless a name says
  otherwise; a classical component at ``offset_hz`` F sits at the absolute
  frequency f0 + F.
* Amplitudes are complex numbers in sqrt(W), so ``abs(c)**2`` is the line
  power in W.
* All angles are radians.
* The photodiode responsivity is fixed at 1, so spectra are light-power
  densities (W^2/Hz) unless ``normalized_units`` rescales them by 1/(h f0).

Everything here is immutable after construction and safe to share between
threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BandwidthTooLarge,
    NonPositivePower,
    OverlappingComponents,
    SchemeValidationError,
)

#: Planck constant, 2019 SI exact value (J s).
PLANCK_H = 6.62607015e-34

#: Default tolerance for treating two matrix entries as one frequency (Hz).
#: Far below any realistic detection bandwidth while absorbing float error
#: in F_i +- sum(D_k) arithmetic.
DEFAULT_COINCIDENCE_TOL_HZ = 1e-3


@dataclass(frozen=True)
class ClassicalComponent:
    """One discrete classical field line: amplitude c at offset F from f0."""

    offset_hz: float
    amplitude: complex

    @property
    def power_w(self) -> float:
        return abs(self.amplitude) ** 2

    @classmethod
    def from_power(cls, offset_hz: float, power_w: float, phase_rad: float = 0.0):
        """Build a component from (P, theta) as c = sqrt(P) e^{i theta}."""
        if power_w < 0:
            raise SchemeValidationError(f"negative power {power_w} W")
        return cls(offset_hz, cmath.rect(math.sqrt(power_w), phase_rad))


@dataclass(frozen=True)
class DemodStage:
    """One harmonic demodulation of the photocurrent: cos(2 pi D t + phi)."""

    freq_hz: float
    phase_rad: float = 0.0

    def __post_init__(self):
        if not self.freq_hz > 0:
            raise SchemeValidationError(
                f"demodulation frequency must be positive, got {self.freq_hz}"
            )


@dataclass(frozen=True)
class SqueezerSpec:
    """Pure squeezing of strength r and phase phi, mirrored about f0 + ref_offset_hz.

    The reference must coincide (within the coincidence tolerance) with some
    frequency-matrix entry when a spectrum is solved; the off-centered case
    is only available through the `off_center_penalty` diagnostic.
    """

    ref_offset_hz: float
    r: float
    phi_rad: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise SchemeValidationError(f"squeezing factor must be >= 0, got {self.r}")


@dataclass(frozen=True)
class DetectionConfig:
    """Detection-chain constants shared by all solver stages.

    ``narrowband`` approximates every vacuum energy h(f0 + F_nd +- F) by
    h f0.  ``normalized_units`` divides output spectra by h f0.
    ``rectifier_equivalent`` rescales final spectra by (4/pi)^(2M) to report
    the rectifying-demodulation equivalent of the harmonic chain.
    ``noise_energy_override`` replaces the vacuum energy density h*f by a
    constant or by a frequency->energy table (linear interpolation, end
    values clamped); use it to model classical technical noise.
    """

    f0_hz: float
    bandwidth_hz: float
    coincidence_tol_hz: float = DEFAULT_COINCIDENCE_TOL_HZ
    narrowband: bool = False
    normalized_units: bool = False
    rectifier_equivalent: bool = False
    noise_energy_override: float | tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not self.f0_hz > 0:
            raise SchemeValidationError(f"f0 must be positive, got {self.f0_hz}")
        if not self.bandwidth_hz > 0:
            raise SchemeValidationError(
                f"bandwidth must be positive, got {self.bandwidth_hz}"
            )
        if not self.bandwidth_hz < self.f0_hz / 1e3:
            raise BandwidthTooLarge(
                f"bandwidth {self.bandwidth_hz:g} Hz is not small against "
                f"f0 = {self.f0_hz:g} Hz (need B < f0/1e3)"
            )
        if self.coincidence_tol_hz < 0:
            raise SchemeValidationError("coincidence tolerance must be >= 0")
        if not self.coincidence_tol_hz < self.bandwidth_hz:
            raise SchemeValidationError(
                "coincidence tolerance must be below the detection bandwidth"
            )
        if self.noise_energy_override is not None and not np.isscalar(
            self.noise_energy_override
        ):
            table = tuple(
                (float(f), float(e)) for f, e in self.noise_energy_override
            )
            if len(table) == 0:
                raise SchemeValidationError("noise energy table is empty")
            freqs = [f for f, _ in table]
            if sorted(freqs) != freqs:
                raise SchemeValidationError(
                    "noise energy table must be sorted by frequency"
                )
            object.__setattr__(self, "noise_energy_override", table)

    def noise_energy(self, f_abs):
        """Single-sided noise energy density S_q at absolute frequency (J).

        h*f for quantum vacuum; the override, when present, substitutes a
        technical-noise density.
        """
        if self.noise_energy_override is None:
            return PLANCK_H * np.asarray(f_abs, dtype=float)
        if np.isscalar(self.noise_energy_override):
            val = float(self.noise_energy_override)
            return val if np.ndim(f_abs) == 0 else np.full(np.shape(f_abs), val)
        freqs = np.array([f for f, _ in self.noise_energy_override])
        vals = np.array([e for _, e in self.noise_energy_override])
        return np.interp(f_abs, freqs, vals)

    @property
    def output_scale(self) -> float:
        """Factor applied to spectra before reporting (1/(h f0) when normalized)."""
        return 1.0 / (PLANCK_H * self.f0_hz) if self.normalized_units else 1.0

    @property
    def unit(self) -> str:
        return "dimensionless" if self.normalized_units else "W^2/Hz"


@dataclass(frozen=True)
class Scheme:
    """A validated scheme: components canonically sorted by offset.

    ``source_indices[k]`` is the position of ``components[k]`` in the list
    passed to `validate_scheme`, so error messages and breakdowns can be
    traced back to the caller's ordering.
    """

    components: tuple[ClassicalComponent, ...]
    source_indices: tuple[int, ...]
    config: DetectionConfig


def validate_scheme(components, config: DetectionConfig) -> Scheme:
    """Validate a component list against the detection config.

    Accepts an already-validated `Scheme` (with the same config) and returns
    it unchanged, so validation is idempotent.  Components are sorted by
    offset; all downstream operations are therefore invariant under input
    permutations.

    Raises `NonPositivePower`, `OverlappingComponents`, or
    `SchemeValidationError` (indices refer to the input ordering).
    """
    if isinstance(components, Scheme):
        if components.config != config:
            raise SchemeValidationError(
                "scheme was validated against a different detection config"
            )
        return components
    components = list(components)
    if not components:
        raise SchemeValidationError("scheme needs at least one classical component")
    for i, comp in enumerate(components):
        if comp.power_w == 0.0:
            raise NonPositivePower(i)
        if not comp.offset_hz > -config.f0_hz:
            raise SchemeValidationError(
                f"component {i} at offset {comp.offset_hz:g} Hz lies at a "
                f"non-positive absolute frequency"
            )
    order = sorted(range(len(components)), key=lambda i: components[i].offset_hz)
    ordered = [components[i] for i in order]
    for a, b in zip(order, order[1:]):
        spacing = components[b].offset_hz - components[a].offset_hz
        if abs(spacing) < 2 * config.bandwidth_hz:
            raise OverlappingComponents(a, b, abs(spacing), config.bandwidth_hz)
    return Scheme(tuple(ordered), tuple(order), config)
