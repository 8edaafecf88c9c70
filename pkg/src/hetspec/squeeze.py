"""Two-frequency transfer functions: sideband mixing by squeezing and linear optics.

A `TransferSet` describes how output field amplitudes at the mirrored pair
of absolute frequencies (f_ref + F, f_ref - F) derive from the input
vacuum, as the 2x2 action

    ( s(f_ref + F)        )   ( t00(f_ref+F)  t01(f_ref-F) ) ( q(f_ref + F)        )
    ( s_dagger(f_ref - F) ) = ( t10(f_ref+F)  t11(f_ref-F) ) ( q_dagger(f_ref - F) )

t00 and t11 carry the frequency-preserving (linear plus nonlinear) part,
t01 and t10 couple the mirrored sidebands.  Gains are constants over the
validity band in every tested configuration; a frequency-sampled variant
is available behind the same four accessors, but composition is only
defined for constant sets.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedReference
from .model import SqueezerSpec

#: A gain is a complex constant or a (freqs_hz, values) sample table.
Gain = complex | tuple


def _eval(gain, f_abs):
    if isinstance(gain, tuple):
        freqs, vals = gain
        re = np.interp(f_abs, freqs, np.real(vals))
        im = np.interp(f_abs, freqs, np.imag(vals))
        return re + 1j * im
    return gain if np.ndim(f_abs) == 0 else np.full(np.shape(f_abs), gain, complex)


@dataclass(frozen=True)
class TransferSet:
    """Four complex transfer gains valid within +-halfwidth_hz of f0 + ref_offset_hz."""

    ref_offset_hz: float
    g00: Gain
    g01: Gain
    g10: Gain
    g11: Gain
    halfwidth_hz: float | None = None

    def t00(self, f_abs):
        return _eval(self.g00, f_abs)

    def t01(self, f_abs):
        return _eval(self.g01, f_abs)

    def t10(self, f_abs):
        return _eval(self.g10, f_abs)

    def t11(self, f_abs):
        return _eval(self.g11, f_abs)

    @property
    def is_constant(self) -> bool:
        return not any(
            isinstance(g, tuple) for g in (self.g00, self.g01, self.g10, self.g11)
        )

    def matrix(self) -> np.ndarray:
        """Constant gains as the 2x2 array [[t00, t01], [t10, t11]]."""
        if not self.is_constant:
            raise ValueError("sampled transfer sets have no single matrix")
        return np.array([[self.g00, self.g01], [self.g10, self.g11]], complex)


def identity_transfers(ref_offset_hz: float = 0.0, halfwidth_hz=None) -> TransferSet:
    """Coherent pass-through: t00 = t11 = 1, t01 = t10 = 0."""
    return TransferSet(ref_offset_hz, 1.0 + 0j, 0j, 0j, 1.0 + 0j, halfwidth_hz)


def pure_squeeze_transfers(spec: SqueezerSpec, halfwidth_hz=None) -> TransferSet:
    """Frequency-independent pure squeezing of factor r and phase phi.

    t00 = t11 = cosh r, t01 = sinh r e^{2i phi}, t10 = sinh r e^{-2i phi};
    r = 0 reproduces the identity set exactly.
    """
    ch = cmath.cosh(spec.r)
    sh = cmath.sinh(spec.r)
    rot = cmath.exp(2j * spec.phi_rad)
    return TransferSet(
        spec.ref_offset_hz, ch, sh * rot, sh / rot, ch, halfwidth_hz
    )


def compose_transfers(outer: TransferSet, inner: TransferSet) -> TransferSet:
    """Transfer set of applying ``inner`` first, then ``outer``.

    Plain 2x2 matrix product in the (q(f+F), q_dagger(f-F)) basis; both
    sets must share the reference frequency.  Only constant sets compose.
    """
    if outer.ref_offset_hz != inner.ref_offset_hz:
        raise MismatchedReference(
            f"cannot compose transfers referenced at {outer.ref_offset_hz:g} "
            f"and {inner.ref_offset_hz:g} Hz"
        )
    if not (outer.is_constant and inner.is_constant):
        raise NotImplementedError("composition of sampled transfer sets")
    prod = outer.matrix() @ inner.matrix()
    widths = [w for w in (outer.halfwidth_hz, inner.halfwidth_hz) if w is not None]
    return TransferSet(
        outer.ref_offset_hz,
        complex(prod[0, 0]),
        complex(prod[0, 1]),
        complex(prod[1, 0]),
        complex(prod[1, 1]),
        min(widths) if widths else None,
    )
