"""Tree-sorted frequency matrix, demodulation phases, coincidence grouping.

The N x 2^M matrix holds every signed combination F_n + sum_k s_k D_k.  The
column index d encodes the sign pattern through its M-bit binary expansion
b_0 b_1 ... b_{M-1} (b_0 most significant): stage k contributes +D_k when
b_k = 1 and -D_k otherwise.  The same bits fix the per-column demodulation
phase, so both derive from one function, `column_signs`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PartialOverlap, SchemeValidationError
from .model import DetectionConfig, Scheme

Cell = tuple[int, int]  # (row = component index, column = sign pattern)


def column_signs(d: int, n_demods: int) -> tuple[int, ...]:
    """Signs (+1/-1) each demodulation stage contributes in column d."""
    if not 0 <= d < 2**n_demods:
        raise IndexError(f"column {d} out of range for {n_demods} demodulations")
    return tuple(
        1 if (d >> (n_demods - 1 - k)) & 1 else -1 for k in range(n_demods)
    )


def demod_phase(d: int, demods) -> float:
    """Total demodulation phase of column d: sum of s_k(d) * phi_k.

    The sign convention matches the frequency convention: a column that adds
    +D_k also adds +phi_k.
    """
    signs = column_signs(d, len(demods))
    return sum(s * stage.phase_rad for s, stage in zip(signs, demods))


@dataclass(frozen=True)
class FrequencyMatrix:
    """All beat-note frequencies the demodulated photocurrent folds to [0, B]."""

    entries: np.ndarray  # (N, 2^M), Hz, read-only
    n_components: int
    n_demods: int

    def __post_init__(self):
        self.entries.setflags(write=False)

    def cells(self):
        """All (n, d) index pairs in row-major order."""
        return [
            (n, d)
            for n in range(self.n_components)
            for d in range(2**self.n_demods)
        ]


@dataclass(frozen=True)
class CoincidenceGroup:
    """Matrix cells sharing one frequency; their vacuum amplitudes add coherently.

    ``freq_hz`` is the first member's entry value (members are ordered by
    (n, d)), not an average.
    """

    members: tuple[Cell, ...]
    freq_hz: float


def build_frequency_matrix(scheme: Scheme, demods) -> FrequencyMatrix:
    """Build the tree-sorted matrix for a validated scheme; M = 0 gives one column."""
    demods = tuple(demods)
    m = len(demods)
    offsets = np.array([c.offset_hz for c in scheme.components], dtype=float)
    shifts = np.array(
        [
            sum(s * stage.freq_hz for s, stage in zip(column_signs(d, m), demods))
            for d in range(2**m)
        ],
        dtype=float,
    )
    entries = offsets[:, None] + shifts[None, :]
    if np.any(entries <= -scheme.config.f0_hz):
        raise SchemeValidationError(
            "a frequency-matrix entry lies at a non-positive absolute frequency"
        )
    return FrequencyMatrix(entries, len(offsets), m)


def group_entries(
    matrix: FrequencyMatrix, config: DetectionConfig
) -> tuple[list[CoincidenceGroup], list[Cell]]:
    """Partition matrix cells into coincidence groups and unique entries.

    Cells are clustered by single linkage under the coincidence tolerance;
    a cluster whose total spread exceeds the tolerance, or two clusters
    closer than 2B, raise `PartialOverlap` (the solver refuses to
    approximate partially overlapping detection bands).
    """
    flat = sorted(
        ((matrix.entries[n, d], (n, d)) for (n, d) in matrix.cells()),
        key=lambda item: (item[0], item[1]),
    )
    clusters: list[list[tuple[float, Cell]]] = [[flat[0]]]
    for prev, cur in zip(flat, flat[1:]):
        gap = cur[0] - prev[0]
        if gap <= config.coincidence_tol_hz:
            clusters[-1].append(cur)
        elif gap < 2 * config.bandwidth_hz:
            raise PartialOverlap(prev[1], cur[1], prev[0], cur[0])
        else:
            clusters.append([cur])
    groups: list[CoincidenceGroup] = []
    uniques: list[Cell] = []
    for cluster in clusters:
        spread = cluster[-1][0] - cluster[0][0]
        if spread > config.coincidence_tol_hz:
            # near-coincidences chained beyond the tolerance
            raise PartialOverlap(
                cluster[0][1], cluster[-1][1], cluster[0][0], cluster[-1][0]
            )
        members = sorted(cell for _, cell in cluster)
        if len(members) == 1:
            uniques.append(members[0])
        else:
            n0, d0 = members[0]
            groups.append(
                CoincidenceGroup(tuple(members), float(matrix.entries[n0, d0]))
            )
    groups.sort(key=lambda g: g.members[0])
    uniques.sort()
    return groups, uniques
