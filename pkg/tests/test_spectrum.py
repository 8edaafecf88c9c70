import cmath
import math

import numpy as np
import pytest

import hetspec as hs
from hetspec.errors import (
    SchemeValidationError,
    SqueezerNotCentered,
    UnmatchedSqueezer,
    ZeroAmplitude,
)

from helpers import EXAMPLE_POWERS, example_components, example_scheme, narrowband_config, two_component_scheme

H = hs.PLANCK_H


def test_single_component_no_demod_is_p_hf():
    cfg = hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0)
    comps = [hs.ClassicalComponent(0.0, 1.5 + 0.5j)]
    res = hs.total_spectrum(comps, (), (), cfg)
    expected = abs(comps[0].amplitude) ** 2 * H * 1e15
    np.testing.assert_allclose(res.values, expected, rtol=1e-12)
    assert np.ptp(res.values) == 0.0  # flat, independent of F


def test_multi_component_no_demod_sum():
    cfg = hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0)
    comps = example_components(1e6)
    res = hs.total_spectrum(comps, (), (), cfg)
    expected = sum(H * (1e15 + c.offset_hz) * c.power_w for c in comps)
    np.testing.assert_allclose(res.values, expected, rtol=1e-12)


def test_two_component_single_demod_closed_form():
    rng = np.random.default_rng(42)
    for _ in range(10):
        c0 = complex(rng.normal(), rng.normal())
        c1 = complex(rng.normal(), rng.normal())
        phi0 = rng.uniform(-np.pi, np.pi)
        comps, demods, cfg = two_component_scheme(1e3, phi0, c0, c1)
        res = hs.total_spectrum(comps, demods, (), cfg)
        beat = abs(c0 * cmath.exp(-1j * phi0) + c1 * cmath.exp(1j * phi0)) ** 2
        expected = 0.25 * (abs(c0) ** 2 + abs(c1) ** 2 + beat)
        np.testing.assert_allclose(res.values, expected, rtol=1e-12)


def test_worked_example_unique_sum():
    comps, demods, _, cfg = example_scheme(1e6, optimal=False)
    res = hs.total_spectrum(comps, demods, (), cfg, with_breakdown=True)
    uniques = sum(
        e.values for e in res.breakdown if e.kind == "unique"
    )
    p = EXAMPLE_POWERS
    np.testing.assert_allclose(
        uniques, 0.25 * (2 * p[0] + p[1] + p[2] + 2 * p[3]), rtol=1e-12
    )


def test_three_demod_group_formula():
    # engineered M = 3 coincidence: F_1 = F_0 + 2 D_0 makes column 5 of row 0
    # land on column 1 of row 1
    rng = np.random.default_rng(1)
    cfg = hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0)
    p0, p1, p2 = rng.uniform(-np.pi, np.pi, 3)
    c0 = complex(rng.normal(), rng.normal())
    c1 = complex(rng.normal(), rng.normal())
    comps = [hs.ClassicalComponent(0.0, c0), hs.ClassicalComponent(14e6, c1)]
    demods = [
        hs.DemodStage(7e6, p0),
        hs.DemodStage(1.5e6, p1),
        hs.DemodStage(23e6, p2),
    ]
    ctx = hs.build_context(comps, demods, (), cfg)
    members = ((0, 5), (1, 1))
    assert any(g.members == members for g in ctx.groups)
    group = next(g for g in ctx.groups if g.members == members)
    got = hs.group_contribution(group, np.array([0.0]), ctx)[0]
    phi5 = p0 - p1 + p2
    phi1 = -p0 - p1 + p2
    amp = c0.conjugate() * cmath.exp(1j * phi5) + c1.conjugate() * cmath.exp(1j * phi1)
    f11 = 14e6 - 7e6 - 1.5e6 + 23e6
    assert got == pytest.approx(H * (1e15 + f11) / 64 * abs(amp) ** 2, rel=1e-12)


def test_unit_amplitude_group_value():
    # two equal unit amplitudes, phase 0: the group contributes |1 + 1|^2 / 4
    comps, demods, cfg = two_component_scheme(1e3, 0.0, 1.0 + 0j, 1.0 + 0j)
    res = hs.total_spectrum(comps, demods, (), cfg, with_breakdown=True)
    group = next(e for e in res.breakdown if e.kind == "group")
    np.testing.assert_allclose(group.values, 1.0, rtol=1e-12)  # h f0 in SI units


def test_single_component_squeezed_quadratures():
    # squeezing centered on a lone component: S = P e^{+-2r} at phi = 0, pi/2
    cfg = narrowband_config()
    comps = [hs.ClassicalComponent(0.0, 1.2 + 0j)]  # real amplitude
    p = comps[0].power_w
    r = 0.6
    anti = hs.total_spectrum(comps, (), [hs.SqueezerSpec(0.0, r, 0.0)], cfg)
    np.testing.assert_allclose(anti.values, p * math.exp(2 * r), rtol=1e-12)
    sq = hs.total_spectrum(comps, (), [hs.SqueezerSpec(0.0, r, math.pi / 2)], cfg)
    np.testing.assert_allclose(sq.values, p * math.exp(-2 * r), rtol=1e-12)


def test_sampled_transfers_match_constants_through_engine():
    # a sampled transfer table holding the pure-squeeze constants must give
    # the same group contribution as the constant set
    comps, demods, squeezers, cfg = example_scheme(1e6, r=0.8)
    ctx = hs.build_context(comps, demods, squeezers, cfg)
    const = ctx.transfers[("group", 0)]
    f_grid = 1e15 + 115e6 + np.linspace(-1000.0, 1000.0, 5)
    sampled = hs.TransferSet(
        const.ref_offset_hz,
        (f_grid, np.full(5, const.g00)),
        (f_grid, np.full(5, const.g01)),
        (f_grid, np.full(5, const.g10)),
        (f_grid, np.full(5, const.g11)),
        const.halfwidth_hz,
    )
    alt = hs.EvalContext(
        ctx.scheme, ctx.demods, ctx.config, ctx.matrix, ctx.groups, ctx.uniques,
        {("group", 0): sampled},
    )
    freqs = np.linspace(0.0, 1000.0, 7)
    np.testing.assert_allclose(
        hs.group_contribution(ctx.groups[0], freqs, alt),
        hs.group_contribution(ctx.groups[0], freqs, ctx),
        rtol=1e-12,
    )


def test_coherent_flatness_without_narrowband():
    # identity transfers in the two-sideband form: the F dependence cancels
    cfg = hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0)
    comps = [hs.ClassicalComponent(0.0, 1.3 - 0.7j)]
    sq = [hs.SqueezerSpec(0.0, 0.0, 0.9)]  # r = 0: identity transfers
    res = hs.total_spectrum(comps, (), sq, cfg)
    assert np.ptp(res.values) / np.mean(res.values) < 1e-14


def _random_scheme(rng):
    n = int(rng.integers(1, 5))
    m = int(rng.integers(0, 4))
    offsets = rng.choice(np.arange(0, 400), size=n, replace=False) * 1e5
    comps = [
        hs.ClassicalComponent(
            float(f), complex(rng.normal(), rng.normal()) + 0.1
        )
        for f in offsets
    ]
    demods = [
        hs.DemodStage(float(f) * 1e5, float(rng.uniform(-np.pi, np.pi)))
        for f in rng.integers(1, 50, size=m)
    ]
    cfg = hs.DetectionConfig(f0_hz=1e12, bandwidth_hz=100.0, narrowband=True)
    return comps, demods, cfg


def test_squeezed_r0_equals_coherent_randomized():
    rng = np.random.default_rng(13)
    for _ in range(30):
        comps, demods, cfg = _random_scheme(rng)
        ctx = hs.build_context(comps, demods, (), cfg)
        # one r = 0 squeezer per distinct matrix frequency
        refs = [g.freq_hz for g in ctx.groups]
        refs += [float(ctx.matrix.entries[cell]) for cell in ctx.uniques]
        squeezers = [
            hs.SqueezerSpec(ref, 0.0, float(rng.uniform(-np.pi, np.pi)))
            for ref in refs
        ]
        coherent = hs.total_spectrum(comps, demods, (), cfg)
        squeezed = hs.total_spectrum(comps, demods, squeezers, cfg)
        np.testing.assert_allclose(squeezed.values, coherent.values, rtol=1e-12)


def test_breakdown_sums_to_total():
    comps, demods, squeezers, cfg = example_scheme(1e6)
    res = hs.total_spectrum(comps, demods, squeezers, cfg, with_breakdown=True)
    total = sum(e.values for e in res.breakdown)
    np.testing.assert_allclose(total, res.values, rtol=1e-12)
    assert {e.kind for e in res.breakdown} == {"unique", "group"}
    assert sum(e.squeezed for e in res.breakdown) == 1


def test_each_demod_stage_halves_all_unique_noise():
    rng = np.random.default_rng(8)
    count = 0
    while count < 10:
        comps, demods, cfg = _random_scheme(rng)
        extra = demods + [
            hs.DemodStage(float(rng.integers(50, 80)) * 1e5, float(rng.uniform(-np.pi, np.pi)))
        ]
        ctx0 = hs.build_context(comps, demods, (), cfg)
        ctx1 = hs.build_context(comps, extra, (), cfg)
        if ctx0.groups or ctx1.groups:
            continue  # gain law only holds in the all-unique case
        count += 1
        before = hs.total_spectrum(comps, demods, (), cfg).values
        after = hs.total_spectrum(comps, extra, (), cfg).values
        np.testing.assert_allclose(after, 0.5 * before, rtol=1e-12)


def test_rectifier_equivalent_scale():
    comps, demods, cfg = two_component_scheme()
    base = hs.total_spectrum(comps, demods, (), cfg)
    rect_cfg = narrowband_config(rectifier_equivalent=True)
    rect = hs.total_spectrum(comps, demods, (), rect_cfg)
    np.testing.assert_allclose(rect.values, (4 / math.pi) ** 2 * base.values, rtol=1e-12)


def test_normalized_units_rescale_only():
    comps = [hs.ClassicalComponent(0.0, 2.0 + 0j)]
    si = hs.total_spectrum(comps, (), (), hs.DetectionConfig(1e15, 1000.0))
    norm = hs.total_spectrum(
        comps, (), (), hs.DetectionConfig(1e15, 1000.0, normalized_units=True)
    )
    np.testing.assert_allclose(norm.values, si.values / (H * 1e15), rtol=1e-12)
    assert si.unit == "W^2/Hz" and norm.unit == "dimensionless"


def test_noise_energy_override_replaces_vacuum():
    # flat technical-noise density E0 instead of h f
    e0 = 3.5e-20
    cfg = hs.DetectionConfig(1e15, 1000.0, noise_energy_override=e0)
    comps = example_components(1e6)
    res = hs.total_spectrum(comps, (), (), cfg)
    np.testing.assert_allclose(
        res.values, e0 * sum(c.power_w for c in comps), rtol=1e-12
    )


def test_permutation_invariance():
    comps, demods, squeezers, cfg = example_scheme(1e6)
    res = hs.total_spectrum(comps, demods, squeezers, cfg)
    shuffled = [comps[2], comps[0], comps[3], comps[1]]
    res2 = hs.total_spectrum(shuffled, demods, squeezers, cfg)
    np.testing.assert_allclose(res2.values, res.values, rtol=1e-14)


def test_unmatched_squeezer():
    comps, demods, _, cfg = example_scheme(1e6)
    with pytest.raises(UnmatchedSqueezer):
        hs.total_spectrum(comps, demods, [hs.SqueezerSpec(117e6, 1.0)], cfg)


def test_duplicate_squeezer_rejected():
    comps, demods, _, cfg = example_scheme(1e6)
    sq = [hs.SqueezerSpec(115e6, 1.0), hs.SqueezerSpec(115e6, 0.5)]
    with pytest.raises(SchemeValidationError):
        hs.total_spectrum(comps, demods, sq, cfg)


def test_squeezer_not_centered_defensive():
    # a hand-built context with a mis-centered transfer must be refused
    comps, demods, squeezers, cfg = example_scheme(1e6)
    ctx = hs.build_context(comps, demods, squeezers, cfg)
    bad = hs.EvalContext(
        ctx.scheme,
        ctx.demods,
        ctx.config,
        ctx.matrix,
        ctx.groups,
        ctx.uniques,
        {("group", 0): hs.pure_squeeze_transfers(hs.SqueezerSpec(116e6, 1.0))},
    )
    with pytest.raises(SqueezerNotCentered):
        hs.group_contribution(ctx.groups[0], np.array([0.0]), bad)


def test_off_center_penalty():
    cfg = hs.DetectionConfig(1e15, 1000.0)
    assert hs.off_center_penalty(
        1.0, hs.SqueezerSpec(5000.0, 0.0), cfg
    ) == pytest.approx(H * 1e15, rel=1e-12)
    # cosh 2, frozen from direct evaluation
    assert hs.off_center_penalty(
        1.0, hs.SqueezerSpec(5000.0, 1.0), cfg
    ) == pytest.approx(3.7621956910836314 * H * 1e15, rel=1e-12)
    rs = np.linspace(0.0, 3.0, 50)
    vals = [hs.off_center_penalty(1.0, hs.SqueezerSpec(0.0, r), cfg) for r in rs]
    assert np.all(np.diff(vals) > 0)


def test_optimal_phases_examples():
    opt = hs.optimal_phases(1.0 + 0j, 1.0 + 0j)
    assert opt.delta_alpha == 0.0
    assert opt.phi_demod_opt == pytest.approx(math.pi / 2)
    opt = hs.optimal_phases(1.0 + 0j, 1j)
    assert opt.delta_alpha == pytest.approx(math.pi / 2)
    assert opt.phi_demod_opt == pytest.approx(math.pi / 4)
    with pytest.raises(ZeroAmplitude):
        hs.optimal_phases(0j, 1.0 + 0j)


def test_optimized_group_reaches_minimum():
    # minimized group contribution: (P1 + P2 - 2 sqrt(P1 P2)) e^{-2r} / 4
    rng = np.random.default_rng(21)
    for _ in range(5):
        p1, p2 = rng.uniform(0.5, 4.0, 2)
        th1, th2 = rng.uniform(-np.pi, np.pi, 2)
        r = rng.uniform(0.2, 1.5)
        c1 = cmath.rect(math.sqrt(p1), th1)
        c2 = cmath.rect(math.sqrt(p2), th2)
        comps = [
            hs.ClassicalComponent(0.0, 1.0 + 0j),
            hs.ClassicalComponent(100e3, c1),
            hs.ClassicalComponent(130e3, c2),
            hs.ClassicalComponent(230e3, math.sqrt(2) + 0j),
        ]
        cfg = narrowband_config()
        opt = hs.optimal_phases(c1, c2)
        demods = [hs.DemodStage(15e3, opt.phi_demod_opt)]
        sq = [hs.SqueezerSpec(115e3, r, opt.phi_squeeze_opt)]
        res = hs.total_spectrum(comps, demods, sq, cfg, with_breakdown=True)
        group = next(e for e in res.breakdown if e.kind == "group")
        expected = 0.25 * (p1 + p2 - 2 * math.sqrt(p1 * p2)) * math.exp(-2 * r)
        np.testing.assert_allclose(group.values, expected, rtol=1e-9, atol=1e-12)


def test_equal_powers_cancel_perfectly():
    c = 1.3 + 0j
    opt = hs.optimal_phases(c, c * cmath.exp(0.4j))
    comps = [
        hs.ClassicalComponent(100e3, c),
        hs.ClassicalComponent(130e3, c * cmath.exp(0.4j)),
    ]
    demods = [hs.DemodStage(15e3, opt.phi_demod_opt)]
    sq = [hs.SqueezerSpec(115e3, 0.8, opt.phi_squeeze_opt)]
    res = hs.total_spectrum(comps, demods, sq, narrowband_config(), with_breakdown=True)
    group = next(e for e in res.breakdown if e.kind == "group")
    assert np.max(group.values) < 1e-15 * res.band_average()


def test_squeeze_phase_extrema():
    # scanning phi: extrema at alpha and alpha + pi/2, ratio e^{4r}
    comps, demods, _, cfg = example_scheme(1e6, optimal=False)
    r = 0.9
    c1, c2 = comps[1].amplitude, comps[2].amplitude
    alpha = cmath.phase(c1 + c2)  # demod phase 0
    levels = {}
    for phi in (alpha, alpha + math.pi / 2):
        sq = [hs.SqueezerSpec(115e6, r, phi)]
        res = hs.total_spectrum(comps, demods, sq, cfg, with_breakdown=True)
        group = next(e for e in res.breakdown if e.kind == "group")
        levels[phi] = float(np.mean(group.values))
    ratio = levels[alpha] / levels[alpha + math.pi / 2]
    assert ratio == pytest.approx(math.exp(4 * r), rel=1e-9)
    # scanned values stay inside the extrema
    for k in range(1, 8):
        sq = [hs.SqueezerSpec(115e6, r, alpha + k * math.pi / 8)]
        res = hs.total_spectrum(comps, demods, sq, cfg, with_breakdown=True)
        group = next(e for e in res.breakdown if e.kind == "group")
        level = float(np.mean(group.values))
        assert levels[alpha + math.pi / 2] <= level * (1 + 1e-12)
        assert level <= levels[alpha] * (1 + 1e-12)


def test_grid_validation():
    comps, demods, cfg = two_component_scheme()
    res = hs.total_spectrum(comps, demods, (), cfg, grid=np.array([0.0, 500.0, 1000.0]))
    assert res.freqs_hz.tolist() == [0.0, 500.0, 1000.0]
    with pytest.raises(SchemeValidationError):
        hs.total_spectrum(comps, demods, (), cfg, grid=np.array([0.0, 2000.0]))


def test_spectrum_result_invariants():
    with pytest.raises(ValueError):
        hs.SpectrumResult(np.array([0.0, 1.0]), np.array([1.0, -1.0]), "W^2/Hz")
    with pytest.raises(ValueError):
        hs.SpectrumResult(np.array([1.0, 0.0]), np.array([1.0, 1.0]), "W^2/Hz")


def test_nonnegative_everywhere_randomized():
    rng = np.random.default_rng(77)
    for _ in range(20):
        comps, demods, cfg = _random_scheme(rng)
        res = hs.total_spectrum(comps, demods, (), cfg)
        assert np.all(res.values >= 0)
