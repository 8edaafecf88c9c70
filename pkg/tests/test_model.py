import cmath

import numpy as np
import pytest

import hetspec as hs
from hetspec.errors import (
    BandwidthTooLarge,
    NonPositivePower,
    OverlappingComponents,
    SchemeValidationError,
)


def _config(**kw):
    return hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0, **kw)


def test_heterodyne_pair_is_valid():
    # carrier at 0 Hz plus a 30 MHz subcarrier, B = 1000 Hz
    comps = [
        hs.ClassicalComponent(0.0, 1.0 + 0j),
        hs.ClassicalComponent(30e6, 0.5 + 0j),
    ]
    scheme = hs.validate_scheme(comps, _config())
    assert [c.offset_hz for c in scheme.components] == [0.0, 30e6]


def test_single_component_is_valid():
    scheme = hs.validate_scheme([hs.ClassicalComponent(0.0, 2.0 + 0j)], _config())
    assert len(scheme.components) == 1


def test_overlapping_components_rejected():
    comps = [
        hs.ClassicalComponent(0.0, 1.0 + 0j),
        hs.ClassicalComponent(1500.0, 1.0 + 0j),
    ]
    with pytest.raises(OverlappingComponents) as err:
        hs.validate_scheme(comps, _config())
    assert err.value.indices == (0, 1)


def test_touching_bands_allowed():
    comps = [
        hs.ClassicalComponent(0.0, 1.0 + 0j),
        hs.ClassicalComponent(2000.0, 1.0 + 0j),
    ]
    hs.validate_scheme(comps, _config())


def test_zero_power_component_rejected():
    comps = [hs.ClassicalComponent(0.0, 0j)]
    with pytest.raises(NonPositivePower):
        hs.validate_scheme(comps, _config())


def test_component_below_dc_rejected():
    comps = [hs.ClassicalComponent(-2e15, 1.0 + 0j)]
    with pytest.raises(SchemeValidationError):
        hs.validate_scheme(comps, _config())


def test_empty_scheme_rejected():
    with pytest.raises(SchemeValidationError):
        hs.validate_scheme([], _config())


def test_validation_idempotent():
    comps = [hs.ClassicalComponent(0.0, 1.0 + 0j)]
    cfg = _config()
    scheme = hs.validate_scheme(comps, cfg)
    assert hs.validate_scheme(scheme, cfg) is scheme


def test_components_sorted_with_source_indices():
    comps = [
        hs.ClassicalComponent(30e6, 1.0 + 0j),
        hs.ClassicalComponent(0.0, 2.0 + 0j),
    ]
    scheme = hs.validate_scheme(comps, _config())
    assert [c.offset_hz for c in scheme.components] == [0.0, 30e6]
    assert scheme.source_indices == (1, 0)


def test_bandwidth_too_large():
    with pytest.raises(BandwidthTooLarge):
        hs.DetectionConfig(f0_hz=1e6, bandwidth_hz=1e4)


def test_tolerance_must_stay_below_bandwidth():
    with pytest.raises(SchemeValidationError):
        hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0, coincidence_tol_hz=1000.0)
    with pytest.raises(SchemeValidationError):
        hs.DetectionConfig(f0_hz=1e15, bandwidth_hz=1000.0, coincidence_tol_hz=-1.0)


def test_demod_stage_requires_positive_frequency():
    with pytest.raises(SchemeValidationError):
        hs.DemodStage(0.0)


def test_squeezer_requires_nonnegative_r():
    with pytest.raises(SchemeValidationError):
        hs.SqueezerSpec(0.0, -0.1)


def test_from_power():
    c = hs.ClassicalComponent.from_power(5.0, 4.0, 0.7)
    assert c.amplitude == pytest.approx(cmath.rect(2.0, 0.7))
    assert c.power_w == pytest.approx(4.0)


def test_noise_energy_default_is_hf():
    cfg = _config()
    assert cfg.noise_energy(1e15) == pytest.approx(hs.PLANCK_H * 1e15, rel=1e-15)
    freqs = np.array([1e15, 2e15])
    np.testing.assert_allclose(cfg.noise_energy(freqs), hs.PLANCK_H * freqs)


def test_noise_energy_scalar_override():
    cfg = _config(noise_energy_override=0.0)
    assert cfg.noise_energy(1e15) == 0.0
    assert np.all(cfg.noise_energy(np.array([1.0, 2.0])) == 0.0)


def test_noise_energy_table_override():
    cfg = _config(noise_energy_override=((1e15, 2.0), (2e15, 4.0)))
    assert cfg.noise_energy(1.5e15) == pytest.approx(3.0)
    # clamped outside the table
    assert cfg.noise_energy(5e15) == pytest.approx(4.0)


def test_output_scale_and_unit():
    assert _config().output_scale == 1.0
    assert _config().unit == "W^2/Hz"
    cfg = _config(normalized_units=True)
    assert cfg.output_scale == pytest.approx(1.0 / (hs.PLANCK_H * 1e15))
    assert cfg.unit == "dimensionless"
