"""Shared scheme builders for the test suite."""

import hetspec as hs

#: powers (W) of the four-component worked example
EXAMPLE_POWERS = (1.0, 4.0, 1.0, 2.0)
#: phases chosen so delta_alpha = arg(c2) - arg(c1) = -1.3
EXAMPLE_PHASES = (0.0, 0.4, -0.9, 0.0)


def narrowband_config(bandwidth_hz=1000.0, f0_hz=1e15, **kw):
    return hs.DetectionConfig(
        f0_hz=f0_hz, bandwidth_hz=bandwidth_hz, narrowband=True,
        normalized_units=True, **kw,
    )


def example_components(scale_hz=1e6):
    """Four-component example: offsets (0, 100, 130, 230) x scale."""
    offsets = (0.0, 100.0, 130.0, 230.0)
    return [
        hs.ClassicalComponent.from_power(off * scale_hz, p, ph)
        for off, p, ph in zip(offsets, EXAMPLE_POWERS, EXAMPLE_PHASES)
    ]


def example_scheme(scale_hz=1e6, r=1.0, optimal=True, **config_kw):
    """Components, demods, squeezers, config for the worked example.

    ``scale_hz=1e3`` gives the kHz-scaled variant used for Monte Carlo
    runs; the analytic result is scale-invariant under the narrowband
    approximation.
    """
    comps = example_components(scale_hz)
    cfg = narrowband_config(**config_kw)
    if optimal:
        opt = hs.optimal_phases(comps[1].amplitude, comps[2].amplitude)
        demod_phase, squeeze_phase = opt.phi_demod_opt, opt.phi_squeeze_opt
    else:
        demod_phase, squeeze_phase = 0.0, 0.0
    demods = (hs.DemodStage(15.0 * scale_hz, demod_phase),)
    squeezers = (hs.SqueezerSpec(115.0 * scale_hz, r, squeeze_phase),)
    return comps, demods, squeezers, cfg


def two_component_scheme(scale_hz=1e3, demod_phase=0.35, c0=1.0 + 0.0j, c1=0.6 + 0.45j):
    """Carrier plus subcarrier at 30 x scale, demodulated at 15 x scale."""
    comps = [
        hs.ClassicalComponent(0.0, c0),
        hs.ClassicalComponent(30.0 * scale_hz, c1),
    ]
    demods = (hs.DemodStage(15.0 * scale_hz, demod_phase),)
    return comps, demods, narrowband_config()
