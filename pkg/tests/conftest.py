import numpy as np
import pytest
from hypothesis import settings
from scipy.special import fresnel

from afshar.apparatus import AfsharConfig, SlitState, run_scenario

settings.register_profile("ci", deadline=None, max_examples=50, derandomize=True)
settings.load_profile("ci")


def fresnel_slit(x, center, width, wavelength, z):
    """Closed-form Fresnel diffraction of a unit-amplitude slit (no exp(ikz) carrier)."""
    s = np.sqrt(2 / (wavelength * z))
    s1, c1 = fresnel(s * (center + width / 2 - x))
    s0, c0 = fresnel(s * (center - width / 2 - x))
    return (c1 - c0 + 1j * (s1 - s0)) / np.sqrt(2j)


def fraunhofer_single(x, center, width, wavelength, z):
    """Unit-power far-field single-slit intensity."""
    return width / (wavelength * z) * np.sinc(width * (x - center) / (wavelength * z)) ** 2


@pytest.fixture(scope="session")
def default_config():
    return AfsharConfig()


@pytest.fixture(scope="session")
def default_results(default_config):
    return {
        (s, g): run_scenario(default_config, s, g)
        for s in SlitState
        for g in (False, True)
    }


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_config(rng, n=1 << 14):
    """A valid apparatus in the fringe regime (single slit far field at sigma1)."""
    while True:
        lam = rng.uniform(400e-9, 800e-9)
        a = rng.uniform(0.2e-3, 0.5e-3)
        d = a * rng.uniform(4, 8)
        z1, z2, f = rng.uniform(0.15, 0.4), rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.2)
        fringe = lam * z1 / d
        extent = d + a + 2 * lam * (z1 + z2) / a
        w_lo = max(8 * extent, 1.01 * n * lam / 2)
        w_hi = min(np.sqrt(n * lam * f), n * fringe / 32)
        if w_lo > w_hi or z1 + z2 <= f or a * a / (lam * z1) > 0.2:
            continue
        return AfsharConfig(
            wavelength=lam, slit_width=a, slit_separation=d, z1=z1, z2=z2, focal_length=f,
            wire_count=int(rng.integers(0, 5)), wire_width=fringe * rng.uniform(0.05, 0.2),
            sample_count=n, window_extent=rng.uniform(w_lo, w_hi),
        )
