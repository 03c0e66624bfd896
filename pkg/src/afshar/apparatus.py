"""The Afshar optical train: two slits, wire grid at the fringe minima, lens,
and a detector plane split into U' and L' halves.

Coordinates: the slit midline is ``x = 0`` and the "upper" slit sits at
``x = +d/2``.  Power is tracked in fractions of the (unit) source power, and
every bit of it ends up in exactly one of four bins: absorbed by the wires,
detected in U', detected in L', or lost in the numerical guard bands
("spill").
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache

import numpy as np
from scipy.signal import find_peaks

from . import wavefield as wf
from .errors import (
    InsufficientFringesError,
    InvalidConfigError,
    InvalidParameterError,
    WindowTooSmallError,
)
from .sampling import map_blocks

MAX_SPILL = 0.05
VISIBILITY_FRINGES = 5
GUARD_FRACTION = 0.10  # of the window, per edge
MIN_SAMPLES_PER_FRINGE = 32
WINDOW_OVER_EXTENT = 8.0
WIRE_DEPTH_THRESHOLD = 0.5


class SlitState(enum.Enum):
    BOTH = "both"
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class AfsharConfig:
    """Apparatus geometry, SI units throughout."""

    wavelength: float = 650e-9
    slit_width: float = 0.15e-3
    slit_separation: float = 1.25e-3
    z1: float = 1.0
    z2: float = 0.5
    focal_length: float = 0.5
    wire_count: int = 6
    wire_width: float = 0.05e-3
    detector_boundary: float = 0.0
    sample_count: int = 1 << 16
    window_extent: float = 0.128

    def __post_init__(self):
        for name in ("wavelength", "slit_width", "slit_separation", "z1", "z2",
                     "focal_length", "wire_width", "detector_boundary", "window_extent"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvalidConfigError(f"{name} must be a finite number, got {v!r}")
        for name in ("wire_count", "sample_count"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise InvalidConfigError(f"{name} must be an integer, got {v!r}")
        if self.wavelength <= 0:
            raise InvalidConfigError("wavelength must be positive")
        if not self.slit_separation > self.slit_width > 0:
            raise InvalidConfigError(
                f"need slit_separation > slit_width > 0 (got d={self.slit_separation}, a={self.slit_width})"
            )
        for name in ("z1", "z2", "focal_length"):
            if getattr(self, name) <= 0:
                raise InvalidConfigError(f"{name} must be positive")
        if not self.z1 + self.z2 > self.focal_length:
            raise InvalidConfigError("z1 + z2 must exceed the focal length for a real image")
        if self.wire_count < 0:
            raise InvalidConfigError("wire_count must be >= 0")
        if self.wire_width <= 0:
            raise InvalidConfigError("wire_width must be positive")
        if not self.wire_width < self.fringe_spacing:
            raise InvalidConfigError(
                f"wire_width {self.wire_width:g} m must be below the fringe spacing {self.fringe_spacing:g} m"
            )
        n = self.sample_count
        if n < 2 or n & (n - 1):
            raise InvalidConfigError("sample_count must be a power of two")
        if self.window_extent <= 0:
            raise InvalidConfigError("window_extent must be positive")
        dx = self.grid_spacing
        if self.fringe_spacing / dx < MIN_SAMPLES_PER_FRINGE:
            raise InvalidConfigError(
                f"only {self.fringe_spacing / dx:.1f} samples per fringe at sigma1 "
                f"(need >= {MIN_SAMPLES_PER_FRINGE}); raise sample_count or shrink window_extent"
            )
        if dx <= self.wavelength / 2:
            raise InvalidConfigError("grid spacing must exceed lambda/2 (evanescent-free grid)")
        if self.window_extent * dx > self.wavelength * self.focal_length:
            raise InvalidConfigError(
                "lens phase is aliased at the window edge: need window_extent**2 / sample_count "
                "<= wavelength * focal_length"
            )
        need = WINDOW_OVER_EXTENT * self.illuminated_extent(self.z1 + self.z2)
        if self.window_extent < need:
            raise InvalidConfigError(
                f"window_extent {self.window_extent:g} m is below {WINDOW_OVER_EXTENT:g}x the "
                f"illuminated extent at the lens ({need:g} m)"
            )
        if abs(self.detector_boundary) >= self.usable_half_width:
            raise InvalidConfigError("detector_boundary lies outside the usable window")

    @property
    def fringe_spacing(self) -> float:
        return self.wavelength * self.z1 / self.slit_separation

    @property
    def grid_spacing(self) -> float:
        return self.window_extent / self.sample_count

    @property
    def detector_plane(self) -> float:
        """Image distance behind the lens, from 1/z_img = 1/f - 1/(z1 + z2)."""
        zo = self.z1 + self.z2
        return 1.0 / (1.0 / self.focal_length - 1.0 / zo)

    @property
    def magnification(self) -> float:
        return -self.detector_plane / (self.z1 + self.z2)

    @property
    def guard_width(self) -> float:
        return GUARD_FRACTION * self.window_extent

    @property
    def usable_half_width(self) -> float:
        return self.window_extent / 2 - self.guard_width

    def illuminated_extent(self, z: float) -> float:
        """Full width of both slits' central diffraction lobes at distance ``z``."""
        return self.slit_separation + self.slit_width + 2 * self.wavelength * z / self.slit_width

    def slit_centers(self, slits: SlitState) -> list[float]:
        h = self.slit_separation / 2
        return {SlitState.BOTH: [h, -h], SlitState.UPPER: [h], SlitState.LOWER: [-h]}[slits]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detector_plane"] = self.detector_plane
        return d


CONFIG_KEYS = tuple(f.name for f in fields(AfsharConfig))


def _cell_coverage(x: np.ndarray, dx: float, lo: float, hi: float) -> np.ndarray:
    """Fraction of each grid cell [x - dx/2, x + dx/2] inside [lo, hi]."""
    overlap = np.minimum(x + dx / 2, hi) - np.maximum(x - dx / 2, lo)
    return np.clip(overlap, 0.0, None) / dx


def build_slit_field(config: AfsharConfig, slits: SlitState) -> wf.ComplexField:
    """Unit-power top-hat illumination of the open slits, equal phase.

    Edge cells carry their covered fraction so the slit width is honoured
    between grid points.
    """
    if config.slit_separation < config.slit_width:
        raise InvalidConfigError("slits overlap")
    x = wf.grid_positions(config.sample_count, config.grid_spacing)
    amp = np.zeros(config.sample_count)
    half = config.slit_width / 2
    for c in config.slit_centers(slits):
        amp += _cell_coverage(x, config.grid_spacing, c - half, c + half)
    f = wf.ComplexField(amp.astype(np.complex128), config.grid_spacing, config.wavelength)
    return wf.normalized(f)


def _guard_amplitude(config: AfsharConfig) -> np.ndarray:
    x = np.abs(wf.grid_positions(config.sample_count, config.grid_spacing))
    depth = np.clip((x - config.usable_half_width) / config.guard_width, 0.0, 1.0)
    return np.cos(0.5 * np.pi * depth) ** 2


def _max_step(config: AfsharConfig) -> float:
    # steepest angle the grid can represent; it may cross half a guard band per step
    sin_max = min(config.wavelength / (2 * config.grid_spacing), 1.0)
    tan_max = sin_max / math.sqrt(max(1.0 - sin_max**2, 1e-12))
    return 0.5 * config.guard_width / tan_max


def propagate_guarded(field: wf.ComplexField, distance: float, config: AfsharConfig) -> tuple[wf.ComplexField, float]:
    """Propagate in steps short enough that nothing wraps past the absorbing
    guard bands; returns the field and the power absorbed by them."""
    guard = _guard_amplitude(config)
    steps = max(1, math.ceil(distance / _max_step(config)))
    dz = distance / steps
    h = wf.transfer_function(field.n, field.grid_spacing, field.wavelength, dz)
    u = np.asarray(field.samples)
    spill = 0.0
    for _ in range(steps):
        u = np.fft.ifft(np.fft.fft(u) * h)
        before = np.sum(np.abs(u) ** 2)
        u = u * guard
        spill += (before - np.sum(np.abs(u) ** 2)) * field.grid_spacing
    return field.with_samples(u), float(spill)


def fringe_visibility(profile: wf.IntensityProfile, window: tuple[float, float],
                      rel_prominence: float = 1e-3) -> float:
    """Mean (Imax - Imin)/(Imax + Imin) over adjacent max/min pairs in ``window``.

    Extrema with prominence below ``rel_prominence`` of the window peak are
    treated as numerical ripple.  A window holding extrema but no alternating
    max/min pair (a bare diffraction envelope) has visibility 0.
    """
    xs, v = profile.window(*window)
    if v.size < 3:
        raise InvalidParameterError("visibility window covers fewer than 3 samples")
    top = float(v.max())
    if top <= 0:
        raise InsufficientFringesError("profile is zero over the window")
    prom = rel_prominence * top
    maxima, _ = find_peaks(v, prominence=prom)
    minima, _ = find_peaks(-v, prominence=prom)
    if maxima.size + minima.size == 0:
        raise InsufficientFringesError("no extrema in the visibility window")
    extrema = sorted([(int(i), True) for i in maxima] + [(int(i), False) for i in minima])
    ratios = []
    for (i, is_max), (j, next_max) in zip(extrema, extrema[1:]):
        if is_max == next_max:
            continue
        hi, lo = (v[i], v[j]) if is_max else (v[j], v[i])
        ratios.append((hi - lo) / (hi + lo))
    return float(np.mean(ratios)) if ratios else 0.0


def visibility_window(config: AfsharConfig) -> tuple[float, float]:
    half = VISIBILITY_FRINGES / 2 * config.fringe_spacing
    return (-half, half)


def minima_search_window(config: AfsharConfig) -> tuple[float, float]:
    half = min(config.wavelength * config.z1 / config.slit_width, 0.9 * config.usable_half_width)
    return (-half, half)


@lru_cache(maxsize=32)
def _sigma1_both(config: AfsharConfig) -> tuple[wf.IntensityProfile, float]:
    field, spill = propagate_guarded(build_slit_field(config, SlitState.BOTH), config.z1, config)
    return wf.intensity(field), spill


def wire_centers(config: AfsharConfig) -> list[float]:
    if config.wire_count == 0:
        return []
    profile, _ = _sigma1_both(config)
    minima = wf.find_minima(profile, minima_search_window(config), WIRE_DEPTH_THRESHOLD)
    if len(minima) < config.wire_count:
        raise InsufficientFringesError(
            f"only {len(minima)} interference minima in the search window, {config.wire_count} wires requested"
        )
    nearest = sorted(minima, key=lambda m: (abs(m), m))[: config.wire_count]
    return sorted(nearest)


def place_wires(config: AfsharConfig) -> list[tuple[float, float]]:
    """Wire intervals of width ``wire_width`` centred on the minima nearest the axis."""
    half = config.wire_width / 2
    return [(c - half, c + half) for c in wire_centers(config)]


@dataclass(frozen=True, eq=False)
class ScenarioResult:
    slits: SlitState
    grid_on: bool
    sigma1_profile: wf.IntensityProfile
    image_profile: wf.IntensityProfile
    visibility: float
    transmitted_visibility: float
    blocked_fraction: float
    flux_upper: float
    flux_lower: float
    spill: float
    minima_positions: list[float] = field(default_factory=list)
    wire_positions: list[float] = field(default_factory=list)

    @property
    def fractions(self) -> dict[str, float]:
        return {
            "U'": self.flux_upper,
            "L'": self.flux_lower,
            "blocked": self.blocked_fraction,
            "spill": self.spill,
        }

    @property
    def closure(self) -> float:
        return sum(self.fractions.values())

    @property
    def detected_upper_share(self) -> float:
        return self.flux_upper / (self.flux_upper + self.flux_lower)

    def summary(self) -> dict:
        return {
            "slits": self.slits.value,
            "grid_on": self.grid_on,
            "visibility": self.visibility,
            "transmitted_visibility": self.transmitted_visibility,
            "blocked_fraction": self.blocked_fraction,
            "flux_U_prime": self.flux_upper,
            "flux_L_prime": self.flux_lower,
            "spill": self.spill,
            "closure": self.closure,
            "minima_positions": list(self.minima_positions),
            "wire_positions": list(self.wire_positions),
        }


def _safe_visibility(profile: wf.IntensityProfile, window) -> float:
    try:
        return fringe_visibility(profile, window)
    except InsufficientFringesError:
        return 0.0


def run_scenario(config: AfsharConfig, slits: SlitState, grid_on: bool) -> ScenarioResult:
    """Slits -> sigma1 (grid) -> lens -> image plane, with full power accounting."""
    field = build_slit_field(config, slits)
    field, spill = propagate_guarded(field, config.z1, config)
    sigma1 = wf.intensity(field)
    vis_window = visibility_window(config)
    visibility = _safe_visibility(sigma1, vis_window)
    minima = wf.find_minima(sigma1, minima_search_window(config), WIRE_DEPTH_THRESHOLD)

    blocked = 0.0
    centers: list[float] = []
    transmitted_visibility = visibility
    if grid_on:
        centers = wire_centers(config)
        half = config.wire_width / 2
        before = wf.total_power(field)
        field = wf.apply_mask(field, wf.Mask.strips(field, [(c - half, c + half) for c in centers]))
        blocked = before - wf.total_power(field)
        transmitted_visibility = _safe_visibility(wf.intensity(field), vis_window)

    field, s = propagate_guarded(field, config.z2, config)
    spill += s
    field = wf.thin_lens(field, config.focal_length)
    field, s = propagate_guarded(field, config.detector_plane, config)
    spill += s
    if spill > MAX_SPILL:
        raise WindowTooSmallError(
            f"{spill:.1%} of the power reached the guard bands (limit {MAX_SPILL:.0%}); enlarge window_extent"
        )

    image = wf.intensity(field)
    x = image.x
    # a sample lying on the boundary is shared equally, keeping the split mirror-symmetric
    on_edge = np.abs(x - config.detector_boundary) < 1e-9 * image.grid_spacing
    w_below = np.where(on_edge, 0.5, (x < config.detector_boundary).astype(float))
    p_below = float(np.sum(image.values * w_below) * image.grid_spacing)
    p_above = float(np.sum(image.values * (1.0 - w_below)) * image.grid_spacing)
    # real image is inverted: the upper slit lands below the boundary when M < 0
    upper_lands_below = config.magnification * config.slit_separation / 2 < config.detector_boundary
    flux_u, flux_l = (p_below, p_above) if upper_lands_below else (p_above, p_below)

    return ScenarioResult(
        slits=slits,
        grid_on=grid_on,
        sigma1_profile=sigma1,
        image_profile=image,
        visibility=visibility,
        transmitted_visibility=transmitted_visibility,
        blocked_fraction=float(blocked),
        flux_upper=flux_u,
        flux_lower=flux_l,
        spill=float(spill),
        minima_positions=minima,
        wire_positions=centers,
    )


def sample_photons(result: ScenarioResult, n: int, seed: int = 42, workers: int = 1) -> dict[str, int]:
    """Multinomial detection tallies for ``n`` photons; deterministic per seed."""
    if n < 1:
        raise InvalidParameterError("need at least one photon")
    return sample_fractions(result.fractions, n, seed, workers)


def sample_fractions(fractions: dict[str, float], n: int, seed: int = 42, workers: int = 1) -> dict[str, int]:
    keys = list(fractions)
    p = np.clip(np.array([fractions[k] for k in keys], dtype=float), 0.0, None)
    p = p / p.sum()
    counts = map_blocks(lambda rng, size: rng.multinomial(size, p), n, seed, workers)
    total = np.sum(counts, axis=0)
    return {k: int(c) for k, c in zip(keys, total)}


def with_overrides(config: AfsharConfig, **changes) -> AfsharConfig:
    return replace(config, **changes)
