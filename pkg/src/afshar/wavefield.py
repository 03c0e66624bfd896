"""Scalar monochromatic 1-D wavefields.

Fields live on a uniform periodic grid of ``N`` samples (``N`` a power of
two) with spacing ``dx``; sample ``j`` sits at
``center_offset + (j - N // 2) * dx``.  With that convention the reflection
``x -> -x`` about the grid centre maps sample ``j`` to ``(N - j) % N``
exactly, which keeps symmetric inputs symmetric through every FFT.

Amplitudes use a sqrt(power / length) convention, so
``total_power = sum(|u|**2) * dx``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import AlignmentError, InvalidFieldError, InvalidParameterError

ABSORPTIVE = "absorptive-binary"
PHASE = "phase"


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


def grid_positions(n: int, dx: float, center_offset: float = 0.0) -> NDArray[np.float64]:
    return center_offset + (np.arange(n) - n // 2) * dx


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex amplitude sampled on a uniform transverse grid."""

    samples: NDArray[np.complex128]
    grid_spacing: float
    wavelength: float
    center_offset: float = 0.0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or not _is_power_of_two(samples.size):
            raise InvalidFieldError(
                f"sample count must be a power of two >= 2, got shape {samples.shape}"
            )
        if not np.all(np.isfinite(samples)):
            raise InvalidFieldError("field contains NaN or Inf samples")
        if not (self.grid_spacing > 0 and np.isfinite(self.grid_spacing)):
            raise InvalidFieldError(f"grid_spacing must be positive, got {self.grid_spacing}")
        if not (self.wavelength > 0 and np.isfinite(self.wavelength)):
            raise InvalidFieldError(f"wavelength must be positive, got {self.wavelength}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def x(self) -> NDArray[np.float64]:
        return grid_positions(self.n, self.grid_spacing, self.center_offset)

    @property
    def extent(self) -> float:
        return self.n * self.grid_spacing

    def with_samples(self, samples) -> "ComplexField":
        return ComplexField(samples, self.grid_spacing, self.wavelength, self.center_offset)

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self, other)
        return self.with_samples(self.samples + other.samples)

    def __mul__(self, scalar: complex) -> "ComplexField":
        return self.with_samples(self.samples * scalar)

    __rmul__ = __mul__

    def reflected(self) -> "ComplexField":
        """Mirror image about the grid centre (x -> -x)."""
        return self.with_samples(np.roll(self.samples[::-1], 1))


@dataclass(frozen=True, eq=False)
class Mask:
    """Pointwise transmission aligned to a field grid."""

    kind: str
    transmission: NDArray[np.complex128]
    grid_spacing: float
    center_offset: float = 0.0

    def __post_init__(self):
        t = np.array(self.transmission, dtype=np.complex128)
        if self.kind not in (ABSORPTIVE, PHASE):
            raise InvalidParameterError(f"unknown mask kind {self.kind!r}")
        if np.any(np.abs(t) > 1 + 1e-12):
            raise InvalidParameterError("mask transmission must satisfy |t| <= 1")
        if self.kind == ABSORPTIVE and not np.all((t == 0) | (t == 1)):
            raise InvalidParameterError("absorptive-binary mask values must be 0 or 1")
        t.setflags(write=False)
        object.__setattr__(self, "transmission", t)

    @classmethod
    def strips(cls, like: ComplexField, intervals: Sequence[tuple[float, float]]) -> "Mask":
        """Opaque strips over each ``(lo, hi)`` interval; sample centres decide coverage."""
        x = like.x
        t = np.ones(like.n)
        for lo, hi in intervals:
            t[(x >= lo) & (x <= hi)] = 0.0
        return cls(ABSORPTIVE, t, like.grid_spacing, like.center_offset)

    @classmethod
    def ones(cls, like: ComplexField) -> "Mask":
        return cls(ABSORPTIVE, np.ones(like.n), like.grid_spacing, like.center_offset)


@dataclass(frozen=True, eq=False)
class IntensityProfile:
    values: NDArray[np.float64]
    grid_spacing: float
    center_offset: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if np.any(v < 0):
            raise InvalidFieldError("intensity values must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> NDArray[np.float64]:
        return grid_positions(self.values.size, self.grid_spacing, self.center_offset)

    def total(self) -> float:
        return float(np.sum(self.values) * self.grid_spacing)

    def window(self, lo: float, hi: float) -> tuple[NDArray, NDArray]:
        x = self.x
        sel = (x >= lo) & (x <= hi)
        return x[sel], self.values[sel]


def _check_same_grid(a, b):
    if a.samples.size != b.samples.size or not np.isclose(a.grid_spacing, b.grid_spacing, rtol=1e-12, atol=0) \
            or not np.isclose(a.center_offset, b.center_offset, rtol=0, atol=1e-6 * a.grid_spacing):
        raise AlignmentError("fields are not on the same grid")


def spatial_frequencies(n: int, dx: float) -> NDArray[np.float64]:
    return np.fft.fftfreq(n, d=dx)


def transfer_function(n: int, dx: float, wavelength: float, distance: float) -> NDArray[np.complex128]:
    """Angular-spectrum propagator with the exp(ikz) carrier removed.

    The phase ``2*pi*z*(sqrt(1/lambda^2 - f^2) - 1/lambda)`` is evaluated in the
    cancellation-free form ``-2*pi*z*lambda*f^2 / (1 + sqrt(1 - (lambda*f)^2))``.
    Evanescent components (|f| > 1/lambda) are zeroed.
    """
    f = spatial_frequencies(n, dx)
    s = (wavelength * f) ** 2
    prop = s < 1.0
    root = np.sqrt(np.where(prop, 1.0 - s, 0.0))
    phase = -2 * np.pi * distance * wavelength * f**2 / (1.0 + root)
    return np.where(prop, np.exp(1j * phase), 0.0)


def propagate(field: ComplexField, distance: float) -> ComplexField:
    """Free-space propagation over ``distance`` by the angular-spectrum method."""
    if not distance >= 0:
        raise InvalidParameterError(f"propagation distance must be >= 0, got {distance}")
    if distance == 0:
        return field
    h = transfer_function(field.n, field.grid_spacing, field.wavelength, distance)
    return field.with_samples(np.fft.ifft(np.fft.fft(field.samples) * h))


def apply_mask(field: ComplexField, mask: Mask) -> ComplexField:
    if mask.transmission.size != field.n or not np.isclose(mask.grid_spacing, field.grid_spacing, rtol=1e-12, atol=0) \
            or not np.isclose(mask.center_offset, field.center_offset, rtol=0, atol=1e-6 * field.grid_spacing):
        raise AlignmentError("mask grid does not match field grid")
    return field.with_samples(field.samples * mask.transmission)


def thin_lens(field: ComplexField, focal_length: float) -> ComplexField:
    """Ideal thin lens: quadratic phase exp(-i*pi*x^2 / (lambda*f)) about the grid centre."""
    if focal_length == 0 or not np.isfinite(focal_length):
        raise InvalidParameterError("focal length must be finite and non-zero")
    r = field.x - field.center_offset
    return field.with_samples(field.samples * np.exp(-1j * np.pi * r**2 / (field.wavelength * focal_length)))


def intensity(field: ComplexField) -> IntensityProfile:
    return IntensityProfile(np.abs(field.samples) ** 2, field.grid_spacing, field.center_offset)


def total_power(field: ComplexField) -> float:
    return float(np.sum(np.abs(field.samples) ** 2) * field.grid_spacing)


def normalized(field: ComplexField, power: float = 1.0) -> ComplexField:
    p = total_power(field)
    if p == 0:
        raise InvalidFieldError("cannot normalize a zero field")
    return field * np.sqrt(power / p)


def inner_product(a: ComplexField, b: ComplexField) -> complex:
    """<a|b> with the grid measure."""
    _check_same_grid(a, b)
    return complex(np.vdot(a.samples, b.samples) * a.grid_spacing)


def find_minima(
    profile: IntensityProfile,
    search_window: tuple[float, float],
    depth_threshold: float = 0.1,
) -> list[float]:
    """Positions of deep local minima inside ``search_window``, ascending.

    A sample counts as a minimum if it is no higher than its left neighbour and
    strictly lower than its right one, and its value is below
    ``depth_threshold`` times the lower of the two nearest local maxima (searched
    over the whole profile, so edge fringes are judged fairly).  Positions are
    refined with a 3-point parabola.
    """
    lo, hi = search_window
    if not hi > lo:
        raise InvalidParameterError(f"empty search window {search_window}")
    if not 0 < depth_threshold < 1:
        raise InvalidParameterError("depth_threshold must lie in (0, 1)")
    v = profile.values
    x = profile.x
    n = v.size
    inside = np.flatnonzero((x >= lo) & (x <= hi))
    if inside.size < 3:
        raise InvalidParameterError("search window covers fewer than 3 samples")
    i0 = max(int(inside[0]), 1)
    i1 = min(int(inside[-1]), n - 2)
    idx = np.arange(i0, i1 + 1)
    cand = idx[(v[idx] <= v[idx - 1]) & (v[idx] < v[idx + 1])]

    # nearest local maximum on each side: climb while the profile rises
    out = []
    for i in cand:
        left = i
        while left > 0 and v[left - 1] >= v[left]:
            left -= 1
        right = i
        while right < n - 1 and v[right + 1] >= v[right]:
            right += 1
        neighbour_max = min(v[left], v[right])
        if not v[i] < depth_threshold * neighbour_max:
            continue
        a, b, c = v[i - 1], v[i], v[i + 1]
        curv = a - 2 * b + c
        shift = 0.5 * (a - c) / curv if curv > 0 else 0.0
        out.append(float(x[i] + shift * profile.grid_spacing))
    return sorted(out)
