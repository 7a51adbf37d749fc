"""Thin optical elements and paraxial free-space propagation.

Every element of the double-lens direction filter and the double-slit
interferometer acts as an operator on a sampled Field: lenses and tilts
are pointwise phase factors, masks are binary transmission functions,
and free space is the paraxial angular-spectrum transfer function
``exp(i k L) * exp(-i k_y^2 L / (2 k))``.

All operations are pure; masks report the transmitted probability
fraction alongside the output field.  Off-axis light removed by a mask
is treated as absorbed and never re-enters.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .grids import Field, Grid, norm2

__all__ = [
    "Lens",
    "FreeSpace",
    "HardAperture",
    "Pinhole",
    "DoubleSlit",
    "Tilt",
    "BlockOutsideAperture",
    "Element",
    "OpticalTrain",
    "FilterValidity",
    "SamplingReport",
    "apply_lens",
    "propagate",
    "apply_mask",
    "apply_tilt",
    "apply_element",
    "apply_train",
    "direction_filter",
    "filter_validity",
    "validate_sampling",
    "mask_transmission",
]


@dataclass(frozen=True)
class Lens:
    """Thin lens of focal length ``focal`` (meters, nonzero)."""

    focal: float

    def __post_init__(self):
        if not np.isfinite(self.focal) or self.focal == 0.0:
            raise ValueError("lens focal length must be finite and nonzero")


@dataclass(frozen=True)
class FreeSpace:
    """Paraxial free-space leg of length ``distance`` >= 0 meters."""

    distance: float

    def __post_init__(self):
        if not np.isfinite(self.distance) or self.distance < 0.0:
            raise ValueError("propagation distance must be >= 0")


@dataclass(frozen=True)
class HardAperture:
    """Binary slot passing |y - center| <= halfwidth."""

    halfwidth: float
    center: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.halfwidth) or self.halfwidth <= 0.0:
            raise ValueError("aperture halfwidth must be positive")


@dataclass(frozen=True)
class Pinhole:
    """Small hole of the given radius, used at a focal plane."""

    radius: float
    center: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0.0:
            raise ValueError("pinhole radius must be positive")


@dataclass(frozen=True)
class DoubleSlit:
    """Two slits of width ``width`` centered at +/- separation/2."""

    separation: float
    width: float

    def __post_init__(self):
        if not (np.isfinite(self.separation) and np.isfinite(self.width)):
            raise ValueError("slit geometry must be finite")
        if not (self.separation > self.width > 0.0):
            raise ValueError("double slit requires separation > width > 0")


@dataclass(frozen=True)
class Tilt:
    """Frame change into an axis inclined by ``angle`` radians (paraxial)."""

    angle: float

    def __post_init__(self):
        if not np.isfinite(self.angle):
            raise ValueError("tilt angle must be finite")


@dataclass(frozen=True)
class BlockOutsideAperture:
    """Shield passing only |y| <= radius (a lens entrance aperture)."""

    radius: float

    def __post_init__(self):
        if not np.isfinite(self.radius) or self.radius <= 0.0:
            raise ValueError("aperture radius must be positive")


Element = Union[Lens, FreeSpace, HardAperture, Pinhole, DoubleSlit, Tilt, BlockOutsideAperture]

_MASKS = (HardAperture, Pinhole, DoubleSlit, BlockOutsideAperture)


@dataclass(frozen=True)
class OpticalTrain:
    """Ordered sequence of elements with a design wavelength (meters)."""

    elements: tuple
    wavelength: float

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if not np.isfinite(self.wavelength) or self.wavelength <= 0.0:
            raise ValueError("design wavelength must be positive")


# ---------------------------------------------------------------------------
# array-level kernels; amp may be (n,) or (n, m) with the grid along axis 0
# ---------------------------------------------------------------------------

def _colvec(x, ndim):
    return x if ndim == 1 else x[:, None]


def _lens_array(amp, grid, focal, wavelength):
    k = 2.0 * np.pi / wavelength
    phase = np.exp(-0.5j * k * grid.coords**2 / focal)
    return amp * _colvec(phase, amp.ndim)


def _tilt_array(amp, grid, angle, wavelength):
    k = 2.0 * np.pi / wavelength
    ramp = np.exp(-1j * k * angle * grid.coords)
    return amp * _colvec(ramp, amp.ndim)


def _propagate_array(amp, grid, distance, wavelength):
    if distance == 0.0:
        return amp.copy()
    k = 2.0 * np.pi / wavelength
    ky = 2.0 * np.pi * np.fft.fftfreq(grid.n, grid.dy)
    h = np.exp(1j * k * distance) * np.exp(-0.5j * ky**2 * distance / k)
    spec = np.fft.fft(np.fft.ifftshift(amp, axes=0), axis=0)
    out = np.fft.ifft(spec * _colvec(h, amp.ndim), axis=0)
    return np.fft.fftshift(out, axes=0)


def mask_transmission(mask, grid):
    """Binary (0/1) transmission samples of a mask element on a grid."""
    y = grid.coords
    if isinstance(mask, HardAperture):
        t = np.abs(y - mask.center) <= mask.halfwidth
    elif isinstance(mask, Pinhole):
        t = np.abs(y - mask.center) <= mask.radius
    elif isinstance(mask, BlockOutsideAperture):
        t = np.abs(y) <= mask.radius
    elif isinstance(mask, DoubleSlit):
        t = (np.abs(y - 0.5 * mask.separation) <= 0.5 * mask.width) | (
            np.abs(y + 0.5 * mask.separation) <= 0.5 * mask.width
        )
    else:
        raise TypeError(f"not a mask element: {mask!r}")
    return t.astype(np.float64)


def _element_array(amp, grid, elem, wavelength):
    if isinstance(elem, Lens):
        return _lens_array(amp, grid, elem.focal, wavelength)
    if isinstance(elem, FreeSpace):
        return _propagate_array(amp, grid, elem.distance, wavelength)
    if isinstance(elem, Tilt):
        return _tilt_array(amp, grid, elem.angle, wavelength)
    if isinstance(elem, _MASKS):
        return amp * _colvec(mask_transmission(elem, grid), amp.ndim)
    raise TypeError(f"unknown optical element: {elem!r}")


def _train_array(amp, grid, train):
    if not train.elements:
        raise ValueError("cannot apply an empty optical train")
    out = amp
    for elem in train.elements:
        out = _element_array(out, grid, elem, train.wavelength)
    return out


# ---------------------------------------------------------------------------
# public Field-level operations
# ---------------------------------------------------------------------------

def apply_lens(f: Field, focal, wavelength) -> Field:
    """Multiply by the thin-lens phase exp(-i k y^2 / (2 focal)).

    Norm-preserving.  A negative ``focal`` gives a diverging lens.
    """
    if focal == 0.0:
        raise ValueError("lens focal length must be nonzero")
    return Field(f.grid, _lens_array(f.amp, f.grid, focal, wavelength))


def propagate(f: Field, distance, wavelength) -> Field:
    """Free-space propagation by the paraxial angular-spectrum method.

    Unitary: ``norm2`` is preserved; ``distance = 0`` is the identity.
    The grid must satisfy the Fresnel sampling bound checked by
    :func:`validate_sampling` for the result to be trustworthy.
    """
    if distance < 0.0:
        raise ValueError("propagation distance must be >= 0")
    return Field(f.grid, _propagate_array(f.amp, f.grid, distance, wavelength))


def apply_tilt(f: Field, angle, wavelength) -> Field:
    """Rotate into a frame inclined by ``angle`` via the paraxial phase ramp.

    Shifts the spectrum by k*angle so that a plane wave traveling at the
    design angle becomes normal-incidence.  Norm-preserving.
    """
    return Field(f.grid, _tilt_array(f.amp, f.grid, angle, wavelength))


def apply_mask(f: Field, mask):
    """Apply a binary mask; returns ``(field, transmitted_fraction)``.

    The fraction is norm2(out)/norm2(in), defined as 0.0 for zero input.
    """
    out = Field(f.grid, f.amp * mask_transmission(mask, f.grid))
    before = norm2(f)
    fraction = norm2(out) / before if before > 0.0 else 0.0
    return out, fraction


def apply_element(f: Field, elem, wavelength):
    """Apply any single element; returns ``(field, transmitted_fraction)``."""
    out = Field(f.grid, _element_array(f.amp, f.grid, elem, wavelength))
    if isinstance(elem, _MASKS):
        before = norm2(f)
        return out, (norm2(out) / before if before > 0.0 else 0.0)
    return out, 1.0


def apply_train(f: Field, train: OpticalTrain):
    """Apply elements left to right; returns ``(field, transmitted_fraction)``."""
    out = Field(f.grid, _train_array(f.amp, f.grid, train))
    before = norm2(f)
    fraction = norm2(out) / before if before > 0.0 else 0.0
    return out, fraction


def direction_filter_train(angle, focal, pinhole_radius, aperture_radius, wavelength):
    """The lens-pinhole-lens composite that passes only rays near ``angle``."""
    return OpticalTrain(
        (
            Tilt(angle),
            BlockOutsideAperture(aperture_radius),
            Lens(focal),
            FreeSpace(focal),
            Pinhole(pinhole_radius),
            FreeSpace(focal),
            Lens(focal),
        ),
        wavelength,
    )


def direction_filter(f: Field, angle, focal, pinhole_radius, aperture_radius, wavelength):
    """Run a field through the direction filter.

    Composite of tilt, entrance aperture, lens, focal-plane pinhole and
    relay lens: plane waves within ~pinhole_radius/focal of the design
    angle emerge collimated; others focus off the hole and are absorbed.
    Returns ``(field, transmitted_fraction)``.
    """
    train = direction_filter_train(angle, focal, pinhole_radius, aperture_radius, wavelength)
    return apply_train(f, train)


@dataclass(frozen=True)
class FilterValidity:
    """Quality ratios for the direction filter's two smallness conditions.

    ``angular_tolerance`` is the accepted half-angle h/f.  The filter is
    considered effective when h/f is small against lambda/s (fringe
    smearing) and lambda is small against R (edge diffraction); both
    ratios must stay below ``threshold``.
    """

    angular_tolerance: float
    hf_ratio: float
    r_ratio: float
    passes_hf_condition: bool
    passes_r_condition: bool
    threshold: float

    @property
    def ok(self):
        return self.passes_hf_condition and self.passes_r_condition


def filter_validity(angle, focal, pinhole_radius, aperture_radius, slit_separation,
                    wavelength, threshold=0.1):
    """Evaluate the direction-filter validity conditions.

    The inequalities are strict "much less than" statements; the default
    acceptance threshold of 0.1 per ratio is recorded in the report so
    callers can tighten it.
    """
    for name, v in (("angle", angle), ("focal", focal), ("pinhole_radius", pinhole_radius),
                    ("aperture_radius", aperture_radius), ("slit_separation", slit_separation),
                    ("wavelength", wavelength)):
        if name != "angle" and (not np.isfinite(v) or v <= 0.0):
            raise ValueError(f"{name} must be positive")
    tol = pinhole_radius / focal
    hf_ratio = tol / (wavelength / slit_separation)
    r_ratio = wavelength / aperture_radius
    return FilterValidity(
        angular_tolerance=float(tol),
        hf_ratio=float(hf_ratio),
        r_ratio=float(r_ratio),
        passes_hf_condition=bool(hf_ratio <= threshold),
        passes_r_condition=bool(r_ratio <= threshold),
        threshold=float(threshold),
    )


@dataclass(frozen=True)
class SamplingReport:
    """Aliasing and resolution flags for a train on a given grid."""

    flags: tuple

    @property
    def ok(self):
        return not self.flags


def _min_mask_feature(mask):
    if isinstance(mask, HardAperture):
        return 2.0 * mask.halfwidth
    if isinstance(mask, Pinhole):
        return 2.0 * mask.radius
    if isinstance(mask, BlockOutsideAperture):
        return 2.0 * mask.radius
    if isinstance(mask, DoubleSlit):
        # both the open slit and the opaque bar between slits must resolve
        return min(mask.width, mask.separation - mask.width)
    raise TypeError(f"not a mask element: {mask!r}")


def validate_sampling(grid: Grid, train: OpticalTrain, wavelength=None) -> SamplingReport:
    """Report-only sampling check for every element of a train.

    Flags a free-space leg when the transfer-function phase advances by
    more than pi between adjacent samples at the grid edge (equivalent
    to L > n*dy^2/lambda), any mask feature narrower than 4 samples, and
    tilts beyond the paraxial comfort zone of 0.1 rad.
    """
    lam = train.wavelength if wavelength is None else wavelength
    k = 2.0 * np.pi / lam
    flags = []
    for i, elem in enumerate(train.elements):
        if isinstance(elem, FreeSpace) and elem.distance > 0.0:
            edge_step = 0.5 * grid.n * grid.dk**2 * elem.distance / k
            if edge_step > np.pi * (1.0 + 1e-12):
                limit = grid.n * grid.dy**2 / lam
                flags.append(
                    f"element {i} ({elem!r}): aliased Fresnel kernel, edge phase step "
                    f"{edge_step:.2f} rad > pi (L limit {limit:.4g} m)"
                )
        elif isinstance(elem, _MASKS):
            feature = _min_mask_feature(elem)
            if feature < 4.0 * grid.dy:
                flags.append(
                    f"element {i} ({elem!r}): under-resolved mask, feature "
                    f"{feature:.3g} m < 4 samples ({4.0 * grid.dy:.3g} m)"
                )
        elif isinstance(elem, Tilt) and abs(elem.angle) > 0.1:
            flags.append(
                f"element {i} ({elem!r}): tilt {elem.angle:.3g} rad beyond paraxial range 0.1"
            )
    return SamplingReport(tuple(flags))
