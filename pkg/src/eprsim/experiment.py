"""End-to-end runs of the gedanken experiment.

A run builds the entangled pair state, optionally applies one of
Alice's measurements, pushes Bob's side through the direction-filter /
double-slit train, and reports screen patterns.  Singles patterns can
be computed three ways that must agree: from the reduced density
matrix, or as the weighted mixture of either collapse ensemble.  The
quantitative comparison of the position-basis and momentum-basis
singles is the package's answer to the signaling question.

Density matrices are pushed through the train as M rho M^dagger with
no renormalization, so ``total_weight`` always means physical flux;
only coincidence patterns (which condition on detection) renormalize.
"""

from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.ndimage import uniform_filter1d
from scipy.signal import find_peaks

from .entangle import (
    DensityMatrix,
    ConditionalEnsemble,
    alice_measure_momentum,
    alice_measure_position,
    build_epr_state,
    ensemble_to_density,
    reduce_to_bob,
)
from .grids import Field, Grid, make_grid, norm2
from .optics import (
    BlockOutsideAperture,
    DoubleSlit,
    FreeSpace,
    Lens,
    OpticalTrain,
    Pinhole,
    Tilt,
    _train_array,
    filter_validity,
    validate_sampling,
)

__all__ = [
    "ExperimentConfig",
    "Pattern",
    "DetectionRecord",
    "NoSignalingDistance",
    "bob_train",
    "pattern_from_pure",
    "pattern_from_density",
    "mixture_pattern",
    "singles_pattern",
    "coincidence_patterns",
    "momentum_acceptance",
    "fringe_visibility",
    "fringe_spacing",
    "default_fringe_window",
    "no_signaling_distance",
    "monte_carlo_detect",
]

_BASES = ("position", "momentum", "none")


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs of one experiment, SI units throughout.

    ``alice_basis`` selects what happens on Alice's side before Bob's
    photon is analyzed: "position", "momentum", or "none" for the
    source-only density-matrix path.  ``n_photons = 0`` disables the
    Monte Carlo detection stage.
    """

    n: int = 1024
    dy: float = 1.0e-5
    wavelength: float = 633e-9
    sigma_plus: float = 1.0e-3
    sigma_minus: float = 5.0e-5
    y0: float = 0.0
    theta: float = 2.5e-3
    focal: float = 0.1
    pinhole_radius: float = 2.5e-5
    aperture_radius: float = 2.5e-3
    slit_separation: float = 2.0e-4
    slit_width: float = 4.0e-5
    screen_distance: float = 0.15
    alice_basis: str = "none"
    n_photons: int = 0
    seed: int = 12345

    def validate(self):
        """Raise ValueError naming the offending field; return self."""
        positive = (
            "dy",
            "wavelength",
            "sigma_plus",
            "sigma_minus",
            "focal",
            "pinhole_radius",
            "aperture_radius",
            "slit_separation",
            "slit_width",
            "screen_distance",
        )
        for name in positive:
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        for name in ("y0", "theta"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.slit_separation <= self.slit_width:
            raise ValueError(
                f"slit separation must exceed slit width, got "
                f"{self.slit_separation!r} <= {self.slit_width!r}"
            )
        if self.sigma_plus < self.sigma_minus:
            raise ValueError("sigma_plus must be >= sigma_minus")
        if self.alice_basis not in _BASES:
            raise ValueError(f"alice_basis must be one of {_BASES}, got {self.alice_basis!r}")
        if self.n_photons < 0:
            raise ValueError(f"n_photons must be >= 0, got {self.n_photons!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        make_grid(self.n, self.dy)  # power-of-two / spacing checks
        return self

    def grid(self) -> Grid:
        return make_grid(self.n, self.dy)

    def joint_state(self):
        g = self.grid()
        return build_epr_state(g, g, self.sigma_plus, self.sigma_minus, self.y0)

    def filter_validity(self):
        return filter_validity(
            self.theta,
            self.focal,
            self.pinhole_radius,
            self.aperture_radius,
            self.slit_separation,
            self.wavelength,
        )

    def with_updates(self, **kw):
        return replace(self, **kw)

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class Pattern:
    """Screen intensity in probability per meter, plus the flux reaching it."""

    grid: Grid
    intensity: np.ndarray
    total_weight: float

    def __post_init__(self):
        inten = np.asarray(self.intensity, dtype=np.float64)
        if inten.shape != (self.grid.n,):
            raise ValueError(f"intensity must have shape ({self.grid.n},), got {inten.shape}")
        if not np.all(np.isfinite(inten)):
            raise ValueError("intensity contains NaN or Inf")
        if inten.min() < -1e-12:
            raise ValueError(f"intensity must be nonnegative, min {inten.min()!r}")
        inten = np.maximum(inten, 0.0)
        total = float(inten.sum() * self.grid.dy)
        if abs(total - self.total_weight) > 1e-8:
            raise ValueError(
                f"total_weight {self.total_weight!r} inconsistent with intensity sum {total!r}"
            )
        inten.flags.writeable = False
        object.__setattr__(self, "intensity", inten)
        object.__setattr__(self, "total_weight", float(self.total_weight))


def _pattern(grid, intensity):
    intensity = np.maximum(np.asarray(intensity, dtype=np.float64), 0.0)
    return Pattern(grid, intensity, float(intensity.sum() * grid.dy))


@dataclass(frozen=True)
class DetectionRecord:
    """Monte Carlo photon hits on the screen, reproducible per seed."""

    seed: int
    n_emitted: int
    n_detected: int
    hits: np.ndarray

    def __post_init__(self):
        hits = np.asarray(self.hits, dtype=np.float64)
        if hits.shape != (self.n_detected,) or self.n_detected > self.n_emitted:
            raise ValueError("detection record shapes are inconsistent")
        hits = hits.copy()
        hits.flags.writeable = False
        object.__setattr__(self, "hits", hits)


@dataclass(frozen=True)
class NoSignalingDistance:
    l1: float
    linf: float


def bob_train(cfg: ExperimentConfig) -> OpticalTrain:
    """Assemble Bob's apparatus: direction filter, double slit, screen leg.

    The tilt is kept even at theta = 0 so the train shape is uniform.
    Geometry problems raise; sampling quality is a report, not an error
    (see :func:`eprsim.optics.validate_sampling`).
    """
    cfg.validate()
    return OpticalTrain(
        (
            Tilt(cfg.theta),
            BlockOutsideAperture(cfg.aperture_radius),
            Lens(cfg.focal),
            FreeSpace(cfg.focal),
            Pinhole(cfg.pinhole_radius),
            FreeSpace(cfg.focal),
            Lens(cfg.focal),
            DoubleSlit(cfg.slit_separation, cfg.slit_width),
            FreeSpace(cfg.screen_distance),
        ),
        cfg.wavelength,
    )


def pattern_from_pure(psi: Field, train: OpticalTrain) -> Pattern:
    """Push one pure state through the train; intensity is |out|^2."""
    out = _train_array(np.asarray(psi.amp), psi.grid, train)
    return _pattern(psi.grid, np.abs(out) ** 2)


def pattern_from_density(rho: DensityMatrix, train: OpticalTrain) -> Pattern:
    """Push a density matrix through the train as M rho M^dagger.

    The train is applied to the columns of rho and then to the columns
    of the conjugate transpose (O(n^2 log n) per element); the screen
    intensity is the resulting diagonal.  No renormalization: lost flux
    shows up as total_weight < trace_weight of the input.
    """
    g = rho.grid
    half = _train_array(np.asarray(rho.rho), g, train)
    pushed = _train_array(half.conj().T, g, train)
    diag = np.real(np.diagonal(pushed))
    if diag.min() < -1e-10:
        raise ValueError(f"pushforward produced negative probability {diag.min()!r}")
    return _pattern(g, diag)


def mixture_pattern(e: ConditionalEnsemble, train: OpticalTrain, subset=None,
                    renormalize=False) -> Pattern:
    """Weighted incoherent sum of member patterns, in one matrix pass.

    ``subset`` restricts to the given member indices; ``renormalize``
    divides by the selected weight (conditioning on selection).
    """
    states = np.asarray(e.states)
    weights = np.asarray(e.weights)
    if subset is not None:
        subset = np.asarray(subset, dtype=np.intp)
        if subset.size == 0:
            raise ValueError("empty ensemble subset")
        states = states[:, subset]
        weights = weights[subset]
    out = _train_array(states, e.grid, train)
    intensity = (np.abs(out) ** 2 * weights[None, :]).sum(axis=1)
    if renormalize:
        intensity = intensity / weights.sum()
    return _pattern(e.grid, intensity)


def _measure(j, basis):
    if basis == "position":
        return alice_measure_position(j)
    if basis == "momentum":
        return alice_measure_momentum(j)
    raise ValueError(f"unknown basis {basis!r}")


def singles_pattern(cfg: ExperimentConfig) -> Pattern:
    """Bob's unconditional screen pattern for the configured Alice basis.

    "none" pushes the reduced density matrix; "position" / "momentum"
    mix the corresponding collapse ensemble.  All three agree to
    numerical precision, which is the no-signaling statement.
    """
    cfg.validate()
    j = cfg.joint_state()
    train = bob_train(cfg)
    if cfg.alice_basis == "none":
        return pattern_from_density(reduce_to_bob(j), train)
    return mixture_pattern(_measure(j, cfg.alice_basis), train)


def momentum_acceptance(cfg: ExperimentConfig):
    """Predicate selecting Alice momenta whose partners pass the filter.

    The filter accepts Bob wavenumbers within k*h/f of k*theta; by the
    pair anticorrelation that corresponds to k_a within k*h/f of
    -k*theta.
    """
    k = 2.0 * np.pi / cfg.wavelength
    center = -k * cfg.theta
    half = k * cfg.pinhole_radius / cfg.focal
    return lambda ka: abs(ka - center) <= half


def coincidence_patterns(cfg: ExperimentConfig, outcome_filter):
    """Bob's pattern conditioned on Alice outcomes passing the filter.

    Returns ``(pattern, selected_fraction)`` where the pattern is
    renormalized by the selected weight.  Raises if the filter selects
    nothing or if ``alice_basis`` is "none".
    """
    cfg.validate()
    if cfg.alice_basis == "none":
        raise ValueError("coincidence patterns need alice_basis 'position' or 'momentum'")
    j = cfg.joint_state()
    e = _measure(j, cfg.alice_basis)
    mask = np.fromiter((bool(outcome_filter(o)) for o in e.outcomes), dtype=bool,
                       count=len(e))
    if not mask.any():
        raise ValueError("no coincidences: outcome filter selected no ensemble member")
    selected = float(np.asarray(e.weights)[mask].sum())
    pattern = mixture_pattern(e, bob_train(cfg), subset=np.flatnonzero(mask),
                              renormalize=True)
    return pattern, selected


def _window_slice(p, window):
    lo, hi = window
    y = p.grid.coords
    sel = (y >= lo) & (y <= hi)
    if not sel.any():
        raise ValueError("window contains no grid points")
    return y[sel], p.intensity[sel]


def _detrended(inten):
    """Divide out the slow envelope; returns (values, offset) or None.

    The fringe period is estimated from raw local maxima; the envelope
    is a moving average over one period.  None means no periodic
    structure was resolved.
    """
    span = inten.max() - inten.min()
    if span <= 0.0:
        return None
    raw_peaks, _ = find_peaks(inten, prominence=0.02 * span)
    if raw_peaks.size < 2:
        return None
    period = int(round(float(np.median(np.diff(raw_peaks)))))
    if period < 2 or period >= inten.size:
        return None
    env = uniform_filter1d(inten, size=period, mode="nearest")
    margin = period // 2 + 1
    if inten.size <= 2 * margin:
        return None
    core = slice(margin, inten.size - margin)
    env_core = env[core]
    floor = 1e-12 * inten.max()
    d = inten[core] / np.maximum(env_core, floor)
    d[env_core <= floor] = 0.0
    return d, margin


def fringe_visibility(p: Pattern, window) -> float:
    """(I_max - I_min)/(I_max + I_min) of the detrended pattern in a window.

    Local extrema are taken after dividing out the single-fringe moving
    average, so the slit-diffraction envelope does not deflate the
    contrast.  A window with no resolved oscillation reports 0.
    """
    _, inten = _window_slice(p, window)
    if inten.max() <= 0.0:
        raise ValueError("pattern is zero everywhere in the window")
    det = _detrended(inten)
    if det is None:
        return 0.0
    d, _ = det
    hi_idx, _ = find_peaks(d)
    lo_idx, _ = find_peaks(-d)
    if hi_idx.size == 0 or lo_idx.size == 0:
        return 0.0
    imax = float(d[hi_idx].max())
    imin = float(d[lo_idx].min())
    if imax + imin <= 0.0:
        return 0.0
    return float(np.clip((imax - imin) / (imax + imin), 0.0, 1.0))


def _parabolic_vertex(y, v, i):
    # three-point parabola through (y[i-1..i+1], v[i-1..i+1])
    denom = v[i - 1] - 2.0 * v[i] + v[i + 1]
    if denom == 0.0:
        return y[i]
    shift = 0.5 * (v[i - 1] - v[i + 1]) / denom
    return y[i] + shift * (y[i + 1] - y[i])


def fringe_spacing(p: Pattern, window) -> float:
    """Mean distance between adjacent detrended fringe peaks in a window."""
    y, inten = _window_slice(p, window)
    if inten.max() <= 0.0:
        raise ValueError("pattern is zero everywhere in the window")
    det = _detrended(inten)
    if det is None:
        raise ValueError("no fringes resolved in the window")
    d, margin = det
    yc = y[margin:margin + d.size]
    idx, _ = find_peaks(d, prominence=0.05 * (d.max() - d.min() if d.max() > d.min() else 1.0))
    idx = idx[(idx > 0) & (idx < d.size - 1)]
    if idx.size < 2:
        raise ValueError("fewer than two fringe peaks in the window")
    positions = np.array([_parabolic_vertex(yc, d, i) for i in idx])
    return float(np.mean(np.diff(np.sort(positions))))


def default_fringe_window(cfg: ExperimentConfig):
    """Window around the screen axis whose detrended core spans the
    central three fringes (the outer ~0.6 fringe is margin consumed by
    the envelope estimate)."""
    spacing = cfg.wavelength * cfg.screen_distance / cfg.slit_separation
    half = 2.2 * spacing
    return (-half, half)


def no_signaling_distance(cfg: ExperimentConfig) -> NoSignalingDistance:
    """L1 and Linf distance between Bob's singles for Alice's two bases.

    Both patterns are computed on the deterministic density-matrix path
    (collapse ensemble mixed back into a density matrix, then pushed
    through the train), so the comparison has no sampling noise.
    """
    cfg.validate()
    j = cfg.joint_state()
    train = bob_train(cfg)
    p_pos = pattern_from_density(ensemble_to_density(alice_measure_position(j)), train)
    p_mom = pattern_from_density(ensemble_to_density(alice_measure_momentum(j)), train)
    diff = p_pos.intensity - p_mom.intensity
    return NoSignalingDistance(
        l1=float(np.abs(diff).sum() * cfg.dy),
        linf=float(np.abs(diff).max()),
    )


def monte_carlo_detect(p: Pattern, n_photons, seed) -> DetectionRecord:
    """Sample photon hits from a pattern; identical seeds give identical hits.

    The detected count is Binomial(n_photons, total_weight); hit
    coordinates are drawn from the normalized intensity, uniform within
    each grid cell.
    """
    if n_photons <= 0:
        raise ValueError(f"n_photons must be positive, got {n_photons!r}")
    rng = np.random.default_rng(seed)
    weight = min(max(p.total_weight, 0.0), 1.0)
    n_detected = int(rng.binomial(n_photons, weight)) if weight > 0.0 else 0
    if n_detected == 0:
        hits = np.empty(0, dtype=np.float64)
    else:
        mass = p.intensity * p.grid.dy
        prob = mass / mass.sum()
        cells = rng.choice(p.grid.n, size=n_detected, p=prob)
        jitter = rng.uniform(-0.5 * p.grid.dy, 0.5 * p.grid.dy, size=n_detected)
        hits = p.grid.coords[cells] + jitter
    return DetectionRecord(seed=int(seed), n_emitted=int(n_photons),
                           n_detected=n_detected, hits=hits)
