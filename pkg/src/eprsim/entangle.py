"""Two-photon transverse state algebra.

The ideal position-correlated / momentum-anticorrelated pair state is
not normalizable, so the simulator uses its standard regularization: a
two-width Gaussian

    Psi(y_a, y_b) ~ exp(-(y_a + y_b - y0)^2 / (4 sigma_plus^2))
                  * exp(-(y_a - y_b + y0)^2 / (4 sigma_minus^2))

whose sigma_minus -> 0, sigma_plus -> inf limit recovers the ideal
state.  The partner of a photon found at y_a sits near y_b = y_a + y0;
in the conjugate basis the pair satisfies k_b ~ -k_a.  Alice's two
measurement choices become discrete collapse ensembles: one conditional
Bob state per grid point (position) or per wavenumber bin (momentum).
Both ensembles reconstruct the same reduced density matrix, which is
the no-signaling statement at the state level.
"""

from dataclasses import dataclass

import numpy as np

from .grids import Field, Grid

__all__ = [
    "JointState",
    "DensityMatrix",
    "ConditionalEnsemble",
    "build_epr_state",
    "reduce_to_bob",
    "alice_measure_position",
    "alice_measure_momentum",
    "ensemble_to_density",
    "purity",
]


@dataclass(frozen=True)
class JointState:
    """Two-photon wavefunction Psi(y_a, y_b) on a pair of grids.

    ``amp[i, j]`` is Psi at (y_a = grid_a.coords[i], y_b = grid_b.coords[j]);
    the joint norm ``sum |amp|^2 dy_a dy_b`` is 1.
    """

    grid_a: Grid
    grid_b: Grid
    amp: np.ndarray
    sigma_plus: float
    sigma_minus: float
    y0: float

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=np.complex128)
        if amp.shape != (self.grid_a.n, self.grid_b.n):
            raise ValueError(
                f"joint amplitude must have shape ({self.grid_a.n}, {self.grid_b.n}), "
                f"got {amp.shape}"
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError("joint amplitude contains NaN or Inf")
        if not (self.sigma_plus >= self.sigma_minus > 0.0):
            raise ValueError("widths must satisfy sigma_plus >= sigma_minus > 0")
        total = self.norm()
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"joint state must be normalized, got norm {total!r}")
        amp = amp.copy()
        amp.flags.writeable = False
        object.__setattr__(self, "amp", amp)

    def norm(self):
        a = np.asarray(self.amp)
        return float(np.real(np.vdot(a, a)) * self.grid_a.dy * self.grid_b.dy)


@dataclass(frozen=True)
class DensityMatrix:
    """Bob's (possibly mixed) state rho(y_b, y_b') on a single grid.

    Hermitian by construction; the trace weight is 1 for a full state
    and drops below 1 only after lossy optics.
    """

    grid: Grid
    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=np.complex128)
        n = self.grid.n
        if rho.shape != (n, n):
            raise ValueError(f"density matrix must have shape ({n}, {n}), got {rho.shape}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("density matrix contains NaN or Inf")
        scale = max(1.0, float(np.abs(rho).max()))
        if float(np.abs(rho - rho.conj().T).max()) > 1e-12 * scale:
            raise ValueError("density matrix is not Hermitian within tolerance")
        rho = rho.copy()
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def trace_weight(self):
        """tr(rho) * dy; 1 for a trace-preserving history."""
        return float(np.real(np.trace(self.rho)) * self.grid.dy)

    @property
    def diagonal_intensity(self):
        """Position probability density rho(y, y) in 1/m."""
        return np.real(np.diag(self.rho)).copy()

    def min_eigenvalue(self):
        """Smallest eigenvalue times dy (positivity diagnostic)."""
        return float(np.linalg.eigvalsh(self.rho).min() * self.grid.dy)


@dataclass(frozen=True)
class ConditionalEnsemble:
    """Weighted conditional Bob states induced by one of Alice's bases.

    ``states[:, i]`` is the unit-normalized Bob field conditioned on
    outcome ``outcomes[i]`` (a position in meters or a transverse
    wavenumber in rad/m); ``weights`` are the outcome probabilities and
    sum to 1.
    """

    basis: str
    grid: Grid
    outcomes: np.ndarray
    weights: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if self.basis not in ("position", "momentum"):
            raise ValueError(f"basis must be 'position' or 'momentum', got {self.basis!r}")
        outcomes = np.asarray(self.outcomes, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        states = np.asarray(self.states, dtype=np.complex128)
        m = outcomes.size
        if weights.shape != (m,) or states.shape != (self.grid.n, m):
            raise ValueError("ensemble arrays have inconsistent shapes")
        if m == 0:
            raise ValueError("ensemble must have at least one member")
        if weights.min() < 0.0:
            raise ValueError("ensemble weights must be nonnegative")
        if abs(weights.sum() - 1.0) > 1e-10:
            raise ValueError(f"ensemble weights must sum to 1, got {weights.sum()!r}")
        norms = (np.abs(states) ** 2).sum(axis=0) * self.grid.dy
        if float(np.abs(norms - 1.0).max()) > 1e-8:
            raise ValueError("ensemble member states must be unit-normalized")
        for name, arr in (("outcomes", outcomes), ("weights", weights), ("states", states)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.outcomes.size

    def member(self, i):
        """Return (weight, outcome_label, Field) for member i."""
        return float(self.weights[i]), float(self.outcomes[i]), Field(self.grid, self.states[:, i])

    def __iter__(self):
        return (self.member(i) for i in range(len(self)))


def build_epr_state(grid_a: Grid, grid_b: Grid, sigma_plus, sigma_minus, y0=0.0) -> JointState:
    """Construct the normalized two-width Gaussian pair state.

    Parameters
    ----------
    sigma_plus : float
        Width of the center-of-mass envelope (meters).  Controls the
        momentum anticorrelation sharpness ~1/sigma_plus.
    sigma_minus : float
        Width of the relative coordinate (meters).  Controls the
        position correlation sharpness; sigma_minus << sigma_plus is
        the strongly entangled regime.
    y0 : float
        Transverse offset of Bob's photon: the correlation reads
        y_b ~ y_a + y0, and Bob's marginal is centered on y0 while
        Alice's stays centered on zero.

    The widths must resolve on the grids (sigma_minus >= 4 dy) and fit
    inside them (sigma_plus <= extent/8), otherwise the state would be
    aliased or truncated.
    """
    if not (sigma_plus >= sigma_minus > 0.0):
        raise ValueError("widths must satisfy sigma_plus >= sigma_minus > 0")
    coarsest = max(grid_a.dy, grid_b.dy)
    if sigma_minus < 4.0 * coarsest:
        raise ValueError(
            f"sigma_minus {sigma_minus!r} under-resolved: needs >= 4 samples "
            f"({4.0 * coarsest!r} m)"
        )
    tightest = min(grid_a.extent, grid_b.extent)
    if sigma_plus > tightest / 8.0:
        raise ValueError(
            f"sigma_plus {sigma_plus!r} not contained: needs <= extent/8 "
            f"({tightest / 8.0!r} m)"
        )
    ya = grid_a.coords[:, None]
    yb = grid_b.coords[None, :]
    com = (ya + yb - y0) / (2.0 * sigma_plus)
    rel = (ya - yb + y0) / (2.0 * sigma_minus)
    amp = np.exp(-(com**2) - rel**2).astype(np.complex128)
    total = np.real(np.vdot(amp, amp)) * grid_a.dy * grid_b.dy
    amp /= np.sqrt(total)
    return JointState(grid_a, grid_b, amp, float(sigma_plus), float(sigma_minus), float(y0))


def reduce_to_bob(j: JointState) -> DensityMatrix:
    """Partial trace over Alice: rho(y_b, y_b') = sum_a Psi Psi* dy_a."""
    a = np.asarray(j.amp)
    rho = (a.T @ a.conj()) * j.grid_a.dy
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(j.grid_b, rho)


def alice_measure_position(j: JointState) -> ConditionalEnsemble:
    """Alice reads off y_a; Bob's partner collapses to a localized ray.

    One outcome per Alice grid point with weight equal to its marginal
    probability; the conditional state is the matching row of Psi,
    localized near y_a + y0 with width ~sigma_minus.  Zero-probability
    rows are dropped.
    """
    a = np.asarray(j.amp)
    row_prob = (np.abs(a) ** 2).sum(axis=1) * j.grid_b.dy  # density in y_a
    weights = row_prob * j.grid_a.dy
    keep = weights > 0.0
    states = a[keep].T / np.sqrt(row_prob[keep])[None, :]
    return ConditionalEnsemble(
        basis="position",
        grid=j.grid_b,
        outcomes=j.grid_a.coords[keep],
        weights=weights[keep] / weights[keep].sum(),
        states=states,
    )


def alice_measure_momentum(j: JointState) -> ConditionalEnsemble:
    """Alice reads off k_a; Bob's partner collapses to a near-plane wave.

    Alice's axis is transformed with the unitary grid Fourier transform
    and binned by wavenumber.  Conditional Bob states carry spectral
    centroid ~ -k_a (the anticorrelation) with spectral width
    ~1/sigma_plus.
    """
    a = np.asarray(j.amp)
    fa = np.fft.fftshift(np.fft.fft(np.fft.ifftshift(a, axes=0), axis=0), axes=0)
    fa *= j.grid_a.dy / np.sqrt(2.0 * np.pi)
    kgrid = j.grid_a.conjugate()
    row_prob = (np.abs(fa) ** 2).sum(axis=1) * j.grid_b.dy  # density in k_a
    weights = row_prob * kgrid.dy
    keep = weights > 0.0
    states = fa[keep].T / np.sqrt(row_prob[keep])[None, :]
    return ConditionalEnsemble(
        basis="momentum",
        grid=j.grid_b,
        outcomes=kgrid.coords[keep],
        weights=weights[keep] / weights[keep].sum(),
        states=states,
    )


def ensemble_to_density(e: ConditionalEnsemble) -> DensityMatrix:
    """Mix an ensemble back into a density matrix: sum_i w_i |psi_i><psi_i|.

    By completeness this reproduces the partial trace of the originating
    joint state for either basis; the reconstruction is a single matrix
    product so the summation order is fixed and deterministic.
    """
    b = np.asarray(e.states) * np.sqrt(np.asarray(e.weights))[None, :]
    rho = b @ b.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(e.grid, rho)


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2) dy^2: 1 for pure states, 1/m for m equal mixtures."""
    r = np.asarray(rho.rho)
    return float((np.abs(r) ** 2).sum() * rho.grid.dy**2)
