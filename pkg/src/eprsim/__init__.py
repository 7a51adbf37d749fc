"""Wave-optics simulation of the entangled-pair direction-filter experiment.

Layers, bottom to top:

* :mod:`eprsim.grids` - sampled complex fields and the unitary
  grid Fourier transform;
* :mod:`eprsim.optics` - thin elements, paraxial propagation, the
  direction filter and its validity report;
* :mod:`eprsim.entangle` - the regularized two-photon state, partial
  trace, and Alice's collapse ensembles;
* :mod:`eprsim.experiment` - full runs: singles and coincidence
  patterns, visibility, Monte Carlo detection, no-signaling distances;
* :mod:`eprsim.config` / :mod:`eprsim.cli` - config files and the
  ``eprsim`` command-line runner.
"""

__version__ = "0.1.0"

from .grids import (
    Field,
    Grid,
    Spectrum,
    centroid,
    from_spectrum,
    make_grid,
    norm2,
    rms_width,
    to_spectrum,
)
from .optics import (
    BlockOutsideAperture,
    DoubleSlit,
    FilterValidity,
    FreeSpace,
    HardAperture,
    Lens,
    OpticalTrain,
    Pinhole,
    SamplingReport,
    Tilt,
    apply_element,
    apply_lens,
    apply_mask,
    apply_tilt,
    apply_train,
    direction_filter,
    filter_validity,
    propagate,
    validate_sampling,
)
from .entangle import (
    ConditionalEnsemble,
    DensityMatrix,
    JointState,
    alice_measure_momentum,
    alice_measure_position,
    build_epr_state,
    ensemble_to_density,
    purity,
    reduce_to_bob,
)
from .experiment import (
    DetectionRecord,
    ExperimentConfig,
    NoSignalingDistance,
    Pattern,
    bob_train,
    coincidence_patterns,
    default_fringe_window,
    fringe_spacing,
    fringe_visibility,
    mixture_pattern,
    momentum_acceptance,
    monte_carlo_detect,
    no_signaling_distance,
    pattern_from_density,
    pattern_from_pure,
    singles_pattern,
)
from .config import config_hash, emit_defaults, parse_config
