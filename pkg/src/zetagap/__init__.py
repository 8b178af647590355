"""Approximate spectral-gap toolkit for finite Markov chains, with a lazy
spike-and-slab Gibbs sampler and a mixing-time experiment harness."""

__version__ = "0.1.0"

from .chains import (  # noqa: F401
    FiniteChain,
    GapReport,
    INFEASIBLE,
    MixingBoundReport,
    NormSpec,
    analyze_chain,
    cheeger_verify,
    conductance,
    dirichlet_form,
    random_density,
    random_lazy_chain,
    restricted_spectral_gap,
    spectral_gap,
    star_norm,
    total_variation,
    tv_evolution,
    variance,
    verify_mixing_bound,
    zeta_conductance,
    zeta_gap_lower,
    zeta_gap_upper,
)
from .errors import CapacityError, NumericalError, ParseError, ValidationError  # noqa: F401
from .experiment import (  # noqa: F401
    ExperimentConfig,
    MixingRecord,
    build_initial_indicator,
    empirical_mixing_time,
    generate_instance,
    run_study,
    sen_prec,
)
from .gibbs import GibbsState, Trajectory, gibbs_step, init_from_model, sample_theta  # noqa: F401
from .gibbs import run as run_sampler  # noqa: F401
from .mixtures import (  # noqa: F401
    MixtureComponent,
    MixtureSpec,
    OverlapGraph,
    build_mixture_kernel,
    build_overlap_graph,
    madras_randall_bound,
    mixture_zeta_gap_bound,
    overlap,
)
from .spike_slab import (  # noqa: F401
    ConditionalGaussian,
    GroundTruth,
    SpikeSlabModel,
    bernoulli_probs,
    coherence,
    conditional_gaussian,
    contraction_event_check,
    detectable_support,
    exact_model_posterior,
    log_posterior_ratio,
    restricted_eigenvalue,
    warm_start_diagnostics,
)
