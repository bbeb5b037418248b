"""pgsim: exact simulation of processes with arbitrary marginals and
correlation structures via a parent-Gaussian transform."""

from . import errors
from .correlations import (
    BurrXIIACS,
    CorrelationModel,
    CrossCorrelationModel,
    FGNACS,
    GenLogACS,
    MarkovianACS,
    ParetoIIACS,
    WeibullACS,
    acs_from_dict,
    empirical_acs,
    empirical_cross_corr,
    fit_acs,
)
from .ctf import (
    AUTO_RHO_GRID,
    CROSS_RHO_GRID,
    CtfCurve,
    TransformGrid,
    acti_evaluate,
    bivariate_normal_cdf,
    build_grid,
    ccti_evaluate,
    fit_ctf,
    rho_max,
)
from .gaussian import (
    ArModel,
    Mar1Model,
    SumAr1Model,
    ar_extrapolate_acs,
    fit_ar,
    fit_mar1,
    fit_sum_ar1,
    levinson_durbin,
    simulate_ar,
    simulate_mar1,
    simulate_sum_ar1,
)
from .marginals import (
    Bernoulli,
    Beta,
    BurrIII,
    BurrXII,
    Gaussian,
    GenGamma,
    Kumaraswamy,
    Marginal,
    MixedMarginal,
    ParetoII,
    PolyaAeppli,
    Weibull,
    fit_marginal,
    marginal_from_dict,
    model_lmoments,
    sample_lmoments,
)
from .pipeline import (
    MultiProcessSpec,
    ProcessSpec,
    RecipeOptions,
    Thresholds,
    build_plan,
    parse_spec,
    plan_multivariate,
    plan_univariate,
    run_recipe,
    synthesize,
    verify,
    verify_plan,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
