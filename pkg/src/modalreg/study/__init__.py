"""Monte-Carlo study harness: scenarios, oracles, coverage, theory checks,
and cross-validated prediction error."""

from .coverage import ALL_METHODS, METHOD_LLMR, SIGMA_REF, CoverageReport, \
    run_coverage_study
from .crossval import MSPEReport, cv_mspe
from .oracles import grid_search_mode_oracle, local_constant_profile
from .scenarios import STUDY_MIXTURE, ErrorMixture, ScalarScenario, \
    VCScenario, example1, generate_example1, generate_vc_model, \
    homoscedastic_scalar, homoscedastic_vc, substream, vc_model
from .theory import ScalarTheory, TheoryCheckReport, VCTheory, \
    VCTheoryCheckReport, mc_theory_check, scalar_theory, vc_theory, \
    vc_theory_check

__all__ = [
    "ALL_METHODS", "METHOD_LLMR", "SIGMA_REF", "CoverageReport",
    "run_coverage_study", "MSPEReport", "cv_mspe",
    "grid_search_mode_oracle", "local_constant_profile",
    "STUDY_MIXTURE", "ErrorMixture", "ScalarScenario", "VCScenario",
    "example1", "generate_example1", "generate_vc_model",
    "homoscedastic_scalar", "homoscedastic_vc", "substream", "vc_model",
    "ScalarTheory", "TheoryCheckReport", "VCTheory", "VCTheoryCheckReport",
    "mc_theory_check", "scalar_theory", "vc_theory", "vc_theory_check",
]
