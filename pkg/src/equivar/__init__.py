"""Tools for checking that an explanation of a system commutes with use.

A translation from a machine's state space to a human's mental model is
treated as adequate exactly when acting on the machine and translating the
outcome matches translating the action and reasoning in the human model.
The package provides discrete factored models, translations, several
verification strategies with cost accounting, mixture decompositions,
a neural concept-bottleneck trainer with discretization, scenario files,
a scored forecasting harness, a CLI, and an HTTP service.
"""

from .errors import (
    AmbiguousTranslation,
    Divergence,
    EmptyCell,
    EmptySubset,
    EquivarError,
    IndexOutOfRange,
    ParseError,
    SessionClosed,
    StateSpaceTooLarge,
    StructureInconsistent,
    SystemMismatch,
    UnknownScenario,
    UnknownSelectorValue,
    UnknownVariable,
    ValidationError,
    ZeroProbabilityEvidence,
)
from .models import (
    Distribution,
    FactoredModel,
    RuleCpd,
    apply_action,
    apply_actions,
    ci_holds,
    ci_test,
    intervene,
    joint,
    marginal,
    marginal_of_model,
    sample,
    tv,
)
from .reparam import (
    LOAD_LIMIT,
    CognitiveLoadProfile,
    MixtureModel,
    cognitive_load,
    flatten,
    induced_concept_parents,
    mixture_apply_action,
    mixture_joint,
    semantic_reparam,
)
from .systems import Action, Variable, VariableSystem, do, observe
from .translation import (
    Translation,
    compose_translations,
    identity_translation,
    pushforward,
    translate_action,
)
from .verify import (
    ActionVerdict,
    Counterexample,
    EquivarianceReport,
    SurrogateChainReport,
    minimal_neighborhood,
    verify_brute,
    verify_ci_preservation,
    verify_markov_local,
    verify_region,
    verify_surrogate_chain,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionVerdict",
    "AmbiguousTranslation",
    "CognitiveLoadProfile",
    "Counterexample",
    "Distribution",
    "Divergence",
    "EmptyCell",
    "EmptySubset",
    "EquivarError",
    "EquivarianceReport",
    "FactoredModel",
    "IndexOutOfRange",
    "LOAD_LIMIT",
    "MixtureModel",
    "ParseError",
    "RuleCpd",
    "SessionClosed",
    "StateSpaceTooLarge",
    "StructureInconsistent",
    "SurrogateChainReport",
    "SystemMismatch",
    "Translation",
    "UnknownScenario",
    "UnknownSelectorValue",
    "UnknownVariable",
    "ValidationError",
    "Variable",
    "VariableSystem",
    "ZeroProbabilityEvidence",
    "apply_action",
    "apply_actions",
    "ci_holds",
    "ci_test",
    "cognitive_load",
    "compose_translations",
    "do",
    "flatten",
    "identity_translation",
    "induced_concept_parents",
    "intervene",
    "joint",
    "marginal",
    "marginal_of_model",
    "minimal_neighborhood",
    "mixture_apply_action",
    "mixture_joint",
    "observe",
    "pushforward",
    "sample",
    "semantic_reparam",
    "translate_action",
    "tv",
    "verify_brute",
    "verify_ci_preservation",
    "verify_markov_local",
    "verify_region",
    "verify_surrogate_chain",
]
