"""Verification engine for social choice on single-peaked domains with an uncertain alignment.

The public API is re-exported here; see the submodules for details.
"""

from .checker import (Conclusion, ImplementabilityVerdict, Verdict, Witness, check_anonymous,
                      check_implementable, check_nvp, check_shared_monotonic, check_strategy_proof,
                      check_unanimous, replay_witness)
from .domain import (Alignment, Alternative, Preference, Profile, State, SupportSpec,
                     canonical_alignments, canonicalize_alignment, domain_intersection,
                     enumerate_single_peaked, full_support, has_constant_shared_peaks,
                     is_single_peaked, parse_alignment, parse_preference, shared_peaks)
from .errors import (ArityError, DomainMismatch, IncompleteSCF, InvalidAlignment, InvalidMessage,
                     PeakVerifyError, PremiseNotMet, ScaleExceeded, SupportMismatch)
from .kernels import BACKEND
from .mechsim import (EquilibriumReport, Mechanism, Message, canonical_mechanism,
                      check_mixed_implementation, check_partially_honest_implementation, outcome,
                      partially_honest_mechanism)
from .rules import (MedianRule, ProjectedSCF, TabularSCF, enumerate_median_rules, eval_median_rule,
                    make_symmetric_order_statistic, make_true_median, order_statistic_value,
                    to_tabular)
from .search import (AssignmentSearchReport, CharacterizationVerdict, search_implementable_nvpms,
                     verify_constant_shared_peaks, verify_disjoint_support, verify_full_support_theorem,
                     verify_lemma_consistency, verify_lemma_symmetry, verify_reverse_pair)

__version__ = "0.1.0"

__all__ = [
    "Alignment", "Alternative", "ArityError", "AssignmentSearchReport", "BACKEND",
    "CharacterizationVerdict", "Conclusion", "DomainMismatch", "EquilibriumReport",
    "ImplementabilityVerdict", "IncompleteSCF", "InvalidAlignment", "InvalidMessage", "Mechanism",
    "MedianRule", "Message", "PeakVerifyError", "Preference", "PremiseNotMet", "Profile",
    "ProjectedSCF", "ScaleExceeded", "State", "SupportMismatch", "SupportSpec", "TabularSCF",
    "Verdict", "Witness", "canonical_alignments", "canonical_mechanism", "canonicalize_alignment",
    "check_anonymous", "check_implementable", "check_mixed_implementation", "check_nvp",
    "check_partially_honest_implementation", "check_shared_monotonic", "check_strategy_proof",
    "check_unanimous", "domain_intersection", "enumerate_median_rules", "enumerate_single_peaked",
    "eval_median_rule", "full_support", "has_constant_shared_peaks", "is_single_peaked",
    "make_symmetric_order_statistic", "make_true_median", "order_statistic_value", "outcome",
    "parse_alignment", "parse_preference", "partially_honest_mechanism", "replay_witness",
    "search_implementable_nvpms", "shared_peaks", "to_tabular", "verify_constant_shared_peaks",
    "verify_disjoint_support", "verify_full_support_theorem", "verify_lemma_consistency",
    "verify_lemma_symmetry", "verify_reverse_pair", "__version__",
]
