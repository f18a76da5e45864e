# Auction Lab Core - exact-arithmetic FedEx auctions, flow certificates and the DISJ reduction

from .numerics import (
    BidderSpec,
    Instance,
    Interest,
    TypeLabel,
    NULL_TYPE,
    make_bidder,
    make_instance,
    parse_rational,
    render_rational,
    reverse_mass,
)
from .certificate import CertificateReport, CheckResult
from .reduction import (
    DisjInput,
    ReductionTrace,
    bidder1_day1,
    bidder1_day2,
    bidder2,
    build_instance,
    helper_lemma_report,
)
from .duality import (
    Flow,
    ModifiedFlow,
    VirtualValueTable,
    boost,
    canonical_flow,
    canonical_properties,
    is_flow,
    lagrangian_value,
    modified_flow,
    modified_properties,
    virtual_values,
)
from .mechanisms import (
    InterimForm,
    Mechanism,
    bic_violations,
    certified_auction,
    interim_form,
    payments_from_identity,
    revenue,
    spa_bidder1,
    spa_careful,
    utility,
    witness_report,
)
from .simplex import LinearProgram, LPSolution, dump_lp, solve_exact
from .lp_oracle import LP_SIZE_CAP, assemble_lp, select_outcome, solve_instance
from .myerson import (
    SingleDimDistribution,
    encode_ironed,
    iron,
    make_distribution,
    myerson_revenue,
    myerson_winner,
    single_dim_virtuals,
)
from .channel import Channel, Transcript
from .protocol import (
    disj_oracle,
    disj_via_auction,
    replay_transcript,
    run_fulltransfer_protocol,
    run_singledim_protocol,
)
from .metrics import CheckMetrics, NullMetrics
from .checks import CheckRegistry, check, default_registry
from .verification import VerificationConfig, VerificationResult, find_n_min, run_verification, scaling_fit
from .errors import AuctionLabError


# Main exports for API users
__all__ = [
    "BidderSpec",
    "Instance",
    "Interest",
    "TypeLabel",
    "NULL_TYPE",
    "make_bidder",
    "make_instance",
    "parse_rational",
    "render_rational",
    "reverse_mass",
    "CertificateReport",
    "CheckResult",
    "DisjInput",
    "ReductionTrace",
    "bidder1_day1",
    "bidder1_day2",
    "bidder2",
    "build_instance",
    "helper_lemma_report",
    "Flow",
    "ModifiedFlow",
    "VirtualValueTable",
    "boost",
    "canonical_flow",
    "canonical_properties",
    "is_flow",
    "lagrangian_value",
    "modified_flow",
    "modified_properties",
    "virtual_values",
    "InterimForm",
    "Mechanism",
    "bic_violations",
    "certified_auction",
    "interim_form",
    "payments_from_identity",
    "revenue",
    "spa_bidder1",
    "spa_careful",
    "utility",
    "witness_report",
    "LinearProgram",
    "LPSolution",
    "dump_lp",
    "solve_exact",
    "LP_SIZE_CAP",
    "assemble_lp",
    "select_outcome",
    "solve_instance",
    "SingleDimDistribution",
    "encode_ironed",
    "iron",
    "make_distribution",
    "myerson_revenue",
    "myerson_winner",
    "single_dim_virtuals",
    "Channel",
    "Transcript",
    "disj_oracle",
    "disj_via_auction",
    "replay_transcript",
    "run_fulltransfer_protocol",
    "run_singledim_protocol",
    "CheckMetrics",
    "NullMetrics",
    "CheckRegistry",
    "check",
    "default_registry",
    "VerificationConfig",
    "VerificationResult",
    "find_n_min",
    "run_verification",
    "scaling_fit",
    "AuctionLabError",
]

__version__ = "0.1.0"
