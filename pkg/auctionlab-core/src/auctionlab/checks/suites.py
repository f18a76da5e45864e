"""Registered checks, one per claim about the reduction and its auctions."""

from fractions import Fraction
from typing import Optional
import asyncio
import logging

from ..certificate import CertificateReport, ReportBuilder
from ..duality import (
    canonical_properties,
    equal_level_gaps,
    is_flow,
    lagrangian_long_form,
    lagrangian_value,
    modified_properties,
)
from ..lp_oracle import select_outcome, solve_instance, x_var
from ..mechanisms import (
    certified_auction,
    interim_form,
    misallocated_levels,
    outcome_support,
    revenue,
    tail_indifference,
    witness_report,
)
from ..myerson import (
    SingleDimDistribution,
    fedex_embedding,
    make_distribution,
    myerson_revenue,
    myerson_winner,
)
from ..numerics import Interest
from ..protocol import LOWEST, bits_per_party, disj_oracle, fulltransfer_message, run_singledim_protocol
from ..reduction import DisjInput, build_instance, helper_lemma_report, random_disj_input
from .context import CheckCase, SweepContext, log2, scaling_fit
from .registry import check, register_suite

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
RANGE_CONDITIONS = {"mass", "nonnegative", "range"}

register_suite("reduction", "Reduction validity", order=10)
register_suite("canonical", "Canonical-flow certificate", order=20, min_n=True)
register_suite("modified", "Modified-flow certificate", order=30, min_n=True)
register_suite("disj", "End-to-end DISJ", order=40, min_n=True)
register_suite("oracles", "Oracle agreement", order=50)
register_suite("locality", "Locality separation", order=60)
register_suite("scaling", "Asymptotic gap scaling", order=70)


def _select(report: CertificateReport, keep) -> CertificateReport:
    return CertificateReport(tuple(c for c in report.checks if keep(c.condition)))


# ============ Reduction ============


@check(suite="reduction", claim="Bidder One's day-1 and day-2 masses are 1/2 each; Bidder Two's total is 1")
def probability_mass(case: CheckCase) -> CertificateReport:
    b1, b2 = case.instance.bidder1, case.instance.bidder2
    report = ReportBuilder()
    report.equal("mass", "bidder 1 day 1", sum(b1.day1, Fraction(0)), HALF)
    report.equal("mass", "bidder 1 day 2", sum(b1.day2, Fraction(0)), HALF)
    report.equal("mass", "bidder 2", sum(b2.day1, Fraction(0)) + sum(b2.day2, Fraction(0)), 1)
    return report.build()


@check(suite="reduction", claim="every scaled probability above the lowest level stays within n^3 (or 2n^3) of a")
def range_bounds(case: CheckCase) -> CertificateReport:
    return CertificateReport.merge(
        _select(helper_lemma_report(t), RANGE_CONDITIONS.__contains__) for t in case.traces
    )


@check(suite="reduction", claim="helper sequences are (nearly) monotone with bounded gaps")
def helper_sequences(case: CheckCase) -> CertificateReport:
    return CertificateReport.merge(
        _select(helper_lemma_report(t), lambda c: c not in RANGE_CONDITIONS) for t in case.traces
    )


# ============ Canonical flow ============


@check(suite="canonical", claim="canonical virtual values separate levels and order equal levels by intersection")
def canonical_separation(case: CheckCase) -> CertificateReport:
    return canonical_properties(case.instance, case.disj, case.canonical_vv)


@check(suite="canonical", claim="tie-for-Bidder-One is witnessed by the canonical flow iff x and y are disjoint")
def canonical_witness(case: CheckCase) -> CertificateReport:
    """Also checks that the misallocated levels are exactly ``k + 1`` for each intersection ``k``."""
    witness = witness_report(case.instance, case.canonical, case.spa1, case.canonical_vv)
    report = ReportBuilder()
    report.holds("witness_iff_disjoint", str(case.disj), witness.passed == case.disj.disjoint)
    expected = {k + 1 for k in case.disj.intersections}
    found = misallocated_levels(witness)
    report.holds(
        "failure_levels", f"expected {sorted(expected)} found {sorted(found)}", found == expected
    )
    return report.build()


def _duality_report(case: CheckCase, flow, mechanism) -> CertificateReport:
    inst = case.instance
    interim = interim_form(inst, mechanism)
    dual = lagrangian_value(inst, flow, interim)
    report = ReportBuilder()
    report.equal("strong_duality", mechanism.name, revenue(inst, mechanism), dual)
    report.equal("long_form", mechanism.name, lagrangian_long_form(inst, flow, interim), dual)
    return report.build()


@check(suite="canonical", claim="revenue of the witnessed auction equals the Lagrangian of the canonical flow")
def canonical_strong_duality(case: CheckCase) -> Optional[CertificateReport]:
    if not case.disj.disjoint:
        return None
    return _duality_report(case, case.canonical, case.spa1)


# ============ Modified flow ============


@check(suite="modified", claim="the boosted multipliers form a flow with a positive, admissible boost")
def modified_flow_valid(case: CheckCase) -> Optional[CertificateReport]:
    if case.disj.disjoint:
        return None
    report = ReportBuilder()
    report.extend(is_flow(case.instance, case.modified.flow))
    report.greater("boost_positive", "eps", case.modified.eps, 0)
    top = case.instance.bidder1.n
    base = case.canonical.bidder(1)
    for k in range(1, top + 1):
        report.less_equal("boost_admissible", f"lambda2({k})", case.modified.eps, base.lam(Interest.DAY2, k))
    return report.build()


@check(suite="modified", claim="boosted virtual values keep level order and tie at k*")
def modified_separation(case: CheckCase) -> Optional[CertificateReport]:
    if case.disj.disjoint:
        return None
    return modified_properties(case.instance, case.disj, case.modified)


@check(suite="modified", claim="careful tie-breaking at k* is BIC and witnessed by the boosted flow")
def careful_witness(case: CheckCase) -> Optional[CertificateReport]:
    if case.disj.disjoint:
        return None
    if case.careful is None:
        report = ReportBuilder()
        report.holds("tie_level", f"eps={case.modified.eps}", False)
        return report.build()
    return witness_report(case.instance, case.modified.flow, case.careful)


@check(suite="modified", claim="Bidder One is interest-indifferent at every level above k*")
def tail_indifference_above_tie(case: CheckCase) -> Optional[CertificateReport]:
    if case.disj.disjoint or case.careful is None:
        return None
    return tail_indifference(case.instance, case.careful, case.modified.k_star)


@check(suite="modified", claim="revenue of careful tie-breaking equals the Lagrangian of the boosted flow")
def modified_strong_duality(case: CheckCase) -> Optional[CertificateReport]:
    if case.disj.disjoint or case.careful is None:
        return None
    return _duality_report(case, case.modified.flow, case.careful)


# ============ DISJ ============


@check(suite="disj", claim="Bidder One wins at the lowest profile iff x and y are disjoint")
def disj_agreement(case: CheckCase) -> CertificateReport:
    outcome = select_outcome(case.instance, LOWEST, LOWEST, backend="flow")
    report = ReportBuilder()
    report.holds("disj_agreement", str(case.disj), (outcome == frozenset({1})) == disj_oracle(case.disj))
    return report.build()


@check(suite="disj", scope="sweep", claim="the auction answers DISJ on seeded pairs at max(N_min, 16)")
def disj_end_to_end(ctx: SweepContext) -> Optional[CertificateReport]:
    if ctx.n_min is None or ctx.config.disj_pairs == 0:
        return None
    n = max(ctx.n_min, 16)
    rng = ctx.rng(f"disj:{n}")
    report = ReportBuilder()
    agreed = 0
    for trial in range(ctx.config.disj_pairs):
        d = random_disj_input(n, rng)
        inst, _ = build_instance(d)
        answer = select_outcome(inst, LOWEST, LOWEST, backend="flow") == frozenset({1})
        if answer == disj_oracle(d):
            agreed += 1
        else:
            report.holds("disj_agreement", f"n={n} #{trial} {d}", False)
    report.equal("disj_agreement_rate", f"n={n}", agreed, ctx.config.disj_pairs)
    return report.build()


# ============ Oracles ============


def _random_distribution(rng, max_support: int = 4, max_value: int = 12) -> SingleDimDistribution:
    size = rng.randint(1, max_support)
    values = sorted(rng.sample(range(1, max_value + 1), size))
    weights = [rng.randint(1, 6) for _ in range(size)]
    total = sum(weights)
    return make_distribution(values, [Fraction(w, total) for w in weights])


@check(suite="oracles", scope="sweep", claim="LP optimum equals Myerson revenue on single-interest instances")
def single_dim_lp(ctx: SweepContext) -> Optional[CertificateReport]:
    if ctx.config.single_dim_trials == 0:
        return None
    rng = ctx.rng("single-dim-lp")
    report = ReportBuilder()
    for trial in range(ctx.config.single_dim_trials):
        d1, d2 = _random_distribution(rng), _random_distribution(rng)
        solved = solve_instance(fedex_embedding(d1, d2))
        report.equal("lp_equals_myerson", f"#{trial} {d1.values}/{d2.values}", solved.value, myerson_revenue([d1, d2]))
    return report.build()


@check(suite="oracles", scope="sweep", claim="the single-dim protocol outcome equals the Myerson winner and price")
def protocol_myerson(ctx: SweepContext) -> Optional[CertificateReport]:
    if ctx.config.protocol_draws == 0:
        return None
    rng = ctx.rng("protocol")
    draws = []
    for _ in range(ctx.config.protocol_draws):
        d1, d2 = _random_distribution(rng), _random_distribution(rng)
        draws.append((d1, rng.choice(d1.values), d2, rng.choice(d2.values)))

    async def run_all():
        return [await run_singledim_protocol(*draw) for draw in draws]

    outcomes = asyncio.run(run_all())
    report = ReportBuilder()
    mismatches = 0
    for index, ((d1, v1, d2, v2), outcome) in enumerate(zip(draws, outcomes)):
        expected = myerson_winner([d1, d2], [v1, v2])
        if (outcome.winner, outcome.price) != expected:
            mismatches += 1
            report.holds("protocol_matches_myerson", f"#{index} values=({v1},{v2})", False)
    report.equal("protocol_mismatches", f"{len(draws)} draws", mismatches, 0)
    return report.build()


@check(suite="oracles", scope="sweep", claim="LP optimum equals the certified revenue and allocation at the lowest profile")
def lp_flow_agreement(ctx: SweepContext) -> Optional[CertificateReport]:
    """Runs only at the sizes listed in ``lp_n_values`` that are at least N_min.

    Uses the flow-edge LP. When the solver's vertex picks a different winner
    at the lowest profile, a second solve pins the certified winner there and
    must reach the same optimum.
    """
    sizes = [n for n in ctx.config.lp_n_values if ctx.n_min is not None and n >= ctx.n_min]
    if not sizes:
        return None
    report = ReportBuilder()
    for n in sizes:
        for d in (DisjInput((0,) * n, (0,) * n), DisjInput((1,) * n, (1,) * n)):
            inst, _ = build_instance(d)
            certified = certified_auction(inst)
            expected = revenue(inst, certified.mechanism)
            with ctx.metrics.measure("lp", "solve", {"n": n}):
                solved = solve_instance(inst, constraints="local")
            ctx.metrics.count("lp_pivots", solved.solution.pivots, n=n)
            loc = f"n={n} {d}"
            report.equal("lp_equals_certified", loc, solved.value, expected)
            target = outcome_support(certified.mechanism, LOWEST, LOWEST)
            if outcome_support(solved.mechanism, LOWEST, LOWEST) == target:
                report.holds("lowest_profile_outcome", loc, True)
            else:
                (winner,) = target
                pinned = solve_instance(
                    inst, constraints="local", pins={x_var(winner, LOWEST.flat, LOWEST.flat): 1}
                )
                report.equal("lowest_profile_outcome", f"{loc} pinned to bidder {winner}", pinned.value, expected)
            ctx.notes["largest_lp_n"] = max(n, ctx.notes.get("largest_lp_n", 0))
    return report.build()


# ============ Locality ============


def _uniform(n: int) -> SingleDimDistribution:
    return make_distribution(range(1, n + 1), [Fraction(1, n)] * n)


def _profiles(n: int, rng, samples: int = 200) -> list[tuple[int, int]]:
    if n <= 16:
        return [(a, b) for a in range(1, n + 1) for b in range(1, n + 1)]
    picks = {(1, 1), (n, n), (1, n), (n, 1)}
    while len(picks) < samples:
        picks.add((rng.randint(1, n), rng.randint(1, n)))
    return sorted(picks)


def single_dim_bits(n: int, rng) -> int:
    """Largest per-party bit count of the single-dim protocol on uniform ``[1, n]``."""
    dist = _uniform(n)

    async def run_all() -> int:
        worst = 0
        for v1, v2 in _profiles(n, rng):
            outcome = await run_singledim_protocol(dist, v1, dist, v2)
            worst = max(worst, *bits_per_party(outcome.transcript).values())
        return worst

    return asyncio.run(run_all())


@check(suite="locality", scope="sweep", claim="single-dim bits per party grow like log n; full transfer needs n log n")
def locality(ctx: SweepContext) -> Optional[CertificateReport]:
    ns = sorted(ctx.config.locality_n_values)
    if len(ns) < 2:
        return None
    single = [single_dim_bits(n, ctx.rng(f"locality:{n}")) for n in ns]
    full = [len(fulltransfer_message(n, (0,) * n)) for n in ns]
    constant = max(bits / log2(n) for bits, n in zip(single, ns))
    ctx.notes["locality"] = {
        "n": ns,
        "single_dim_bits": single,
        "full_transfer_bits": full,
        "C": constant,
    }
    report = ReportBuilder()
    for n, bits, heavy in zip(ns, single, full):
        report.less_equal("single_dim_bits", f"n={n}", bits, Fraction(constant) * Fraction(log2(n)))
        report.greater_equal("full_transfer_bits", f"n={n}", heavy, Fraction(n * log2(n)))
    report.less("single_dim_growth", "log-log slope", Fraction(scaling_fit(ns, single)), HALF)
    report.greater_equal("full_transfer_growth", "log-log slope", Fraction(scaling_fit(ns, full)), 1)
    return report.build()


# ============ Scaling ============


@check(suite="scaling", scope="sweep", claim="equal-level gaps scale as n^-2 (c/e) and n^-3 (e/d); the boost as n^-4")
def gap_scaling(ctx: SweepContext) -> Optional[CertificateReport]:
    ns = sorted(ctx.config.scaling_n_values)
    if len(ns) < 2:
        return None
    c_e, e_d, eps = [], [], []
    for n in ns:
        case = CheckCase(n, DisjInput((1,) * n, (1,) * n), "all-ones")
        gaps = equal_level_gaps(case.instance, case.disj, case.canonical_vv)
        c_e.append(min(gaps["c_minus_e"]))
        e_d.append(min(gaps["e_minus_d"]))
        eps.append(case.modified.eps)
    slopes = {
        "c_minus_e": scaling_fit(ns, c_e),
        "e_minus_d": scaling_fit(ns, e_d),
        "eps": scaling_fit(ns, eps),
    }
    ctx.notes["scaling"] = {"n": ns, "slopes": slopes}
    report = ReportBuilder()
    for name, target in (("c_minus_e", -2), ("e_minus_d", -3), ("eps", -4)):
        slope = Fraction(slopes[name])
        report.within("gap_slope", name, slope, Fraction(target) - Fraction(3, 10), Fraction(target) + Fraction(3, 10))
    return report.build()
