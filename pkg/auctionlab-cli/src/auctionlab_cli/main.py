import argparse
import asyncio
import logging
import sys
import traceback
from fractions import Fraction
from random import Random
from typing import Optional, Sequence

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from auctionlab import (
    LP_SIZE_CAP,
    AuctionLabError,
    CheckMetrics,
    DisjInput,
    VerificationConfig,
    assemble_lp,
    build_instance,
    canonical_flow,
    certified_auction,
    disj_oracle,
    dump_lp,
    interim_form,
    lagrangian_value,
    modified_flow,
    revenue,
    run_fulltransfer_protocol,
    run_singledim_protocol,
    run_verification,
    solve_exact,
    spa_bidder1,
    spa_careful,
    virtual_values,
    witness_report,
)
from auctionlab.errors import UsageError
from auctionlab.lp_oracle import lp_mechanism, select_outcome
from auctionlab.mechanisms import mechanism_from_rule, optimal_rule, outcome_support
from auctionlab.myerson import iron, make_distribution, myerson_winner, single_dim_virtuals
from auctionlab.numerics import parse_rational
from auctionlab.protocol import LOWEST
from auctionlab.reduction import parse_bits, random_disj_input
from auctionlab.serialization import (
    CertificateModel,
    DistributionModel,
    FlowModel,
    InstanceModel,
    IronedModel,
    LPResultModel,
    TranscriptModel,
    VerificationModel,
    allocation_rows,
    dump_document,
    load_document,
    render_csv,
    render_outcome,
    render_support,
    virtual_value_rows,
    write_text,
)
from auctionlab.simplex import presolve
from auctionlab.verification import resolve_seed

logger = logging.getLogger("auctionlab")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def print_success(message: str):
    """Print success message"""
    print(f"✓ {message}")


def print_info(message: str):
    """Print info message"""
    print(f"→ {message}")


def print_error(message: str):
    """Print error message"""
    print(f"✗ {message}", file=sys.stderr)


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _emit(content: str, out: Optional[str]) -> None:
    write_text(content, out, sys.stdout)
    if out:
        print_success(f"Written to: {out}")


def _disj_from_args(args) -> DisjInput:
    """``--x``/``--y`` bits, or a seeded random pair of length ``--n``."""
    if args.x is not None and args.y is not None:
        d = DisjInput(parse_bits(args.x), parse_bits(args.y))
        if args.n is not None and args.n != d.n:
            raise UsageError(f"--n {args.n} does not match bit length {d.n}", {"n": args.n})
        return d
    if args.x is not None or args.y is not None:
        raise UsageError("--x and --y must be given together", {})
    if args.n is None:
        raise UsageError("Give --x and --y, or --n for a seeded random pair", {})
    return random_disj_input(args.n, Random(resolve_seed(args.seed)))


def _load_instance(path: str):
    return load_document(path, InstanceModel).to_instance()


# ============ Handlers ============


def handle_gen(args) -> int:
    d = _disj_from_args(args)
    inst, traces = build_instance(d)
    _emit(dump_document(InstanceModel.from_instance(inst, d, traces)), args.out)
    return EXIT_OK


def handle_flow(args) -> int:
    inst = _load_instance(args.instance)
    if args.modified:
        modified = modified_flow(inst)
        doc = FlowModel.from_flow(modified.flow, "modified", modified.eps, modified.k_star)
    else:
        doc = FlowModel.from_flow(canonical_flow(inst))
    _emit(dump_document(doc), args.out)
    return EXIT_OK


def handle_virtuals(args) -> int:
    inst = _load_instance(args.instance)
    if args.flow:
        fl = load_document(args.flow, FlowModel).to_flow()
    elif args.modified:
        fl = modified_flow(inst).flow
    else:
        fl = canonical_flow(inst)
    rows = virtual_value_rows(inst, virtual_values(inst, fl))
    if args.format == "csv":
        content = render_csv(
            ["bidder", "type", "mass", "phi"], [(r.bidder, r.type, r.mass, r.phi) for r in rows]
        )
    else:
        content = "[\n" + ",\n".join("  " + r.model_dump_json() for r in rows) + "\n]\n"
    _emit(content, args.out)
    return EXIT_OK


MAX_LISTED_FAILURES = 20


def _certify_target(inst, args):
    """Flow, mechanism and boost data to certify: the automatic pipeline unless overridden."""
    if args.mechanism == "auto" and not args.flow:
        certified = certified_auction(inst)
        kind = "modified" if certified.k_star is not None else "canonical"
        return certified.flow, kind, certified.mechanism, certified.report, certified.eps, certified.k_star
    eps, k_star = None, args.k_star
    if args.flow:
        doc = load_document(args.flow, FlowModel)
        fl, kind, eps = doc.to_flow(), f"file:{doc.kind}", doc.eps
        k_star = k_star or doc.k_star
    elif args.mechanism == "careful":
        modified = modified_flow(inst)
        fl, kind, eps = modified.flow, "modified", modified.eps
        k_star = k_star or modified.k_star
    else:
        fl, kind = canonical_flow(inst), "canonical"
    if args.mechanism == "spa1":
        mechanism = spa_bidder1(inst)
    elif args.mechanism == "careful":
        if k_star is None:
            k_star = modified_flow(inst).k_star
        if k_star is None:
            raise UsageError("careful tie-breaking needs --k-star; the boosted flow has no tie level", {})
        mechanism = spa_careful(inst, k_star)
    else:
        name, rule = optimal_rule(inst)
        mechanism = mechanism_from_rule(inst, name, rule)
    return fl, kind, mechanism, witness_report(inst, fl, mechanism), eps, k_star


def handle_certify(args) -> int:
    inst = _load_instance(args.instance)
    fl, kind, mechanism, report, eps, k_star = _certify_target(inst, args)
    doc = CertificateModel.from_report(
        report,
        mechanism=mechanism.name,
        flow=kind,
        revenue=revenue(inst, mechanism),
        lagrangian=lagrangian_value(inst, fl, interim_form(inst, mechanism)),
        eps=eps,
        k_star=k_star,
    )
    _emit(dump_document(doc), args.out)
    if report.passed:
        if args.out:
            print_success(f"{mechanism.name} is witnessed optimal")
        return EXIT_OK
    failures = report.failures
    print_error(f"No witness: {len(failures)} violated condition(s)")
    for check in failures[:MAX_LISTED_FAILURES]:
        print(f"  {check.describe()}", file=sys.stderr)
    if len(failures) > MAX_LISTED_FAILURES:
        print(f"  ... and {len(failures) - MAX_LISTED_FAILURES} more", file=sys.stderr)
    return EXIT_FAILED


def handle_lp(args) -> int:
    inst = _load_instance(args.instance)
    if max(inst.bidder1.n, inst.bidder2.n) > LP_SIZE_CAP:
        print_info(f"Instance exceeds the LP size cap of {LP_SIZE_CAP}; this may take a long time")
    program = assemble_lp(inst, args.constraints)
    reduced = presolve(program)
    if args.dump:
        write_text(dump_lp(reduced), args.dump)
    solution = solve_exact(reduced)
    mechanism = lp_mechanism(inst, solution)
    payments = {}
    for i in (1, 2):
        for label in inst.bidder(i).labels():
            profile = (label.flat, 0) if i == 1 else (0, label.flat)
            payments[f"{i}:{label}"] = mechanism.pay(i, *profile)
    doc = LPResultModel(
        value=solution.value,
        pivots=solution.pivots,
        constraint_set=args.constraints,
        variables=len(program.variables),
        constraints=len(program.constraints),
        outcome_at_lowest=render_support(outcome_support(mechanism, LOWEST, LOWEST)),
        payments=payments,
        allocation=allocation_rows(inst, mechanism),
    )
    _emit(dump_document(doc), args.out)
    return EXIT_OK


def _distribution(path: Optional[str], values: Optional[str], probs: Optional[str]):
    if path:
        return load_document(path, DistributionModel).to_distribution()
    if not values or not probs:
        raise UsageError("Give a distribution file, or --values and --probs", {})
    try:
        parsed = [int(v) for v in values.split(",")]
    except ValueError:
        raise UsageError(f"Invalid --values {values!r}", {"values": values})
    return make_distribution(parsed, [parse_rational(p) for p in probs.split(",")])


def handle_iron(args) -> int:
    d = _distribution(args.distribution, args.values, args.probs)
    table = iron(d)
    if args.format == "json":
        _emit(dump_document(IronedModel.from_distribution(d, table)), args.out)
        return EXIT_OK
    phi = single_dim_virtuals(d)
    rows = [(k, d.values[k - 1], phi[k - 1], table.at(k), table.block_id(k)) for k in range(1, d.n + 1)]
    _emit(render_csv(["k", "value", "phi", "phi_bar", "block"], rows), args.out)
    return EXIT_OK


def _single_dim_inputs(args):
    """Distributions from ``--d1/--d2`` or uniform on ``[1, --n]``; values from
    ``--v1/--v2`` or seeded draws."""
    if args.d1 and args.d2:
        d1, d2 = _distribution(args.d1, None, None), _distribution(args.d2, None, None)
    elif args.d1 or args.d2:
        raise UsageError("--d1 and --d2 must be given together", {})
    elif args.n is not None:
        if args.n < 1:
            raise UsageError(f"--n must be positive, got {args.n}", {"n": args.n})
        d1 = d2 = make_distribution(range(1, args.n + 1), [Fraction(1, args.n)] * args.n)
    else:
        raise UsageError("single-dim mode needs --d1 and --d2, or --n for uniform bidders", {})
    rng = Random(resolve_seed(args.seed))
    v1 = args.v1 if args.v1 is not None else rng.choices(d1.values, weights=d1.probs)[0]
    v2 = args.v2 if args.v2 is not None else rng.choices(d2.values, weights=d2.probs)[0]
    return d1, v1, d2, v2


def handle_protocol(args) -> int:
    if args.mode == "single-dim":
        d1, v1, d2, v2 = _single_dim_inputs(args)
        outcome = asyncio.run(run_singledim_protocol(d1, v1, d2, v2))
        expected = myerson_winner([d1, d2], [v1, v2])
        if (outcome.winner, outcome.price) != expected:
            logger.warning("protocol outcome %s differs from the direct computation %s",
                           (outcome.winner, outcome.price), expected)
        doc = TranscriptModel.from_transcript(
            outcome.transcript,
            winner=render_outcome(outcome.winner),
            price=outcome.price,
            values=[v1, v2],
        )
    else:
        d = _disj_from_args(args)
        outcome = asyncio.run(run_fulltransfer_protocol(d, certify=args.certify))
        doc = TranscriptModel.from_transcript(outcome.transcript, outcome=render_support(outcome.outcome))
    _emit(dump_document(doc), args.out)
    return EXIT_OK


def handle_disj(args) -> int:
    d = _disj_from_args(args)
    inst, _ = build_instance(d)
    if args.certify:
        certified = certified_auction(inst)
        if not certified.report.passed:
            print_error(f"No witnessed auction for {d}")
            return EXIT_FAILED
        support = outcome_support(certified.mechanism, LOWEST, LOWEST)
        mechanism = certified.mechanism.name
    else:
        support = select_outcome(inst, LOWEST, LOWEST, backend="flow")
        mechanism, _ = optimal_rule(inst)
    answer = support == frozenset({1})
    print("yes" if answer else "no")
    print_info(f"mechanism: {mechanism}")
    print_info(f"outcome at the lowest profile: {', '.join(render_support(support))}")
    print_info(f"intersections: {d.intersections or 'none'}")
    if answer != disj_oracle(d):
        print_error("auction answer disagrees with the direct DISJ computation")
        return EXIT_FAILED
    return EXIT_OK


def _verify_table(result) -> Table:
    table = Table(title=f"Verification (seed {result.config.seed}, N_min {result.n_min})")
    table.add_column("Check")
    table.add_column("Suite")
    table.add_column("Status")
    table.add_column("Pass", justify="right")
    table.add_column("Fail", justify="right")
    table.add_column("Skip", justify="right")
    table.add_column("First failure", overflow="fold")
    styles = {"pass": "green", "fail": "bold red", "skip": "dim"}
    for o in result.outcomes:
        table.add_row(
            o.name,
            o.suite,
            f"[{styles[o.status]}]{o.status}[/]",
            str(o.passed),
            str(o.failed),
            str(o.skipped),
            o.first_failure or "",
        )
    return table


def handle_verify(args) -> int:
    if args.list:
        from auctionlab_cli.docs import generate_check_reference

        _emit(generate_check_reference(), args.out)
        return EXIT_OK
    fields = {"seed": resolve_seed(args.seed), "trials": args.trials, "workers": args.workers}
    if args.n:
        fields["n_values"] = args.n
    if args.lp_n:
        fields["lp_n_values"] = args.lp_n
    if args.checks:
        fields["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    try:
        config = VerificationConfig(**fields)
    except ValidationError as exc:
        raise UsageError(f"Invalid verify options: {exc.errors()[0]['msg']}", {"fields": fields})
    metrics = CheckMetrics() if args.metrics else None
    result = run_verification(config, metrics=metrics)

    if args.format == "json":
        _emit(dump_document(VerificationModel.from_result(result)), args.out)
    elif args.format == "csv":
        _emit(
            render_csv(
                ["check", "suite", "status", "passed", "failed", "skipped", "first_failure"],
                [(o.name, o.suite, o.status, o.passed, o.failed, o.skipped, o.first_failure or "")
                 for o in result.outcomes],
            ),
            args.out,
        )
    else:
        Console().print(_verify_table(result))
    if metrics is not None:
        print(file=sys.stderr)
        print(metrics.get_report(), file=sys.stderr)
        print(f"Summary: {metrics.get_summary()}", file=sys.stderr)
    if result.passed:
        print_success(f"All {len(result.outcomes)} checks passed")
        return EXIT_OK
    failed = [o.name for o in result.outcomes if o.status == "fail"]
    print_error(f"Failed checks: {', '.join(failed)}")
    return EXIT_FAILED


HANDLERS = {
    "gen": handle_gen,
    "flow": handle_flow,
    "virtuals": handle_virtuals,
    "certify": handle_certify,
    "lp": handle_lp,
    "iron": handle_iron,
    "protocol": handle_protocol,
    "disj": handle_disj,
    "verify": handle_verify,
}


# ============ Parser ============


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Log progress through rich")
    common.add_argument("--seed", type=int, default=None, help="Random seed (default: $AUCTION_LAB_SEED or 0)")
    return common


def _add_disj_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--x", metavar="BITS", help="Alice's bits, e.g. 1001")
    parser.add_argument("--y", metavar="BITS", help="Bob's bits, e.g. 0110")
    parser.add_argument("--n", type=int, help="Length of a seeded random pair when --x/--y are omitted")


def _add_out(parser: argparse.ArgumentParser):
    parser.add_argument("--out", "-o", metavar="FILE", help="Write to FILE instead of stdout")


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser with subcommands."""
    parser = argparse.ArgumentParser(
        prog="auctionlab",
        description="Auction Lab - exact FedEx auctions, flow certificates and the DISJ reduction",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    common = _common_options()
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    gen = subparsers.add_parser(
        "gen",
        parents=[common],
        help="Build the instance for a DISJ input",
        epilog="""
Examples:
  auctionlab gen --x 10 --y 10 --out inst.json   # Instance JSON with traces
  auctionlab gen --n 16 --seed 7                 # Seeded random pair
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _add_disj_arguments(gen)
    _add_out(gen)

    flow = subparsers.add_parser("flow", parents=[common], help="Canonical or modified flow of an instance")
    flow.add_argument("instance", help="Instance file (JSON or YAML)")
    flow.add_argument("--modified", action="store_true", help="Boost to the modified flow")
    _add_out(flow)

    virtuals = subparsers.add_parser("virtuals", parents=[common], help="Virtual values under a flow")
    virtuals.add_argument("instance", help="Instance file (JSON or YAML)")
    virtuals.add_argument("--flow", metavar="FILE", help="Flow file (default: canonical flow)")
    virtuals.add_argument("--modified", action="store_true", help="Use the modified flow")
    virtuals.add_argument("--format", choices=["json", "csv"], default="json")
    _add_out(virtuals)

    certify = subparsers.add_parser("certify", parents=[common], help="Certify the optimal auction of an instance")
    certify.add_argument("instance", help="Instance file (JSON or YAML)")
    certify.add_argument("--flow", metavar="FILE", help="Check this flow instead of the automatic one")
    certify.add_argument(
        "--mechanism",
        choices=["auto", "spa1", "careful"],
        default="auto",
        help="Mechanism to certify (default: the one the pipeline picks)",
    )
    certify.add_argument("--k-star", type=int, help="Tie level for careful tie-breaking")
    _add_out(certify)

    lp = subparsers.add_parser("lp", parents=[common], help="Solve the revenue LP exactly")
    lp.add_argument("instance", help="Instance file (JSON or YAML)")
    lp.add_argument("--dump", metavar="FILE", help="Write the presolved LP as text")
    lp.add_argument(
        "--constraints",
        choices=["full", "local"],
        default="full",
        help="Every BIC row, or only the rows along flow edges",
    )
    _add_out(lp)

    iron_parser = subparsers.add_parser("iron", parents=[common], help="Iron a single-dimensional distribution")
    iron_parser.add_argument("distribution", nargs="?", help="Distribution file (JSON or YAML)")
    iron_parser.add_argument("--values", help="Comma-separated values, e.g. 5,6")
    iron_parser.add_argument("--probs", help="Comma-separated probabilities, e.g. 1/2,1/2")
    iron_parser.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_out(iron_parser)

    protocol = subparsers.add_parser(
        "protocol",
        parents=[common],
        help="Run a two-party protocol and report its transcript",
        epilog="""
Examples:
  auctionlab protocol --mode single-dim --d1 a.yaml --v1 5 --d2 b.yaml --v2 6
  auctionlab protocol --n 64 --seed 3            # Uniform bidders, seeded values
  auctionlab protocol --mode full --x 1001 --y 0110
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    protocol.add_argument("--mode", choices=["single-dim", "full"], default="single-dim")
    protocol.add_argument("--d1", metavar="FILE", help="Bidder One's distribution")
    protocol.add_argument("--d2", metavar="FILE", help="Bidder Two's distribution")
    protocol.add_argument("--v1", type=int, help="Bidder One's value")
    protocol.add_argument("--v2", type=int, help="Bidder Two's value")
    protocol.add_argument("--certify", action="store_true", help="Certify before selecting (full mode)")
    _add_disj_arguments(protocol)
    _add_out(protocol)

    disj = subparsers.add_parser("disj", parents=[common], help="Answer DISJ through the auction")
    _add_disj_arguments(disj)
    disj.add_argument("--certify", action="store_true", help="Run the full witness pipeline")

    verify = subparsers.add_parser(
        "verify",
        parents=[common],
        help="Run the verification sweep",
        epilog="""
Examples:
  auctionlab verify --n 16 --trials 50 --seed 7
  auctionlab verify --checks reduction,disj --format csv
  auctionlab verify --checks lp_flow_agreement --lp-n 11
  auctionlab verify --list                      # Check reference as Markdown
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    verify.add_argument("--n", type=int, nargs="+", help="Sizes to sweep (default: 8 16 24 32)")
    verify.add_argument("--lp-n", type=int, nargs="+", metavar="N", help="Sizes for the LP agreement check (default: none)")
    verify.add_argument("--trials", type=int, default=100, help="Random pairs per size")
    verify.add_argument("--checks", help="Comma-separated check or suite names (default: all)")
    verify.add_argument("--workers", type=int, default=1, help="Worker processes for case checks")
    verify.add_argument("--format", choices=["table", "json", "csv"], default="table")
    verify.add_argument("--list", action="store_true", help="Print the check reference and exit")
    verify.add_argument("--metrics", "-m", action="store_true", help="Print check timings to stderr")
    _add_out(verify)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and dispatch; returns the exit status."""
    parser = create_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    configure_logging(args.verbose)
    try:
        return HANDLERS[args.command](args)
    except UsageError as e:
        print_error(str(e))
        return EXIT_USAGE
    except AuctionLabError as e:
        print_error(f"Error: {e}")
        if args.verbose:
            traceback.print_exc()
        return EXIT_FAILED
    except KeyboardInterrupt:
        print_info("\nInterrupted by user")
        return EXIT_FAILED


def cli_main():
    """Entry point for CLI script"""
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
