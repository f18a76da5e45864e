"""JSON/YAML documents and CSV tables read and written by the CLI.

Every rational travels as a lowest-terms ``"p/q"`` string, so a document
written by one command and read by another round-trips exactly.
"""

from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any, Iterable, Optional, Sequence, TextIO, TypeVar
import csv
import io
import json

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    ValidationError,
    WithJsonSchema,
)

from .certificate import CertificateReport, CheckResult
from .channel import Transcript
from .duality import BidderFlow, Flow, VirtualValueTable
from .errors import UsageError
from .mechanisms import Mechanism
from .myerson import IronedTable, SingleDimDistribution, make_distribution, single_dim_virtuals
from .numerics import BidderSpec, Instance, make_bidder, make_instance, parse_rational, render_rational
from .reduction import DisjInput, ReductionTrace, ReductionTraces, render_bits

Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(render_rational, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+(/\d+)?$"}),
]

Model = TypeVar("Model", bound=BaseModel)


class Document(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ============ Instances ============


class BidderModel(Document):
    values: list[int]
    day1: list[Rational]
    day2: list[Rational]

    @classmethod
    def from_spec(cls, spec: BidderSpec) -> "BidderModel":
        return cls(values=list(spec.values), day1=list(spec.day1), day2=list(spec.day2))

    def to_spec(self) -> BidderSpec:
        return make_bidder(self.values, self.day1, self.day2)


class TraceModel(Document):
    kind: str
    n: int
    b: int
    a: Rational
    z: list[Rational]
    scaled_probs: list[int]
    scale: int
    bits: Optional[str] = None

    @classmethod
    def from_trace(cls, trace: ReductionTrace) -> "TraceModel":
        return cls(
            kind=trace.kind,
            n=trace.n,
            b=trace.b,
            a=trace.a,
            z=list(trace.z),
            scaled_probs=list(trace.scaled_probs),
            scale=trace.scale,
            bits=None if trace.bits is None else render_bits(trace.bits),
        )


class InstanceModel(Document):
    bidder1: BidderModel
    bidder2: BidderModel
    x: Optional[str] = None
    y: Optional[str] = None
    traces: list[TraceModel] = Field(default_factory=list)

    @classmethod
    def from_instance(
        cls,
        inst: Instance,
        d: Optional[DisjInput] = None,
        traces: Optional[ReductionTraces] = None,
    ) -> "InstanceModel":
        return cls(
            bidder1=BidderModel.from_spec(inst.bidder1),
            bidder2=BidderModel.from_spec(inst.bidder2),
            x=None if d is None else render_bits(d.x),
            y=None if d is None else render_bits(d.y),
            traces=[] if traces is None else [TraceModel.from_trace(t) for t in traces],
        )

    def to_instance(self) -> Instance:
        """Validated Instance (raises InstanceError subclasses)."""
        return make_instance(self.bidder1.to_spec(), self.bidder2.to_spec())

    def disj_input(self) -> Optional[DisjInput]:
        if self.x is None or self.y is None:
            return None
        return DisjInput.from_text(self.x, self.y)


# ============ Flows and virtual values ============


class BidderFlowModel(Document):
    alpha: list[Rational]
    lambda1: list[Rational]
    lambda2: list[Rational]


class FlowModel(Document):
    kind: str = "canonical"
    bidder1: BidderFlowModel
    bidder2: BidderFlowModel
    eps: Optional[Rational] = None
    k_star: Optional[int] = None

    @classmethod
    def from_flow(
        cls, fl: Flow, kind: str = "canonical", eps: Optional[Fraction] = None, k_star: Optional[int] = None
    ) -> "FlowModel":
        def one(bf: BidderFlow) -> BidderFlowModel:
            return BidderFlowModel(alpha=list(bf.alpha), lambda1=list(bf.lambda1), lambda2=list(bf.lambda2))

        return cls(kind=kind, bidder1=one(fl.bidder(1)), bidder2=one(fl.bidder(2)), eps=eps, k_star=k_star)

    def to_flow(self) -> Flow:
        return Flow(
            tuple(
                BidderFlow(tuple(m.alpha), tuple(m.lambda1), tuple(m.lambda2))
                for m in (self.bidder1, self.bidder2)
            )
        )


class VirtualValueRow(Document):
    bidder: int
    type: str
    mass: Rational
    phi: Rational


def virtual_value_rows(inst: Instance, vv: VirtualValueTable) -> list[VirtualValueRow]:
    rows = []
    for i in (1, 2):
        spec = inst.bidder(i)
        for label, phi in vv.items(i):
            rows.append(VirtualValueRow(bidder=i, type=str(label), mass=spec.f(label.k, label.interest), phi=phi))
    return rows


# ============ Certificates ============


class CheckResultModel(Document):
    condition: str
    location: str
    lhs: Optional[Rational] = None
    rhs: Optional[Rational] = None
    relation: str = ""
    passed: bool

    @classmethod
    def from_result(cls, result: CheckResult) -> "CheckResultModel":
        return cls(
            condition=result.condition,
            location=result.location,
            lhs=result.lhs,
            rhs=result.rhs,
            relation=result.relation,
            passed=result.passed,
        )


class CertificateModel(Document):
    mechanism: str
    flow: str
    passed: bool
    revenue: Optional[Rational] = None
    lagrangian: Optional[Rational] = None
    eps: Optional[Rational] = None
    k_star: Optional[int] = None
    failures: list[str] = Field(default_factory=list)
    checks: list[CheckResultModel] = Field(default_factory=list)

    @classmethod
    def from_report(cls, report: CertificateReport, **fields: Any) -> "CertificateModel":
        return cls(
            passed=report.passed,
            failures=[c.describe() for c in report.failures],
            checks=[CheckResultModel.from_result(c) for c in report.checks],
            **fields,
        )


# ============ LP ============


class AllocationRow(Document):
    """Outcome probabilities at one non-null profile."""

    t1: str
    t2: str
    bidder1: Rational
    bidder2: Rational
    none: Rational


def allocation_rows(inst: Instance, m: Mechanism) -> list[AllocationRow]:
    rows = []
    for t1 in inst.bidder1.labels():
        for t2 in inst.bidder2.labels():
            x1, x2 = m.alloc(1, t1.flat, t2.flat), m.alloc(2, t1.flat, t2.flat)
            rows.append(AllocationRow(t1=str(t1), t2=str(t2), bidder1=x1, bidder2=x2, none=1 - x1 - x2))
    return rows


class LPResultModel(Document):
    value: Rational
    pivots: int
    constraint_set: str = "full"
    variables: int
    constraints: int
    outcome_at_lowest: list[str]
    payments: dict[str, Rational] = Field(default_factory=dict)
    allocation: list[AllocationRow] = Field(default_factory=list)


def render_outcome(outcome: Optional[int]) -> str:
    return "none" if outcome is None else f"bidder{outcome}"


def render_support(support: Iterable[Optional[int]]) -> list[str]:
    return sorted(render_outcome(o) for o in support)


# ============ Single-dimensional ============


class DistributionModel(Document):
    values: list[int]
    probs: list[Rational]

    def to_distribution(self) -> SingleDimDistribution:
        return make_distribution(self.values, self.probs)

    @classmethod
    def from_distribution(cls, d: SingleDimDistribution) -> "DistributionModel":
        return cls(values=list(d.values), probs=list(d.probs))


class IronedModel(Document):
    values: list[int]
    probs: list[Rational]
    phi: list[Rational]
    phi_bar: list[Rational]
    intervals: list[tuple[int, int]]

    @classmethod
    def from_distribution(cls, d: SingleDimDistribution, table: IronedTable) -> "IronedModel":
        return cls(
            values=list(d.values),
            probs=list(d.probs),
            phi=list(single_dim_virtuals(d)),
            phi_bar=list(table.phi_bar),
            intervals=[tuple(b) for b in table.intervals],
        )


class MessageModel(Document):
    sender: str
    bits: str


class TranscriptModel(Document):
    mode: str
    total_bits: int
    bits_by_party: dict[str, int]
    messages: list[MessageModel]
    winner: Optional[str] = None
    price: Optional[Rational] = None
    outcome: list[str] = Field(default_factory=list)
    values: list[int] = Field(default_factory=list)

    @classmethod
    def from_transcript(cls, t: Transcript, **fields: Any) -> "TranscriptModel":
        return cls(
            mode=t.mode,
            total_bits=t.total_bits,
            bits_by_party={s: t.bits_by(s) for s in t.senders()},
            messages=[MessageModel(sender=m.sender, bits=m.bits) for m in t.messages],
            **fields,
        )


# ============ Verification ============


class CheckOutcomeModel(Document):
    name: str
    suite: str
    claim: str
    status: str
    passed: int
    failed: int
    skipped: int
    first_failure: Optional[str] = None


class VerificationModel(Document):
    passed: bool
    seed: int
    n_values: list[int]
    trials: int
    n_min: Optional[int] = None
    checks: list[CheckOutcomeModel]
    notes: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_result(cls, result) -> "VerificationModel":
        return cls(
            passed=result.passed,
            seed=result.config.seed,
            n_values=result.config.n_values,
            trials=result.config.trials,
            n_min=result.n_min,
            checks=[
                CheckOutcomeModel(
                    name=o.name,
                    suite=o.suite,
                    claim=o.claim,
                    status=o.status,
                    passed=o.passed,
                    failed=o.failed,
                    skipped=o.skipped,
                    first_failure=o.first_failure,
                )
                for o in result.outcomes
            ],
            notes=json.loads(json.dumps(result.notes, default=str)),
        )


# ============ IO ============


def _load_raw(path: Path) -> Any:
    text = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    if suffix in (".yaml", ".yml"):
        return yaml.safe_load(text)
    if suffix == ".json":
        return json.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return yaml.safe_load(text)


def load_document(path: str | Path, model: type[Model]) -> Model:
    """Read a JSON or YAML document into ``model`` (format by suffix)."""
    path = Path(path)
    if not path.exists():
        raise UsageError(f"File not found: {path}", {"path": str(path)})
    try:
        raw = _load_raw(path)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise UsageError(f"Cannot parse {path}: {exc}", {"path": str(path)})
    try:
        return model.model_validate(raw)
    except ValidationError as exc:
        raise UsageError(
            f"{path} is not a valid {model.__name__}: {exc.error_count()} error(s)\n{exc}",
            {"path": str(path)},
        )


def dump_document(doc: BaseModel) -> str:
    return doc.model_dump_json(indent=2) + "\n"


def write_text(content: str, out: Optional[str | Path] = None, stream: Optional[TextIO] = None) -> None:
    """Write to ``out`` if given (UTF-8), else to ``stream``."""
    if out is not None:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    elif stream is not None:
        stream.write(content)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Comma-separated table with a header row; Fractions render as ``p/q``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([render_rational(v) if isinstance(v, Fraction) else v for v in row])
    return buffer.getvalue()
