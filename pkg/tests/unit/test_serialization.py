"""Tests for JSON/YAML documents and CSV tables."""

from fractions import Fraction
import io

import pytest

from auctionlab import build_instance, canonical_flow, certified_auction, iron, make_distribution, virtual_values
from auctionlab.errors import UsageError
from auctionlab.serialization import (
    CertificateModel,
    DistributionModel,
    FlowModel,
    InstanceModel,
    IronedModel,
    dump_document,
    load_document,
    render_csv,
    render_outcome,
    render_support,
    virtual_value_rows,
    write_text,
)


class TestRationalFields:
    def test_rationals_serialize_as_text(self):
        doc = DistributionModel(values=[5, 6], probs=["1/2", Fraction(1, 2)])
        assert '"1/2"' in doc.model_dump_json()
        assert doc.probs == [Fraction(1, 2), Fraction(1, 2)]

    def test_integers_accepted(self):
        assert DistributionModel(values=[1], probs=[1]).probs == [1]

    def test_malformed_rational_rejected(self):
        with pytest.raises(Exception):
            DistributionModel(values=[1], probs=["0.5"])

    def test_extra_fields_forbidden(self):
        with pytest.raises(Exception):
            DistributionModel(values=[1], probs=["1"], colour="red")


class TestInstanceDocuments:
    def test_instance_round_trip(self, small_input, small_instance, tmp_path):
        inst, traces = small_instance
        path = tmp_path / "inst.json"
        write_text(dump_document(InstanceModel.from_instance(inst, small_input, traces)), path)
        loaded = load_document(path, InstanceModel)
        assert loaded.to_instance() == inst
        assert loaded.disj_input() == small_input
        assert loaded.traces[0].scaled_probs == [32, 205, 205, 198]
        assert loaded.traces[1].bits == "10"

    def test_yaml_instance(self, tmp_path):
        path = tmp_path / "inst.yaml"
        path.write_text(
            "bidder1:\n  values: [5, 6]\n  day1: ['1/2', '1/2']\n  day2: ['0', '0']\n"
            "bidder2:\n  values: [5, 6]\n  day1: ['1/4', '3/4']\n  day2: ['0', '0']\n"
        )
        inst = load_document(path, InstanceModel).to_instance()
        assert inst.bidder2.day1 == (Fraction(1, 4), Fraction(3, 4))
        assert load_document(path, InstanceModel).disj_input() is None

    def test_flow_round_trip(self, small_instance):
        inst, _ = small_instance
        fl = canonical_flow(inst)
        doc = FlowModel.model_validate_json(dump_document(FlowModel.from_flow(fl)))
        assert doc.to_flow() == fl
        assert doc.kind == "canonical"

    def test_virtual_value_rows(self, small_instance):
        inst, _ = small_instance
        rows = virtual_value_rows(inst, virtual_values(inst, canonical_flow(inst)))
        c2 = next(r for r in rows if r.bidder == 1 and r.type == "(v2,1)")
        assert c2.phi == Fraction(827, 205)
        assert c2.mass == Fraction(205, 1280)

    def test_certificate(self, disjoint_large):
        inst, _ = build_instance(disjoint_large)
        certified = certified_auction(inst)
        doc = CertificateModel.from_report(certified.report, mechanism="spa1", flow="canonical")
        assert doc.passed
        assert doc.checks


class TestLoadErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_document(tmp_path / "absent.json", InstanceModel)

    def test_unparsable(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(UsageError):
            load_document(path, InstanceModel)

    def test_invalid_shape(self, tmp_path):
        path = tmp_path / "dist.yaml"
        path.write_text("values: [1, 2]\n")
        with pytest.raises(UsageError) as exc_info:
            load_document(path, DistributionModel)
        assert exc_info.value.context["path"] == str(path)

    def test_suffixless_falls_back_to_yaml(self, tmp_path):
        path = tmp_path / "dist"
        path.write_text("values: [1]\nprobs: ['1']\n")
        assert load_document(path, DistributionModel).to_distribution().values == (1,)


class TestTables:
    def test_render_csv(self):
        text = render_csv(["bidder", "phi"], [(1, Fraction(-14)), (2, Fraction(827, 205))])
        assert text == "bidder,phi\n1,-14/1\n2,827/205\n"

    def test_ironed_model(self):
        d = make_distribution([1, 2, 3], ["1/2", "1/10", "2/5"])
        doc = IronedModel.from_distribution(d, iron(d))
        assert doc.intervals == [(1, 2), (3, 3)]
        assert doc.phi == [0, -2, 3]

    def test_outcome_rendering(self):
        assert render_outcome(None) == "none"
        assert render_outcome(2) == "bidder2"
        assert render_support(frozenset({None, 1})) == ["bidder1", "none"]

    def test_write_to_stream(self):
        stream = io.StringIO()
        write_text("hello\n", None, stream)
        assert stream.getvalue() == "hello\n"
