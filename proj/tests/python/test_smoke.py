"""Smoke tests for the Python face of the toolkit."""

import json
import math
import os
import xml.etree.ElementTree as ET

import pytest

import metacsv

FIXTURES = os.environ.get(
    "METACSV_FIXTURE_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "fixtures"),
)


def read_fixture(name):
    with open(os.path.join(FIXTURES, name)) as fh:
        return fh.read()


def load_expected(name):
    with open(os.path.join(FIXTURES, "expected", name + ".json")) as fh:
        return json.load(fh)


def test_version():
    assert metacsv.__version__ == "0.1.0"


def test_guess_separator():
    assert metacsv.guess_separator("a,b\n1,2") == ","
    assert metacsv.guess_separator("a;b\n1;2") == ";"
    with pytest.raises(metacsv.MetaCsvError):
        metacsv.guess_separator("no separators")


def test_parse_and_analyze_matches_oracle():
    result = metacsv.analyze_csv(read_fixture("canonical-3.csv"))
    expected = load_expected("canonical-3")
    assert result.fixed.effect == pytest.approx(expected["fixed"]["effect"], rel=1e-10)
    assert result.random.se == pytest.approx(expected["random"]["se"], rel=1e-10)
    assert result.heterogeneity.tau2 == pytest.approx(
        expected["heterogeneity"]["tau2"], rel=1e-10
    )
    assert len(result.estimates) == 3
    assert result.estimates[0].study_label == "Alpha 1999"


def test_parse_table_surface():
    table = metacsv.parse_table(read_fixture("continuous-2.csv"))
    assert len(table) == 2
    assert table.separator == ","
    assert table.records[0].label == "Smith 2001"
    assert table.records[0].group1.n == 12
    roundtrip = metacsv.parse_table(metacsv.write_csv(table))
    assert roundtrip.records[0].label == "Smith 2001"


def test_overrides_win():
    table = metacsv.parse_table(read_fixture("continuous-2.csv"),
                                overrides={"group1_n": 4})
    assert table.records[0].group1.n == 14


def test_effects():
    est = metacsv.smd(10, 1.0, 1.0, 10, 0.0, 1.0, variant="cohen")
    assert est.effect == pytest.approx(1.0)
    assert est.variance == pytest.approx(0.225)
    est = metacsv.smd(10, 1.0, 1.0, 10, 0.0, 1.0)
    assert est.effect == pytest.approx(1.0 - 3.0 / 71.0)
    lor = metacsv.log_odds_ratio(10, 20, 10, 20)
    assert lor.effect == pytest.approx(0.0)
    lvr = metacsv.log_variance_ratio(11, 2.0, 11, 1.0)
    assert lvr.effect == pytest.approx(math.log(2.0))


def test_pooling_kernel():
    fixed = metacsv.pool_fixed([0.0, 1.0], [0.1, 0.1])
    assert fixed.effect == pytest.approx(0.5)
    het = metacsv.heterogeneity([0.0, 1.0], [0.1, 0.1])
    assert het.Q == pytest.approx(5.0)
    assert het.tau2 == pytest.approx(0.4)
    assert het.I2 == pytest.approx(80.0)
    random = metacsv.pool_random_dl([0.0, 1.0], [0.1, 0.1])
    assert random.se == pytest.approx(0.5)


def test_exports_and_plots_are_valid():
    result = metacsv.analyze_csv(read_fixture("continuous-2.csv"))
    doc = json.loads(metacsv.to_json(result))
    assert list(doc.keys()) == [
        "measure", "title", "studies", "fixed", "random", "heterogeneity",
    ]
    csv_text = metacsv.to_csv(result)
    assert csv_text.count("\n") == len(result.estimates) + 3

    for svg in (metacsv.forest_svg(result), metacsv.funnel_svg(result)):
        root = ET.fromstring(svg)  # throws on malformed XML
        assert root.tag.endswith("svg")
        assert root.get("width") is not None

    points = [metacsv.MassPoint("a", 0.5, 0.1, 100),
              metacsv.MassPoint("b", 0.1, 0.3, 50)]
    mass = metacsv.labbe_mass_svg(points)
    assert ET.fromstring(mass) is not None
    assert points[0].significant
    assert not points[1].significant


def test_r_script():
    table = metacsv.parse_table(read_fixture("continuous-2.csv"))
    script = metacsv.to_r_script(table)
    assert "library(meta)" in script
    assert "metacont(" in script
    with pytest.raises(metacsv.MetaCsvError):
        metacsv.to_r_script(table, measure="log_variance_ratio")


def test_error_codes_in_messages():
    with pytest.raises(metacsv.MetaCsvError) as err:
        metacsv.analyze_csv(read_fixture("binary-2.csv"), measure="smd")
    assert "MissingRequiredColumns" in str(err.value)


def test_stats_functions():
    assert metacsv.normal_cdf(0.0) == pytest.approx(0.5)
    assert metacsv.chi_square_sf(5.0, 1) == pytest.approx(0.02534731867746827, rel=1e-10)
