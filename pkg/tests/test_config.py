import pytest

from lxml import etree

from .fixtures import *

from pydqc.config import PipelineConfig
from pydqc.errors import DQCConfigError
from pydqc.xml import XML_PIPELINE_NS

def _document(*elements: str) -> str:
    body = "".join(elements)
    return f'<dqc:pipeline xmlns:dqc="{XML_PIPELINE_NS["dqc"]}" version="1">{body}</dqc:pipeline>'

# ===========================
# Testing from_mapping
# ===========================

def test_from_mapping_defaults():
    config = PipelineConfig.from_mapping({ "input": "data.csv", "sigma": "0.5" })
    assert config.sigma == 0.5
    assert config.components == (1, 2, 3)
    assert config.mass is None
    assert config.model_params().mass == pytest.approx(4.0)
    assert config.evolution_params().steps == 40
    assert config.retention_rule().multiplier == 0.0

def test_from_mapping_parses_strings():
    config = PipelineConfig.from_mapping({
        "input": "data.csv", "sigma": "0.07", "components": "2, 3,4", "rescale": "no",
        "filter-stages": "2", "epsilon_fraction": "0.1", "delimiter": "\t",
    })
    assert config.components == (2, 3, 4)
    assert config.rescale is False
    assert config.filter_stages == 2
    assert config.epsilon_fraction == 0.1
    assert config.delimiter == "\t"

def test_from_mapping_unknown_key():
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_mapping({ "input": "a.csv", "sigma": 1, "temperature": "3" })
    assert exc.value.code == "UNKNOWN_KEY"
    assert "temperature" in str(exc.value)

@pytest.mark.parametrize("key, value", [("sigma", "wide"), ("steps", "2.5"), ("header", "maybe")])
def test_from_mapping_invalid_value(key, value):
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_mapping({ "input": "a.csv", "sigma": "1", key: value })
    assert exc.value.code == "INVALID_VALUE"

@pytest.mark.parametrize("key, value", [
    ("sigma", 0.0),
    ("dt", -0.1),
    ("steps", 0),
    ("basis_cutoff", 1.0),
    ("elements", "trapezoid"),
    ("components", (0, 1)),
    ("representative_threshold", 1.0),
    ("delimiter", ";;"),
])
def test_from_mapping_out_of_range(key, value):
    values = { "input": "a.csv", "sigma": 1.0 }
    values[key] = value
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_mapping(values)
    assert exc.value.code == "OUT_OF_RANGE"

def test_from_mapping_missing_required():
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_mapping({ "input": "a.csv" })
    assert exc.value.code == "MALFORMED"

def test_hermite_node_limit():
    values = { "input": "a.csv", "sigma": 1.0, "elements": "hermite" }
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_mapping(values)
    assert exc.value.code == "OUT_OF_RANGE"
    config = PipelineConfig.from_mapping({ **values, "samples": 16 })
    assert config.model_params().elements == "hermite"

def test_config_error_is_value_error():
    with pytest.raises(ValueError):
        PipelineConfig.from_mapping({ "input": "a.csv", "sigma": -1.0 })

# ===========================
# Testing the XML document
# ===========================

def test_xml_round_trip(tmp_path):
    config = PipelineConfig.from_mapping({
        "input": "crabs.csv", "sigma": 0.07, "mass": 0.2, "components": (2, 3, 4), "label_column": "sp",
        "steps": 100, "stages": 3, "early_stop": True, "delimiter": "\t",
    })
    path = config.dump(tmp_path / "config.xml")
    assert PipelineConfig.load(path) == config

def test_xml_omits_unset_keys():
    root = etree.fromstring(PipelineConfig.from_mapping({ "input": "a.csv", "sigma": 0.3 }).to_xml())
    assert root.get("version") == "1"
    names = [etree.QName(child).localname for child in root]
    assert "sigma" in names
    assert "mass" not in names
    assert root.find("dqc:sigma", XML_PIPELINE_NS).text == "0.3"

def test_xml_overrides_take_precedence():
    content = _document("<dqc:input>a.csv</dqc:input>", "<dqc:sigma>0.3</dqc:sigma>", "<dqc:steps>10</dqc:steps>")
    config = PipelineConfig.from_xml(content, { "steps": 25, "epsilon-fraction": "0.2" })
    assert config.sigma == 0.3
    assert config.steps == 25
    assert config.epsilon_fraction == 0.2

def test_xml_missing_sigma():
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_xml(_document("<dqc:input>a.csv</dqc:input>"))
    assert exc.value.code == "MALFORMED"

@pytest.mark.parametrize("content", [
    "<dqc:pipeline",
    "<pipeline><sigma>1</sigma></pipeline>",
])
def test_xml_malformed(content):
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_xml(content)
    assert exc.value.code == "MALFORMED"

def test_xml_foreign_element():
    content = _document("<dqc:input>a.csv</dqc:input>", "<dqc:sigma>1</dqc:sigma>", '<x:sigma xmlns:x="urn:other">2</x:sigma>')
    with pytest.raises(DQCConfigError) as exc:
        PipelineConfig.from_xml(content)
    assert exc.value.code == "UNKNOWN_KEY"

def test_xml_ignores_comments():
    content = _document("<!-- crab run -->", "<dqc:input>a.csv</dqc:input>", "<dqc:sigma>1</dqc:sigma>")
    assert PipelineConfig.from_xml(content).sigma == 1.0
