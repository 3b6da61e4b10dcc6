# SPDX-License-Identifier: BSD-3-Clause

"""Pipeline configuration and its XML document form."""

import logging

from dataclasses import dataclass, field, fields, asdict
from pathlib import Path

from lxml import etree

from .elements import SUPPORTED_ELEMENT_MODES
from .errors import DQCConfigError
from .schemas import EvolutionParams, ModelParams, RetentionRule
from .xml import XML_PIPELINE_NS, XML_PIPELINE_TEMPLATE, XML_PIPELINE_VERSION

logger = logging.getLogger(__name__)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "1", "yes", "on"):
        return True
    if value in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_components(text: str) -> tuple:
    return tuple(int(c) for c in text.replace(" ", "").split(",") if c)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(c) for c in value)
    return str(value)


def _option(kind, default = None, doc: str = "", check = None):
    return field(default = default, metadata = { "kind": kind, "doc": doc, "check": check })


@dataclass
class PipelineConfig:
    """
    Parameters of a full DQC run: ingestion, filtering, reduction,
    evolution, extraction and output.

    Every field maps to one element of the `urn:pydqc:pipeline` XML
    document and to one `--kebab-case` flag of `pydqc run`.
    """

    input: str = _option(str, None, "Data file (CSV or TSV).")

    sigma: float = _option(float, None, "Width of the Gaussian states.", lambda v: v > 0)

    delimiter: str|None = _option(str, None, "Field delimiter, inferred from the file suffix by default.",
        lambda v: len(v) == 1)

    header: bool = _option(_parse_bool, True, "First row holds column names.")

    label_column: str|None = _option(str, None, "Column holding expert labels.")

    id_column: str|None = _option(str, None, "Column holding record identifiers.")

    components: tuple = _option(_parse_components, (1, 2, 3), "1-based SVD components, e.g. 2,3,4.",
        lambda v: len(v) > 0 and all(c >= 1 for c in v))

    rescale: bool = _option(_parse_bool, True, "Rescale reduced rows to unit length.")

    weighted: bool = _option(_parse_bool, False, "Use rows of U·S instead of U.")

    filter_stages: int = _option(int, 0, "SVD-entropy filtering stages (0 disables).", lambda v: v >= 0)

    filter_threshold: float = _option(float, 0.0, "Retention rule standard deviation multiplier.")

    mass: float|None = _option(float, None, "Evolution mass, 1/sigma² by default.", lambda v: v > 0)

    dt: float = _option(float, 0.1, "Timestep.", lambda v: v > 0)

    steps: int = _option(int, 40, "Timesteps per stage.", lambda v: v >= 1)

    stages: int = _option(int, 1, "Stop-and-restart DQC stages.", lambda v: v >= 1)

    basis_cutoff: float = _option(float, 1e-6, "Relative Gram eigenvalue cutoff.", lambda v: 0 < v < 1)

    elements: str = _option(str, "midpoint", "Potential element mode.", lambda v: v in SUPPORTED_ELEMENT_MODES)

    samples: int = _option(int, 64, "Samples (sampled) or nodes per axis (hermite).", lambda v: v >= 1)

    seed: int = _option(int, 0, "Seed of the sampled element mode.")

    representative_threshold: float = _option(float, 0.0,
        "Representative residual threshold, 0 disables the subset path.", lambda v: 0 <= v < 1)

    rescale_sigma: bool = _option(_parse_bool, False, "Scale sigma with the spread of contracting points.")

    early_stop: bool = _option(_parse_bool, False, "Stop a stage once the points settle.")

    epsilon: float|None = _option(float, None, "Cluster linkage distance.", lambda v: v > 0)

    epsilon_fraction: float = _option(float, 0.05, "Linkage distance as a fraction of the diameter.", lambda v: v > 0)

    output: str = _option(str, "dqc-output", "Output directory.")

    export_frames: bool = _option(_parse_bool, False, "Write per-step frames as JSON lines.")

    export_model: bool = _option(_parse_bool, False, "Write the quantum model of every stage as JSON.")

    # -------------

    @classmethod
    def from_mapping(cls, values: dict) -> 'PipelineConfig':
        """
        Build a configuration from raw key-value pairs.

        String values are parsed with the field's parser; other values are
        taken as they are.

        Raises:
            DQCConfigError: On unknown keys, unparsable values, missing
                required keys or out-of-range values.
        """
        known = { f.name: f for f in fields(cls) }
        parsed = {}
        for key, value in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise DQCConfigError("UNKNOWN_KEY", f"({key})")
            if isinstance(value, str):
                try:
                    kind = known[key].metadata["kind"]
                    value = kind(value if kind is str else value.strip())
                except ValueError as exc:
                    raise DQCConfigError("INVALID_VALUE", f"({key}: {exc})")
            elif known[key].metadata["kind"] is float and isinstance(value, int) and not isinstance(value, bool):
                value = float(value)
            parsed[key] = value

        config = cls(**parsed)
        config.validate()
        return config

    def validate(self):
        for name in ("input", "sigma"):
            if getattr(self, name) is None:
                raise DQCConfigError("MALFORMED", f"(missing required key {name})")
        for f in fields(self):
            value, check = getattr(self, f.name), f.metadata["check"]
            if value is not None and check is not None and not check(value):
                logger.error(f"[pydqc][config] {f.name}={value!r} out of range")
                raise DQCConfigError("OUT_OF_RANGE", f"({f.name}={_format(value)})")
        if self.elements == "hermite" and self.samples ** len(self.components) > 4096:
            raise DQCConfigError("OUT_OF_RANGE", f"(samples={self.samples} hermite nodes in {len(self.components)} dimensions)")

    # -------------

    def model_params(self) -> ModelParams:
        return ModelParams(self.sigma, self.mass, self.basis_cutoff, self.elements, self.samples, self.seed)

    def evolution_params(self) -> EvolutionParams:
        return EvolutionParams(self.dt, self.steps, self.stages, self.early_stop)

    def retention_rule(self) -> RetentionRule:
        return RetentionRule(self.filter_threshold)

    # -------------

    def to_xml(self) -> bytes:
        """Serialize to the pipeline XML document. Keys left at None are omitted."""
        root = etree.fromstring(XML_PIPELINE_TEMPLATE.format(version = XML_PIPELINE_VERSION).encode())
        for key, value in asdict(self).items():
            if value is None:
                continue
            el = etree.SubElement(root, f"{{{XML_PIPELINE_NS['dqc']}}}{key}")
            el.text = _format(value)
        etree.indent(root, space = "    ")
        return etree.tostring(root, xml_declaration = True, encoding = "UTF-8", pretty_print = True)

    @classmethod
    def from_xml(cls, content: bytes|str, overrides: dict|None = None) -> 'PipelineConfig':
        """Parse a pipeline document; `overrides` take precedence over its keys."""
        if isinstance(content, str):
            content = content.encode()
        try:
            root = etree.fromstring(content)
        except etree.XMLSyntaxError as exc:
            raise DQCConfigError("MALFORMED", str(exc))
        if root.tag != f"{{{XML_PIPELINE_NS['dqc']}}}pipeline":
            raise DQCConfigError("MALFORMED", f"(unexpected root element {root.tag})")

        values = {}
        for child in root:
            if not isinstance(child.tag, str):
                continue
            if etree.QName(child).namespace != XML_PIPELINE_NS["dqc"]:
                raise DQCConfigError("UNKNOWN_KEY", f"({child.tag})")
            values[etree.QName(child).localname] = child.text or ""
        values.update(overrides or {})
        return cls.from_mapping(values)

    @classmethod
    def load(cls, path, overrides: dict|None = None) -> 'PipelineConfig':
        return cls.from_xml(Path(path).read_bytes(), overrides)

    def dump(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_xml())
        return path
