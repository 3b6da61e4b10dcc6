# SPDX-License-Identifier: BSD-3-Clause

"""XML namespace and template of the pipeline configuration document."""

XML_PIPELINE_NS = { "dqc": "urn:pydqc:pipeline" }

XML_PIPELINE_VERSION = "1"

XML_PIPELINE_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<dqc:pipeline xmlns:dqc="urn:pydqc:pipeline" version="{version}">
</dqc:pipeline>"""
