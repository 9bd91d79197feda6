"""Parsers and serializers for the three artifact file formats.

* ``.mm`` - metamodel declarations (:mod:`regraft.formats.metamodel_format`)
* ``.gm`` - instance graphs in canonical line form
  (:mod:`regraft.formats.model_format`)
* ``.tfm`` - transformations: rules and units
  (:mod:`regraft.formats.tfm_format`)
"""

from .metamodel_format import parse_metamodel
from .model_format import parse_model, serialize_model
from .tfm_format import TransformationFile, parse_transformation

__all__ = [
    "parse_metamodel",
    "parse_model",
    "serialize_model",
    "parse_transformation",
    "TransformationFile",
]
