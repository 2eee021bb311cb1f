from .model_lang import (ModelError, ModelSemanticError, ModelSource,
                         ModelSyntaxError, parse_model, serialize_model)
from .hoa import HoaError, HoaSource, emit_hoa, parse_hoa
from .tables import BenchRow, emit_result_table

__all__ = [
    "ModelError", "ModelSemanticError", "ModelSource", "ModelSyntaxError",
    "parse_model", "serialize_model",
    "HoaError", "HoaSource", "emit_hoa", "parse_hoa",
    "BenchRow", "emit_result_table",
]
