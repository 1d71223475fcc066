"""LDPC codes: parity-check matrices, encoders and a belief-propagation decoder."""

from .code import (
    BUILTIN_CODES,
    CodeLoadError,
    ParityCheckMatrix,
    builtin_code,
    dvbs2_short_r12,
    from_dense,
    ira_code,
    random_ira_table,
    load_code,
    read_address_table,
    read_alist,
    write_alist,
)
from .decoder import DEFAULT_CLIP, DecodeResult, SumProductDecoder, decode

__all__ = [
    "BUILTIN_CODES",
    "builtin_code",
    "random_ira_table",
    "CodeLoadError",
    "DEFAULT_CLIP",
    "DecodeResult",
    "ParityCheckMatrix",
    "SumProductDecoder",
    "decode",
    "dvbs2_short_r12",
    "from_dense",
    "ira_code",
    "load_code",
    "read_address_table",
    "read_alist",
    "write_alist",
]
