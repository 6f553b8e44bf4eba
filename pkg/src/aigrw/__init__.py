"""aigrw: size-driven AIG rewriting with window resynthesis and MCTS."""

from aigrw.aig import (
    Aig,
    AigerParseError,
    CecArityError,
    Lit,
    TruthTable,
    cec,
    first_mismatch,
    parse_aiger,
    parse_truth_hex,
    read_truth_hex_file,
    write_aiger,
)

__version__ = "0.1.0"

__all__ = [
    "Aig",
    "AigerParseError",
    "CecArityError",
    "Lit",
    "TruthTable",
    "cec",
    "first_mismatch",
    "parse_aiger",
    "parse_truth_hex",
    "read_truth_hex_file",
    "write_aiger",
    "__version__",
]
