"""Certified rational brackets for L2-invariants of matrices over group rings."""

from .errors import (
    BudgetExceeded,
    CapabilityMissing,
    ComplexError,
    FuelExhausted,
    InputFileError,
    L2CertError,
    MemoryBudgetExceeded,
    MonotonicityViolation,
    QuotientCapExhausted,
    WordSyntaxError,
)
from .groupring import GroupRingElement, GroupRingMatrix, SpectralMoments, coeff_one_norm, gram, parse_element, trace
from .homology import (
    ComplexInclusion,
    FinPresComplex,
    betti_estimate,
    dim_im_homology,
    fox_presentation_complex,
    validate_complex,
)
from .lueck import LueckStream, finite_dimker, lueck_error_bound, lueck_stream
from .oracles import (
    WordOracle,
    oracle_direct_product,
    oracle_finite,
    oracle_fp_residually_finite,
    oracle_free,
    oracle_free_abelian,
    oracle_lamplighter,
    sofic_certificate,
)
from .quotients import FiniteQuotient, symmetric_group
from .reals import RealStream, bracket_to_effective, detect_divergence, to_binary_expansion
from .spectral import (
    Budget,
    TorsionInput,
    char_seq,
    dimker_bracket,
    dimker_lower_term,
    dimker_upper,
    fk_logdet_partial,
    torsion_estimate,
)
from .words import Alphabet, Word, parse_word

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "betti_estimate",
    "bracket_to_effective",
    "Budget",
    "BudgetExceeded",
    "CapabilityMissing",
    "char_seq",
    "coeff_one_norm",
    "ComplexError",
    "ComplexInclusion",
    "detect_divergence",
    "dim_im_homology",
    "dimker_bracket",
    "dimker_lower_term",
    "dimker_upper",
    "finite_dimker",
    "FiniteQuotient",
    "FinPresComplex",
    "fk_logdet_partial",
    "fox_presentation_complex",
    "FuelExhausted",
    "gram",
    "GroupRingElement",
    "GroupRingMatrix",
    "InputFileError",
    "L2CertError",
    "lueck_error_bound",
    "lueck_stream",
    "LueckStream",
    "MemoryBudgetExceeded",
    "MonotonicityViolation",
    "oracle_direct_product",
    "oracle_finite",
    "oracle_fp_residually_finite",
    "oracle_free",
    "oracle_free_abelian",
    "oracle_lamplighter",
    "parse_element",
    "parse_word",
    "QuotientCapExhausted",
    "RealStream",
    "sofic_certificate",
    "SpectralMoments",
    "symmetric_group",
    "to_binary_expansion",
    "torsion_estimate",
    "TorsionInput",
    "trace",
    "validate_complex",
    "Word",
    "WordOracle",
    "WordSyntaxError",
]
