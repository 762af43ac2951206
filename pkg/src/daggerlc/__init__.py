"""The dagger lambda calculus: sequents, soup rewriting and a matrix model."""

from .syntax import (
    I,
    Atom,
    Connection,
    DLCError,
    LinearityError,
    Sequent,
    TypingError,
    alpha_equiv,
    canonicalize,
    validate,
)
from .surface import ParseError, parse_sequent, parse_signature, parse_type, print_sequent
from .rewrite import normal_form, normalize, reduction_graph, soup_equiv
from .calculus import check_derivation, combinator, dagger_flip, elaborate, morphism
from .model import Signature, interpret, verify_axioms

__all__ = [
    "I", "Atom", "Connection", "DLCError", "LinearityError", "Sequent", "TypingError",
    "alpha_equiv", "canonicalize", "validate", "ParseError", "parse_sequent",
    "parse_signature", "parse_type", "print_sequent", "normal_form", "normalize",
    "reduction_graph", "soup_equiv", "check_derivation", "combinator", "dagger_flip",
    "elaborate", "morphism", "Signature", "interpret", "verify_axioms",
]


def examples_path():
    """Directory holding the bundled example sequents, signatures and derivations."""
    from pathlib import Path

    return Path(__file__).parent / "examples"
