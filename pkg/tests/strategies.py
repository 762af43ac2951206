"""Hypothesis strategies for types and well-formed sequents."""

import random

from hypothesis import strategies as st

from daggerlc.corpus import CorpusConfig, random_sequent
from daggerlc.syntax import I, Atom, Dual, TensorType

atoms = st.sampled_from(["A", "B", "C"]).map(Atom)
base_types = st.one_of(atoms, atoms.map(Dual), st.just(I))
types = st.recursive(base_types, lambda t: st.builds(TensorType, t, t), max_leaves=5)

corpus_items = st.integers(0, 2**32 - 1).map(lambda s: random_sequent(random.Random(s), CorpusConfig()))
sequents = corpus_items.map(lambda it: it.sequent)
