"""Group-theoretic machine encodings.

Free-group word algebra, subgroup membership by folding, aperiodic
word encodings, Turing-machine normalization, S-machine rewriting,
the machine encoding chain, and group-presentation emission with
diagram checking.
"""

__version__ = "0.1.0"
