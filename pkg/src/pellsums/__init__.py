"""Pell-equation counts, Kloosterman-type sums with squared inverses, and their bookkeeping."""
