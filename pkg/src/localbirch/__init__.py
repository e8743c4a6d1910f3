"""Exact-arithmetic verification kernel for local Birch lemma combinatorics,
parabolic Hecke relations and p-adic distributions at a prime p."""

__version__ = "0.1.0"
