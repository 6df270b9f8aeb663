"""Operadic categories of graphs, free Markl operads, and Koszul duality.

Everything is exact: integer combinatorics plus rational linear algebra.
The package is organized around one graph engine (:mod:`opcat.graphs`),
an abstract operadic-category contract with bounded exhaustive verifiers
(:mod:`opcat.category`), concrete derived categories built by Grothendieck
(op)fibrations (:mod:`opcat.categories`), the tower calculus indexing free
operads (:mod:`opcat.towers`), quadratic presentations and duals
(:mod:`opcat.quadratic`), and the built-in structure presets with their
theorem suites (:mod:`opcat.presets`).
"""

__version__ = "0.1.0"
