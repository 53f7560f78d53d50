"""Deterministic spanner construction in a simulated CONGEST network.

The package has three layers:

* ``graph`` and ``sim``: input graphs plus a round-synchronous,
  congestion-checked message passing simulator.
* ``clusters``, ``rulingset``, ``comm``: cluster machinery, deterministic
  ruling sets, and the tree-cast protocols both constructions share.
* ``polylog`` and ``sparse``: the two spanner constructions, with
  ``verify`` and ``cli`` providing the oracle checks and the command line.
"""

__version__ = "0.1.0"
