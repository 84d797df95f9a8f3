"""Surfaces in R^7 associated with harmonic maps into S^6.

Modules, bottom up: ``algebra`` (the cross product), ``planes``
(associative and coassociative subspaces), ``stencils`` and ``jets``
(derivatives and the harmonic sequence), ``catalog`` (example maps),
``surface`` (integration of F and F+-), ``invariants`` (classification)
and ``acceptance``.
"""

__version__ = "0.1.0"
