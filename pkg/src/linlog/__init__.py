"""Linear-logic lambda calculus with source-to-source reverse-mode AD.

The package has three layers:

* ``linlog.lll``      -- the linear lambda calculus: terms, typing,
  reduction, flop-counted safe reduction, workload and safety analysis.
* ``linlog.linear_a`` -- the primal/tangent first-order calculus and its
  forward / unzip / transpose transformations.
* ``linlog.translate``, ``linlog.autodiff``, ``linlog.oracle`` -- the
  encoding of the first-order calculus into the lambda calculus, the
  lambda-calculus-level AD transformations, and the verification layer
  (bases, inner products, equivalence testing, finite differences).
"""

from linlog.fresh import NameSupply

__all__ = ["NameSupply"]
__version__ = "0.1.0"
