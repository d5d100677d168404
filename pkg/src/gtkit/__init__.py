"""gtkit: verification toolkit for Gelfand-Tsetlin bases of gl(n,C) principal series.

Exact symbolic suites (Weyl algebra, L-operators, quantum minors) live in
:mod:`gtkit.weyl` and :mod:`gtkit.yangian`; the numerical engine for the
gamma function of the complex field, Mellin-Barnes quadrature and the
hypergeometric functions is :mod:`gtkit.complexfield`; kernel and
eigenfunction residual suites are :mod:`gtkit.kernels` and
:mod:`gtkit.eigenfun`.  The ``gtkit`` command line wires everything up.
"""

__version__ = "0.1.0"
