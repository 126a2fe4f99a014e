"""Exact and numerical mod-Gaussian analysis of 1d spin systems.

Subpackages by responsibility:

* :mod:`modspin.numerics`        -- quadrature, Fourier transforms, log-sums;
* :mod:`modspin.spin_models`     -- model families, transfer matrix, exact
  lattice distributions, brute-force oracles, samplers;
* :mod:`modspin.cumulant_engine` -- exact joint-cumulant combinatorics over
  x = tanh(beta);
* :mod:`modspin.modgauss`        -- residues, changes of measure, deviation
  and CLT diagnostics;
* :mod:`modspin.limits`          -- smoothing kernel, Kolmogorov distances,
  rate certificates, local limit theorem;
* :mod:`modspin.cli`             -- the ``modspin`` command-line front end.
"""

__version__ = "0.1.0"

from . import numerics, spin_models, cumulant_engine, modgauss, limits  # noqa: E402,F401
