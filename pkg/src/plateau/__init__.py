"""Statevector simulation and Monte Carlo harness for gradient statistics of
random parameterized quantum circuits."""

__version__ = "0.1.0"
