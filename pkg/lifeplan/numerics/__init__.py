"""Deterministic numerical kernels shared by the analytic modules: standard-normal special
functions, the regularized incomplete beta function, and quadrature."""
