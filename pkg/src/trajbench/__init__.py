"""Trajectory dataset characterization and spatial index benchmarking
workbench.

Computes overlap (GOC) and dispersion (trajectory-ANN) metrics exactly and
via tunable sampling, generates four synthetic dataset families, and
benchmarks read queries and write operations across two storage formats
and three in-process index families, with a sequential-scan oracle
defining ground truth.
"""

__version__ = "0.1.0"
