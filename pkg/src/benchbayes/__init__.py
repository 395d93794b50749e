"""Statistical comparison of paired benchmark data and count experiments.

Two parallel pipelines over the same inputs: a frequentist one (rank tests,
effect sizes, multiplicity corrections) and a Bayesian one (grid posteriors
over speedups, regression via random-walk Metropolis). See the CLI in
``benchbayes.cli`` for the end-to-end entry points.
"""

__version__ = "0.1.0"
