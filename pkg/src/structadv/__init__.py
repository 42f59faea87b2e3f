"""Structured adversarial training for out-of-distribution generalization.

Subpackages:

- ``diffcore``: dense float64 tensors with tape-based reverse-mode gradients
- ``data``: synthetic spurious-correlation datasets, colored-digit environments,
  MNIST IDX ingestion, domain-grouped batching
- ``models``: linear / MLP / small-CNN predictor families
- ``perturb``: perturbation parameterizations (sample-wise, universal,
  multi-perturbation, low-rank factored) and their constraint projections
- ``train``: the five training procedures as deterministic loops
- ``theory``: gradient-descent simulation of the 2-feature task and numerical
  evaluation of the spurious-ratio convergence bounds
- ``harness``: experiment runner, random hyperparameter search, model
  selection, result persistence, CLI
"""

__version__ = "0.1.0"
