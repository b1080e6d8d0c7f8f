"""Underwater image enhancement toolkit.

Subpackages: classical pre-processing operators, a gated fusion
enhancement network with from-scratch training, full- and non-reference
quality metrics, a benchmark/report harness, and a pairwise-comparison
study service.
"""

__version__ = "0.1.0"
