"""riskbench: benchmarking suite for player risk detection.

Synthetic labeled gambling datasets, a metadata-card registry, benchmark task
materialization with hidden answer keys, prevalence-aware scoring, and a
badged leaderboard service.
"""

__version__ = "0.1.0"

GENERATOR_VERSION = "riskbench-synthgen/0.1.0"
