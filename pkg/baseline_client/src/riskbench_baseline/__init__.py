"""Reference submitter for riskbench benchmark tasks.

Loads a public task bundle, aggregates simple per-player behavioral features,
fits a logistic regression, writes a valid submission file, and can post it
to a riskbench service. Deliberately minimal: this is the beatable baseline.
"""

__version__ = "0.1.0"
