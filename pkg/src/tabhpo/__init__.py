"""Tabular hyperparameter-optimization benchmarks: generation, analysis and optimizer races."""
