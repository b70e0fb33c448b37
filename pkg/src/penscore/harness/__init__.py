"""Desk-scale model-selection study: synthetic data, a small classifier,
checkpointing / early stopping and h-block cross-validation."""
