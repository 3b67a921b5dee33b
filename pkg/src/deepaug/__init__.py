"""Desk-scale corruption-robustness toolkit: distorted image-to-image
network augmentation, a corruption benchmark generator, metadata-driven
OOD splits, and the metrics to compare them."""

__version__ = "0.1.0"
