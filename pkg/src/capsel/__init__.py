"""Sparse averaging ensembles selected by least squares over a capped simplex."""
