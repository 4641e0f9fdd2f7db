"""Pseudo-boson lab - Source package."""
