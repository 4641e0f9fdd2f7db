"""Pseudo-boson lab - Test package."""
