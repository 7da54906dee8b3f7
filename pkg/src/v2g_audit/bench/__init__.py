"""Synthetic benchmark: generated base cases, augmented variants, scoring and statistics."""
