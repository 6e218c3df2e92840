"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES = []
