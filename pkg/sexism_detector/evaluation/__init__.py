"""
Evaluation package: confusion counts and metrics, ladder experiments and reports.
"""
