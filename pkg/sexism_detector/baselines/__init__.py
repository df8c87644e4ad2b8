"""
Baselines package: mean-embedding features with logistic regression and gradient-boosted trees.
"""
