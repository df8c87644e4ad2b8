"""
Workplace sexism detection: corpus preparation, embedding-based baselines,
LSTM/BiLSTM/attention classifiers written in numpy, and the evaluation ladder.
"""

__version__ = "0.1.0"
