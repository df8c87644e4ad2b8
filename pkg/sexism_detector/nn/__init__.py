"""
Neural network package: numpy LSTM / BiLSTM / attention classifiers with hand-written backpropagation.
"""
