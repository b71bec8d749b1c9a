"""
Label message passing (LaMP) network: value vocabulary, model, training and storage.
"""
