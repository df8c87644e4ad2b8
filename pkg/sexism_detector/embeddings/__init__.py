"""
Embeddings package: GloVe-format tables, vocabularies and initial embedding matrices.
"""
