"""
Corpus package: loading, normalizing, deduplicating and splitting statements.
"""
