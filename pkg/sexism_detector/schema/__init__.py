"""
Pydantic schemas for statements, experiment configs and report rows.
"""
