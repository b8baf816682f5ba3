"""Pydantic domain types, grouped per area."""
