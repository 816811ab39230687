"""Bundled example process models and a small demo log."""
