"""Correspondence theory and structural rule synthesis for DLE logics."""
__version__ = "0.1.0"
