"""Separability of labeled ALCI knowledge bases under signature restrictions."""
