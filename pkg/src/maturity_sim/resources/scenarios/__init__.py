"""Szenario-Presets (YAML), ladbar über ``preset:<name>``."""
