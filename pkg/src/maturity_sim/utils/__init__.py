"""Gitter und kleine numerische Hilfsfunktionen."""
