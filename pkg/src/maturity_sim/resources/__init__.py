"""Gebündelte Ressourcen von maturity_sim."""
