"""
Testmodul für Utility-Komponenten von maturity_sim.
"""
