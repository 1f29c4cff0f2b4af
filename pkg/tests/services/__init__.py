"""
Testmodul für Service-Komponenten von maturity_sim.
"""
