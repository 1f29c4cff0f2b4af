"""
Test-Package für maturity_sim.

Enthält alle Unit- und Integrationstests für die maturity_sim-Anwendung.
"""
