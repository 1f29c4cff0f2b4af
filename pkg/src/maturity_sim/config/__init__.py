"""
Konfigurations-Package für maturity_sim.

Enthält zentrale Einstellungen und Logging-Konfiguration.
"""
