"""
Services-Package für maturity_sim.
Enthält die numerischen Services (Modell, Fluss, Festlegung, Löser, Analyse) und die Services der Laufsteuerung.
"""
