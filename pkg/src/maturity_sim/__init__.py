"""
maturity_sim

Zentrales Package für die Simulation eines reifegrad-strukturierten Zwei-Phasen-Zellpopulationsmodells
(ruhende und proliferierende Zellen) mit reifegradabhängiger Teilungsverzögerung.
Stellt Koeffizientenmodelle, numerische Services, Analysen und die CLI bereit.
"""

__version__ = "0.1.0"
