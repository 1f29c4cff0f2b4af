"""
Datenmodelle für maturity_sim.

Enthält die Koeffizientenfamilien, Koeffizienten und Anfangsdaten, Berichte und Zertifikate
sowie das Szenario-Dokument.

Example:
    >>> from maturity_sim.models.functions import PowerFunction
    >>> float(PowerFunction(alpha=0.2, p=1.0)(0.5))
    0.1
"""
