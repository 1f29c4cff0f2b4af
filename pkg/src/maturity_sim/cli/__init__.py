"""CLI-Module für maturity_sim: ein Modul pro Verb."""
