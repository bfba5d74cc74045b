"""Simulation and scoring of a four-qubit Bell-type test for complex amplitudes."""
