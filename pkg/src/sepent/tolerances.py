"""Numerical tolerances shared by every module.

Structural checks (Hermiticity, unit trace of inputs) are loose; equality
oracles are tight for the ideal-gate pipeline and slightly looser for the
pulse pipeline, which composes many floating-point rotations.
"""

STRUCTURAL = 1e-9
EXACT = 1e-12
PULSE = 1e-9
UNITARY = 1e-10
PSD = 1e-10
PPT = 1e-10
ENTANGLED = 1e-8
IMAG = 1e-9
