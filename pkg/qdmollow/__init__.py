# Polaron master-equation simulator for resonance fluorescence of driven quantum dots
__version__ = "1.0.0"
