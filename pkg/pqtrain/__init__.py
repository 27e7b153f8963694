"""
pqtrain - complementary waveforms and (P,Q) pulse-train designs with
range-sidelobe-free Doppler bands.
"""

__version__ = "0.1.0"
