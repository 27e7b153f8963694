"""Sequence construction, spectra, designs, ambiguity maps, scenes and file formats."""
