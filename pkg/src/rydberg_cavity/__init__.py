"""Photon statistics of a cavity containing a Rydberg-blockaded atomic ensemble."""

__version__ = "0.1.0"
