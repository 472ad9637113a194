"""czpulse: pulse design and simulation for flux-tunable transmon CZ gates."""

__version__ = "0.1.0"
