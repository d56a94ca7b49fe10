"""Master equations for open quantum systems: Redfield, secular Lindblad and the
canonically consistent (Q-bar corrected) equation, plus an exact damped
harmonic oscillator reference."""
import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
