"""besselgap: numerics for the hard-edge Bessel point process."""

__version__ = "0.1.0"
