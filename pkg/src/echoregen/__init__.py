"""Echo cancellation by adaptive-filter prediction plus diffusion regeneration."""

__version__ = "0.1.0"
