"""Device-dependent and device-independent quantifiers of steering, incompatibility and entanglement."""

__version__ = "0.1.0"
