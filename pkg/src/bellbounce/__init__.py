"""Bell inequality / Bell-operator co-optimization toolkit."""

__version__ = "0.1.0"
