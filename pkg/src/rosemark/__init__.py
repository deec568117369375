"""rosemark: multi-bit code watermarking with verifiable extraction."""

__version__ = "0.1.0"
