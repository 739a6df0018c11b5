"""Block-encoding compiler for second-quantized ladder operators."""

__version__ = "0.1.0"
