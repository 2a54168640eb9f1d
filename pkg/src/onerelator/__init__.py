"""Random one-relator groups: free-group words, lattice walks, Magnus rewriting,
ascending HNN extensions, matrix dynamics and residual-finiteness certificates."""

from .freewords import CyclicWord, Word, WordError

__version__ = "0.1.0"

__all__ = ["CyclicWord", "Word", "WordError", "__version__"]
