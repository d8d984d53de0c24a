"""Cohen-type summing norms of operators between finite-dimensional l_q spaces."""

__version__ = "0.1.0"
