"""Phase retrieval toolkit: forward models, solvers, diagnostics and a benchmark harness."""

__version__ = "0.1.0"
