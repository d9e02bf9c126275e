"""Analytics module for benchmark results."""

from .benchmark_analytics import BenchmarkAnalytics

__all__ = ['BenchmarkAnalytics']
