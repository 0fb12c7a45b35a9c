"""Mining, building, ranking and validating performance patches for C# code."""

__version__ = "0.1.0"
