"""A tiny C# subset: type checker, interpreter and benchmark runner."""
