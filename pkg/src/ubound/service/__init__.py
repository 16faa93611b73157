"""HTTP service wrapping the bound pipelines."""
