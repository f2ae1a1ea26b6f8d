"""Pipeline services: simulation, sampling, spectral analysis, and I/O."""
