"""Region-based routing: decomposition, header codec, routing and simulation."""
