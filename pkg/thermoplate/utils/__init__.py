"""Command-line tools for thermoplate."""
