"""Testing utilities for thermoplate.

This module provides helpers for tests that need small, reproducible plate
problems: parameter sets, single-mode and seeded random states, and a
manufactured solution with its forcing.

Example:
    ```python
    from thermoplate import BoxDomain, EvolutionConfig, NonlinearitySpec, evolve
    from thermoplate.testing import default_params, seeded_state

    def test_linear_decay():
        domain = BoxDomain(2, modes=4)
        record = evolve(seeded_state(domain, 7), default_params(), NonlinearitySpec.zero(), 0.0, 5.0,
                        EvolutionConfig(dt=1e-2))
        assert record.y_norms[-1] < record.y_norms[0]
    ```
"""

from .state_helpers import (
    default_params,
    manufactured_solution,
    seeded_state,
    single_mode_state,
    sinusoidal_params,
)

__all__ = [
    "default_params",
    "manufactured_solution",
    "seeded_state",
    "single_mode_state",
    "sinusoidal_params",
]
