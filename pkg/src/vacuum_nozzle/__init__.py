"""Global supersonic potential flow in a divergent conical nozzle with vacuum at infinity."""

from .background import (
    BackgroundState,
    BumpProfile,
    GasParams,
    background_table,
    density_from_speed_sq,
    initial_density_profile,
    solve_background,
)

__all__ = [
    "BackgroundState",
    "BumpProfile",
    "GasParams",
    "background_table",
    "density_from_speed_sq",
    "initial_density_profile",
    "solve_background",
]
__version__ = "0.1.0"
