"""
Validation functions for run configurations.
"""

from typing import Dict, Optional, Tuple

# Keys any subcommand accepts in a config file, mirroring the global flags
GLOBAL_KEYS = {"seed", "jobs", "out"}

# Solver and statistics settings a config file may override (see config.update_config)
SETTINGS_KEYS = {"tol", "max_iterations", "bisection_tol", "schedule_slack", "ci_level", "min_fit_successes",
                 "shift_failure_share"}

# Flags each subcommand accepts; every flag has a default, so none is required
KNOWN_COMMANDS = {
    "tail": ["n", "delta", "field", "trials", "eps_min", "eps_max", "eps_points", "c", "C"],
    "norm": ["n", "delta", "field", "trials", "K_grid"],
    "rowbound": ["n", "delta", "m", "j_size", "trials", "field"],
    "net-check": ["n", "a", "b", "d1", "d2", "samples"],
    "constants": ["K", "delta", "n_min", "c2", "n_max"],
    "schedule": ["n", "delta", "K", "c2", "log_eps_total"],
    "incompressible": ["n", "delta", "field", "trials", "t_min", "t_max", "t_points",
                       "c1", "c2", "eps1", "eps2", "n_grid"],
    "distance": ["n", "delta", "field", "trials"],
    "shift": ["n", "t", "lam", "delta", "trials"],
}


def normalize_key(key: str) -> str:
    """Config keys mirror flag names; dashes and underscores are interchangeable."""
    key = key.strip().lstrip("-").replace("-", "_")
    return "lam" if key == "lambda" else key


def validate_config(command_name: str, settings: Dict) -> Tuple[bool, Optional[str]]:
    """
    Validates the keys and values of a config file for a subcommand.

    Args:
        command_name: The subcommand the config is for.
        settings: The key-value pairs read from the file, keys already normalized.

    Returns:
        A tuple containing:
        - bool: True if the config is valid, False otherwise.
        - Optional[str]: An error message if validation fails, None otherwise.
    """
    if command_name not in KNOWN_COMMANDS:
        return False, f"Unknown command name: '{command_name}'"

    allowed = set(KNOWN_COMMANDS[command_name]) | GLOBAL_KEYS | SETTINGS_KEYS

    unknown = set(settings) - allowed
    if unknown:
        return False, f"Unknown keys for command '{command_name}': {', '.join(sorted(unknown))}"

    for key, value in settings.items():
        if value is None or str(value).strip() == "":
            return False, f"Key '{key}' for command '{command_name}' cannot be empty"

    return True, None
