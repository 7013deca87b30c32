"""Computable weak convergence for cadlag paths."""
from .errors import (CadlagError, CapacityError, ConfigError, DomainError, ModeError,
                     ParseError, SeriesTruncationError)
from .metrics import (DiscreteMeasure, TimeChange, d_infinity, prokhorov_distance,
                      skorokhod_d, skorokhod_d_circ, skorokhod_distance, skorokhod_witness)
from .paths import (CadlagPath, modulus, modulus_w, modulus_w_double_prime, modulus_w_prime,
                    oscillation_on_interval, uniform_distance)

__all__ = [
    "CadlagError", "CapacityError", "ConfigError", "DomainError", "ModeError", "ParseError",
    "SeriesTruncationError", "DiscreteMeasure", "TimeChange", "d_infinity",
    "prokhorov_distance", "skorokhod_d", "skorokhod_d_circ", "skorokhod_distance",
    "skorokhod_witness", "CadlagPath", "modulus", "modulus_w", "modulus_w_double_prime",
    "modulus_w_prime", "oscillation_on_interval", "uniform_distance",
]
