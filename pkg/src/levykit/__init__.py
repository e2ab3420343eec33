"""Infinitely divisible laws: Levy triplets, moment existence, self-decomposability."""

from . import errors, levy, mixtures, moments, reproduce, selfdecomp, special
from .errors import LevyKitError
from .levy import LevyTriplet, char_fn, char_fn_from_split, split_truncate
from .mixtures import GHSpec, MixtureSpec, mixture_char_fn, mixture_levy_density
from .moments import levy_box_moment, moment_exists
from .selfdecomp import sd_criterion, sd_numeric_check
from .special import GIGParams, StableParams

__version__ = "0.1.0"

__all__ = [
    "errors", "levy", "mixtures", "moments", "reproduce", "selfdecomp", "special",
    "LevyKitError", "LevyTriplet", "char_fn", "char_fn_from_split", "split_truncate",
    "GHSpec", "MixtureSpec", "mixture_char_fn", "mixture_levy_density",
    "levy_box_moment", "moment_exists", "sd_criterion", "sd_numeric_check",
    "GIGParams", "StableParams",
]
