"""Synthetic corpora, brute-force oracles and scoring."""

from .listings import EXPECTED, EXTENDED_VARIANTS, all_listings, listing_path, listing_text
from .oracles import SizeError, oracle_hsbs, oracle_origins, oracle_sites, oracle_taint
from .planted import (
    GroundTruth, PlantedHso, PlantSpec, SpecError, default_plant_spec, gen_program,
)
from .randprog import random_program, recursive_program
from .score import MismatchError, score

__all__ = [
    "EXPECTED", "EXTENDED_VARIANTS", "GroundTruth", "MismatchError", "PlantSpec", "PlantedHso",
    "SizeError", "SpecError", "all_listings", "default_plant_spec", "gen_program", "listing_path",
    "listing_text", "oracle_hsbs", "oracle_origins", "oracle_sites", "oracle_taint",
    "random_program", "recursive_program", "score",
]
