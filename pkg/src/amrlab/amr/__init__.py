from .build import (
    block_mean,
    build_amr,
    build_amr_from_tags,
    build_amr_from_tiles,
    gradient_norm,
    level_coverage,
    level_densities,
    redundant_mask,
    theta_for_density,
    uniformize,
)
from .container import ContainerError, read_container, write_container
from .fields import generate_field, sphere_field, splitmix64
from .model import (
    AMRDataset,
    AMRLevel,
    IndexBox,
    Patch,
    ScalarGrid,
    occupancy,
    rasterize,
    validate,
)

__all__ = [
    "AMRDataset", "AMRLevel", "ContainerError", "IndexBox", "Patch", "ScalarGrid",
    "block_mean", "build_amr", "build_amr_from_tags", "build_amr_from_tiles",
    "generate_field", "gradient_norm", "level_coverage", "level_densities", "occupancy",
    "rasterize", "read_container", "redundant_mask", "sphere_field", "splitmix64",
    "theta_for_density", "uniformize", "validate", "write_container",
]
