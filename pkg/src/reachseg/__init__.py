"""Curvature-regularized layered segmentation over sets with a uniform ball condition.

A set belongs to the class U_R when a ball of radius R touches every boundary
point from inside and another from outside. This package checks that
condition on polygonal boundaries, evaluates curvature energies and the
layered segmentation functional, searches for low-energy segmentations
whose layers stay in U_R, and runs numerical set-convergence diagnostics.
"""

from .convergence import (SequenceReport, analyze_sequence, equivalence_probe, hausdorff_distance,
                          l1_distance)
from .energy import (EnergyBreakdown, EnergyParams, LayeredSegmentation, PhiModel,
                     curvature_energy, fidelity, jensen_lower_bound, k_upper_bound,
                     overlap_decompose, phi_eval, region_mean, total_energy)
from .errors import GeometryError, ParseError, PreconditionError
from .example import example_ball
from .geometry import (ClosedCurve, Region, area, contains_point, curvature_profile, diameter,
                       perimeter, resample_uniform, signed_area, total_absolute_curvature,
                       turning_angles)
from .io import read_pgm, read_region, write_label_image, write_pgm, write_region
from .kernels import BACKEND
from .optimizer import RunReport, Schedule, accept, optimize_fixed_k, optimize_variable_k
from .raster import Grid, RasterImage, rasterize
from .sphere import (SphereReport, check_region, graph_slopes, packing_lower_bound,
                     regularize_raster, verify_graph_bound)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ClosedCurve", "EnergyBreakdown", "EnergyParams", "GeometryError", "Grid",
    "LayeredSegmentation", "ParseError", "PhiModel", "PreconditionError", "RasterImage", "Region",
    "RunReport", "Schedule", "SequenceReport", "SphereReport", "accept", "analyze_sequence",
    "area", "check_region", "contains_point", "curvature_energy", "curvature_profile",
    "diameter", "equivalence_probe", "example_ball", "fidelity", "graph_slopes",
    "hausdorff_distance", "jensen_lower_bound", "k_upper_bound", "l1_distance",
    "optimize_fixed_k", "optimize_variable_k", "overlap_decompose", "packing_lower_bound",
    "perimeter", "phi_eval", "rasterize", "read_pgm", "read_region", "region_mean",
    "regularize_raster", "resample_uniform", "signed_area", "total_absolute_curvature",
    "total_energy", "turning_angles", "verify_graph_bound", "write_label_image", "write_pgm",
    "write_region",
]
