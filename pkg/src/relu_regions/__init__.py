"""Exact counting of activation regions of ReLU networks on low-dimensional slices."""
from .network import (
    InitSpec,
    Network,
    cell_affine_map,
    forward,
    he_init,
    layerwise_scale_biases,
    pattern_at,
    scale_biases,
    scale_weights,
    zero_bias_equivariance_check,
)
from .regions import (
    AffineSlice,
    Cell,
    RegionCensus,
    SplitLine,
    enumerate_regions,
    grid_pattern_oracle,
    merge_linear_regions,
    refinement_check,
    restrict_neuron,
    split_cell,
)
from .bounds import arrangement_count, density_bound, expected_count_prediction
from .experiment import line_through_points, slice_through_points

__version__ = "0.1.0"
