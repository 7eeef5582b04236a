"""netbend: an interactive network-bending workbench.

A small deterministic generator whose per-layer activation functions can
be replaced at inference time with parametric families (SinLU, ReLUN,
ShiLU, polynomial), driven through a live service, a browser studio, or
the ``netbend`` CLI.
"""

from .activations import ActivationSpec, eval_scalar, eval_tensor, param_schema, sample_curve
from .graph import (
    GeneratorConfig,
    ImageBuffer,
    ModelGraph,
    build_toy_generator,
    forward,
    list_layers,
    to_image,
)
from .patches import PatchSet, ValidationReport, deserialize, effective_latent, serialize, validate
from .render import render_bytes, render_image
from .tensor import DeterministicRng, Tensor, add, conv2d_same, matmul, normal_vector, scale, upsample2x_nearest
from .weights import load, random_init, save

__version__ = "0.1.0"
