"""Cubicalizations of thin-powered categories.

The submodules build on one another: :mod:`site` (base categories),
:mod:`spans`, :mod:`cube` (the cube category and its normal forms),
:mod:`presheaf` (truncated presheaves, boundaries, tensor, cylinders) and
:mod:`topology` (realization and homology).
"""

from ._backend import BACKEND, kernels
from .cube import (
    CubeCategory,
    CubeMorphism,
    NormalForm,
    classify,
    cube_compose,
    cube_homs,
    face,
    hom_count_formula,
    normal_form,
    reassemble,
)
from .errors import (
    CubecatError,
    DegreeMismatch,
    FunctorialityError,
    InvalidMorphism,
    NotComposable,
    SchemaError,
    TruncationError,
)
from .presheaf import (
    Presheaf,
    PresheafMap,
    boundary,
    cylinder,
    dump_presheaf,
    load_presheaf,
    representable,
    tensor,
)
from .site import CONNECTIONS, PLAIN, SIGMA, BaseMorphism, Site, Subset, get_site
from .spans import Span, span_compose
from .topology import SimplicialSet, homology, nerve_boolean, realize, smith_normal_form

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BaseMorphism",
    "CONNECTIONS",
    "CubeCategory",
    "CubeMorphism",
    "CubecatError",
    "DegreeMismatch",
    "FunctorialityError",
    "InvalidMorphism",
    "NormalForm",
    "NotComposable",
    "PLAIN",
    "Presheaf",
    "PresheafMap",
    "SIGMA",
    "SchemaError",
    "SimplicialSet",
    "Site",
    "Span",
    "Subset",
    "TruncationError",
    "boundary",
    "classify",
    "cube_compose",
    "cube_homs",
    "cylinder",
    "dump_presheaf",
    "face",
    "get_site",
    "hom_count_formula",
    "homology",
    "kernels",
    "load_presheaf",
    "nerve_boolean",
    "normal_form",
    "realize",
    "reassemble",
    "representable",
    "smith_normal_form",
    "span_compose",
    "tensor",
]
