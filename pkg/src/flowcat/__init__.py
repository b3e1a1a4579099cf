"""flowcat: iterated flow-line towers and their composition laws.

From finite flow data (critical points with indices, and the components
of the spaces of flow lines between them) the package derives, level by
level, the compactified spaces of flow lines between critical points of
the previous level, assembles all their critical points into a leveled
family of cells with boundary and gluing maps, and machine-verifies the
category laws those maps satisfy up to a canonical normal form.
"""

from .core import (
    Broken,
    Cell,
    CritPoint,
    History,
    ModuliAddress,
    NormalCell,
    Point,
    Primitive,
    address_key,
    cell_key,
    flatten_point,
    is_stationary,
    point_key,
    point_value,
)
from .stratification import (
    CIRCLE,
    Component,
    Endpoint,
    FlowSystem,
    INTERVAL,
    POINT,
    PieceRef,
    Shape,
    Stratification,
    Stratum,
    Violation,
    boundary_strata,
    flow_system,
    moduli_dimension,
    parse_shape,
    shape_label,
    sphere_like,
    validate_flow_system,
)
from .tower import (
    BuildError,
    ComponentDecl,
    DeclaredModuli,
    DeclaredPoint,
    Declarations,
    InvalidFlowSystemError,
    MissingDeclarationError,
    MorseData,
    MorseEntry,
    SpaceData,
    Tower,
    build_tower,
    derive_moduli,
)
from .category import (
    GlobularSet,
    cells,
    composable,
    compose,
    extended_cells,
    identity,
    normalize,
    normalize_point,
    source,
    target,
)
from .axioms import (
    AXIOM_TAGS,
    AxiomReport,
    Failure,
    TagReport,
    check_all,
    check_axiom,
    check_globular,
)
from .generators import deformed_sphere_system, random_system, sphere_system
from .cli import ParseError, parse_tower_file, render_tower_file

__version__ = "0.1.0"

__all__ = [
    # core
    "Broken", "Cell", "CritPoint", "History", "ModuliAddress", "NormalCell",
    "Point", "Primitive", "address_key", "cell_key", "flatten_point",
    "is_stationary", "point_key", "point_value",
    # stratification
    "CIRCLE", "Component", "Endpoint", "FlowSystem", "INTERVAL", "POINT",
    "PieceRef", "Shape", "Stratification", "Stratum", "Violation",
    "boundary_strata", "flow_system", "moduli_dimension", "parse_shape",
    "shape_label", "sphere_like", "validate_flow_system",
    # tower
    "BuildError", "ComponentDecl", "DeclaredModuli", "DeclaredPoint",
    "Declarations", "InvalidFlowSystemError", "MissingDeclarationError",
    "MorseData", "MorseEntry", "SpaceData", "Tower", "build_tower",
    "derive_moduli",
    # category
    "GlobularSet", "cells", "composable", "compose", "extended_cells",
    "identity", "normalize", "normalize_point", "source", "target",
    # axioms
    "AXIOM_TAGS", "AxiomReport", "Failure", "TagReport", "check_all",
    "check_axiom", "check_globular",
    # generators
    "deformed_sphere_system", "random_system", "sphere_system",
    # tower files
    "ParseError", "parse_tower_file", "render_tower_file",
    "__version__",
]
