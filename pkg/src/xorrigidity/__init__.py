"""Verification toolkit for XOR nonlocal games and their rigidity bounds."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    CertificateError,
    DegenerateInputError,
    DegenerateIntertwinerError,
    DomainError,
    FeasibilityError,
    LabelError,
    ShapeError,
    SingularOperatorError,
    XorRigidityError,
)
from .games import (  # noqa: E402
    BinaryGame,
    GameMatrix,
    bias,
    binary_game_values,
    build_chsh_game,
    build_ffl_game,
    classical_bias_bruteforce,
    win_probability,
)
from .strategies import (  # noqa: E402
    Strategy,
    build_anticommuting_family,
    build_ffl_strategy,
    build_optimal_chsh_strategy,
    build_reference_strategy,
    maximally_entangled,
    perturb_strategy,
)
from .tensor import BipartiteState, schmidt_decompose  # noqa: E402
