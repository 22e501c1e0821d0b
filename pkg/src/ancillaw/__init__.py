"""W-state generation with one ancilla particle among N identical particles."""
from .algebra import (
    BasisState,
    CanonicalState,
    IncompatibleError,
    OneParticleKet,
    ProductKet,
    Spin,
    Statistics,
    basis,
    canonicalize,
    expand,
    inner,
    norm,
    one_particle_overlap,
    product_overlap,
)
from .kernels import DimensionError, determinant, permanent

__version__ = "0.1.0"
