"""ergokit: computational ergodic theory on tori, circles, and shifts.

Rotation sets and their inclusion lattice, entropy/pressure/metric mean
dimension estimators driven by separated sets, orbit gluing and shadowing
oracles, periodic approximation of invariant measures, and explicit
constructions of orbits with wild average oscillation.
"""

__version__ = "0.1.0"

from .systems import (  # noqa: F401
    CircleSineLift,
    DoublingMap,
    ShearLift,
    ShiftSystem,
    TranslationLift,
    full_shift,
    golden_mean_sft,
)
from .observables import (  # noqa: F401
    CylinderIndicator,
    Displacement,
    SymbolEmbedding,
    TrigObservable,
    birkhoff_average,
    accumulation_set,
)
from .symbolic import ShiftSpace, SymbolPoint  # noqa: F401
