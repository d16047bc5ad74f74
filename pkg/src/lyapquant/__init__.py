"""Lyapunov stability checks from nested level sets of a candidate function.

Typical use::

    from lyapquant import make_scalar_field, make_vector_field, Grid, build_sequence
    F = make_scalar_field("x^2 + y^2", 2)
    f = make_vector_field(["-x", "-y"], 2)
    seq = build_sequence(F, Grid.cube(2.0, 256, 2), count=8)
"""
from .expr import Expr, differentiate, evaluate, parse_expression
from .fields import (ScalarField, VectorField, gradient, gradient_selfcheck,
                     make_scalar_field, make_vector_field)
from .levelset import (Grid, Hypersurface, HypersurfaceSequence, build_sequence,
                       extract_level_component, local_definiteness_probe,
                       select_regular_levels, topology_signature)
from .odeint import (Trajectory, containment_check, convergence_check, integrate,
                     integrate_many, invariant_set_probe)
from .stability import (Verdict, classify_stability, derivative_sign_check,
                        sequence_is_different, sign_condition)

__version__ = "0.1.0"
