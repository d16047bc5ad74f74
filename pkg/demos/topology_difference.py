"""A sphere followed by a torus: the sequence is 'different'.

Two hypersurfaces of different genus cannot be homeomorphic, so the
classifier reports stability that is not asymptotic, even when every sign
check passes.
"""
from lyapquant import Hypersurface, sequence_is_different
from lyapquant.levelset import icosphere, torus

seq = [Hypersurface.from_mesh(*icosphere(2)), Hypersurface.from_mesh(*torus())]
for H in seq:
    print(f"chi={H.chi} vertices={len(H.vertices)}")
print("different:", sequence_is_different(seq))
