"""Hot-loop kernels: compiled Cython when available, numpy otherwise.

Set ``GRAVLAB_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

if os.environ.get("GRAVLAB_PURE_PYTHON", "") not in ("", "0"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND
uniforms = _impl.uniforms
normals = _impl.normals
stream_key = _impl.stream_key
dp_mc_moments = _impl.dp_mc_moments
sphere_pair_mc_moments = _impl.sphere_pair_mc_moments
cc_run = _impl.cc_run

__all__ = ["BACKEND", "uniforms", "normals", "stream_key", "dp_mc_moments",
           "sphere_pair_mc_moments", "cc_run"]
