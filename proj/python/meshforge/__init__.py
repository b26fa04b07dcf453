"""Python interface to the meshforge feedforward mesh toolkit."""

import json

from ._meshforge import (
    ConfigError,
    CycleError,
    MeshforgeError,
    NonNullifiableError,
    NonUnitaryError,
    __version__,
    haar,
    speedup,
    unitarity_deviation,
)
from . import _meshforge as _core

__all__ = [
    "ConfigError",
    "CycleError",
    "MeshforgeError",
    "NonNullifiableError",
    "NonUnitaryError",
    "__version__",
    "calibrate",
    "compile_netlist",
    "decompose",
    "haar",
    "mesh_matrix",
    "nullification_set",
    "program",
    "random_params",
    "speedup",
    "topology",
    "unitarity_deviation",
]


def topology(arch, n):
    return json.loads(_core.topology_json(arch, n))


def compile_netlist(netlist):
    return json.loads(_core.compile_netlist_json(json.dumps(netlist)))


def decompose(u):
    return json.loads(_core.decompose_json(u))


def random_params(arch, n, seed):
    return json.loads(_core.random_params_json(arch, n, seed))


def mesh_matrix(params):
    return _core.mesh_matrix_json(json.dumps(params))


def nullification_set(params):
    """Rows are the per-column input vectors."""
    return _core.nullification_set_json(json.dumps(params))


def program(params, seed=0, mode="closed-form", drift_sigma=0.0):
    return json.loads(_core.program_json(json.dumps(params), seed, mode, drift_sigma))


def calibrate(arch, n, seed=0):
    out = _core.calibrate(arch, n, seed)
    out["model"] = json.loads(out["model"])
    return out
