"""Python bindings for the qcsg compression library."""

import json

from . import _qcsg

__all__ = ["compress_scene", "compress_abstract", "maximal_cliques", "solve_cover", "solve_qubo", "qubo_energy"]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def compress_scene(primitives, target, mode="partitioned", solver="dlx", seed=1, samples=2048):
    """Compress a primitive set against a ground-truth tree; returns the report dict."""
    return json.loads(_qcsg.compress_scene(_text(primitives), _text(target), mode, solver, seed, samples))


def compress_abstract(instance, mode="partitioned", solver="dlx", seed=1):
    return json.loads(_qcsg.compress_abstract(_text(instance), mode, solver, seed))


def maximal_cliques(vertices, edges):
    return _qcsg.maximal_cliques(list(vertices), [tuple(e) for e in edges])


def solve_cover(instance, solver="dlx", seed=1):
    return json.loads(_qcsg.solve_cover(_text(instance), solver, seed))


def solve_qubo(n, linear, quadratic, offset=0.0, solver="exact", seed=1):
    """Minimize sum(linear[i] x_i) + sum(quadratic[i, j] x_i x_j) + offset over x in {0,1}^n."""
    return _qcsg.solve_qubo(n, dict(linear), dict(quadratic), offset, solver, seed)


def qubo_energy(n, linear, quadratic, offset, x):
    return _qcsg.qubo_energy(n, dict(linear), dict(quadratic), offset, list(x))
