"""Sealing schemes: priors plus pure sealed states on public ⊗ private registers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import DEFAULT
from .qcore import partial_trace_private


class SchemeError(ValueError):
    """A scheme document or constructor argument failed validation."""


@dataclass(frozen=True)
class SealScheme:
    """N messages with prior probabilities and their pure sealed states.

    ``states[i]`` is the amplitude vector of message ``i`` over
    ``dim_public * dim_private`` basis states, public index major.  Priors are
    not required to be sorted.
    """

    priors: np.ndarray
    dim_public: int
    dim_private: int
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=float).reshape(-1)
        states = np.asarray(self.states, dtype=complex)
        n = priors.shape[0]
        if n < 2:
            raise SchemeError("need at least 2 messages")
        if self.dim_public < 1 or self.dim_private < 1:
            raise SchemeError("register dimensions must be positive")
        if not np.all(np.isfinite(priors)) or np.any(priors <= 0):
            raise SchemeError("priors must be positive")
        if abs(priors.sum() - 1.0) > DEFAULT.norm:
            raise SchemeError(f"priors not normalized (sum {priors.sum():.12g})")
        dim = self.dim_public * self.dim_private
        if states.ndim != 2 or states.shape != (n, dim):
            raise SchemeError(f"states must have shape ({n}, {dim}), got {states.shape}")
        if not np.all(np.isfinite(states)):
            raise SchemeError("states have non-finite amplitudes")
        norms = np.einsum("ij,ij->i", states.conj(), states).real
        bad = np.flatnonzero(np.abs(norms - 1.0) > DEFAULT.norm)
        if bad.size:
            raise SchemeError(f"state not normalized (message {bad[0]}, squared norm {norms[bad[0]]:.12g})")
        priors.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)

    @property
    def n_messages(self) -> int:
        return self.priors.shape[0]

    def amplitude_matrix(self, i: int) -> np.ndarray:
        return self.states[i].reshape(self.dim_public, self.dim_private)


@dataclass(frozen=True)
class CanonicalConstants:
    c: float
    d: float


def _check_pmax(p_max: float, n: int):
    if n < 2:
        raise SchemeError("N must be at least 2")
    if not (1.0 / n - 1e-15 <= p_max <= 1.0):
        raise SchemeError(f"p_max={p_max} outside [1/N, 1] for N={n}")


def canonical_constants(p_max: float, n: int) -> CanonicalConstants:
    _check_pmax(p_max, n)
    return CanonicalConstants(c=(p_max * n - 1.0) / (n - 1), d=(1.0 - p_max) / (n - 1))


def canonical_scheme(n: int, p_max: float) -> SealScheme:
    """Most stringent scheme with uniform priors.

    The public register has dimension N and the private side is two
    N-dimensional registers.  Message ``i`` carries amplitude sqrt(p_max) on
    |i>|i>|i> and sqrt((1-p_max)/(N-1)) on |j>|j>|i> for each j != i.
    """
    _check_pmax(p_max, n)
    big = math.sqrt(p_max)
    small = math.sqrt((1.0 - p_max) / (n - 1))
    states = np.zeros((n, n, n, n), dtype=complex)
    idx = np.arange(n)
    for i in range(n):
        states[i, idx, idx, i] = small
        states[i, i, i, i] = big
    return SealScheme(
        priors=np.full(n, 1.0 / n),
        dim_public=n,
        dim_private=n * n,
        states=states.reshape(n, n ** 3),
    )


def canonical_reduced_states(n: int, p_max: float) -> np.ndarray:
    """Closed form c|i><i| + d I of the canonical reduced states."""
    k = canonical_constants(p_max, n)
    eye = np.eye(n)
    return np.array([k.c * np.outer(eye[i], eye[i]) + k.d * eye for i in range(n)], dtype=complex)


def reduced_states(scheme: SealScheme) -> np.ndarray:
    """Public-register density matrices, shape (N, dim_public, dim_public)."""
    return np.array([
        partial_trace_private(s, scheme.dim_public, scheme.dim_private) for s in scheme.states
    ])


def scheme_to_dict(scheme: SealScheme) -> dict:
    return {
        "n_messages": scheme.n_messages,
        "dim_public": scheme.dim_public,
        "dim_private": scheme.dim_private,
        "priors": [float(x) for x in scheme.priors],
        "states": [[[float(z.real), float(z.imag)] for z in s] for s in scheme.states],
    }


def scheme_from_dict(doc: dict) -> SealScheme:
    try:
        n = int(doc["n_messages"])
        dim_public = int(doc["dim_public"])
        dim_private = int(doc["dim_private"])
        priors = np.asarray(doc["priors"], dtype=float)
        raw = np.asarray(doc["states"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemeError(f"malformed scheme document: {exc}") from exc
    if priors.shape != (n,):
        raise SchemeError(f"expected {n} priors, got {priors.size}")
    if raw.ndim != 3 or raw.shape[0] != n or raw.shape[2] != 2:
        raise SchemeError(f"states must be {n} lists of [re, im] pairs")
    return SealScheme(priors=priors, dim_public=dim_public, dim_private=dim_private,
                      states=raw[..., 0] + 1j * raw[..., 1])


def dump_scheme(scheme: SealScheme) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(scheme_to_dict(scheme))


def save_scheme(scheme: SealScheme, path) -> None:
    Path(path).write_text(dump_scheme(scheme) + "\n")


def load_scheme(source) -> SealScheme:
    """Load a scheme from a path, a JSON string, or an already-parsed dict."""
    if isinstance(source, dict):
        return scheme_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeError(f"parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemeError("parse error: top level must be an object")
    return scheme_from_dict(doc)


def schemes_close(a: SealScheme, b: SealScheme, atol: float = 1e-12) -> bool:
    return (
        a.dim_public == b.dim_public
        and a.dim_private == b.dim_private
        and a.priors.shape == b.priors.shape
        and bool(np.allclose(a.priors, b.priors, rtol=0, atol=atol))
        and bool(np.allclose(a.states, b.states, rtol=0, atol=atol))
    )
