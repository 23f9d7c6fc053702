"""Trained classifier: a pair of quadratic surfaces and the
normalized-distance decision rule."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import NormalizationParams, apply_scaler
from .errors import (
    InvalidInputError,
    MalformedModelFileError,
    ModelInconsistencyError,
    ModelVersionError,
)
from .lifting import LiftingMode, dvec, hvec, unpack_weights

MODEL_FORMAT_VERSION = 1

# Guard for the distance denominator; the decision ratio is undefined
# when the surface gradient Wx + b vanishes.
GRADIENT_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadraticSurface:
    """One decision surface 1/2 x'Wx + b'x + c = 0."""

    W: np.ndarray
    b: np.ndarray
    c: float

    def __post_init__(self):
        W = np.asarray(self.W, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] != b.size:
            raise InvalidInputError(
                f"surface shapes inconsistent: W {W.shape}, b {b.shape}"
            )
        if not (np.isfinite(W).all() and np.isfinite(b).all() and np.isfinite(self.c)):
            raise InvalidInputError("surface has non-finite entries")
        if np.max(np.abs(W - W.T), initial=0.0) > 1e-10:
            raise InvalidInputError("surface matrix must be symmetric")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self) -> int:
        return self.b.size


def surface_value(s: QuadraticSurface, x: np.ndarray) -> float:
    """Evaluate 1/2 x'Wx + b'x + c at one point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.n,):
        raise InvalidInputError(f"expected a vector of length {s.n}, got {x.shape}")
    return float(0.5 * x @ s.W @ x + s.b @ x + s.c)


def normalized_distance(s: QuadraticSurface, x: np.ndarray) -> float:
    """|surface value| over the gradient norm, floored at 1e-12."""
    x = np.asarray(x, dtype=float)
    grad = s.W @ x + s.b
    denom = max(float(np.linalg.norm(grad)), GRADIENT_NORM_FLOOR)
    return abs(surface_value(s, x)) / denom


@dataclass(frozen=True)
class TrainedModel:
    """Pair of surfaces plus the preprocessing state needed to predict
    directly on raw (unnormalized) inputs."""

    surface_pos: QuadraticSurface
    surface_neg: QuadraticSurface
    mode: LiftingMode
    scaler: NormalizationParams
    n: int

    def __post_init__(self):
        if not (
            self.surface_pos.n == self.surface_neg.n == self.n
            and self.scaler.minimum.size == self.n
        ):
            raise InvalidInputError("model components disagree on feature dimension")


def _distances(m: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Normalized distances to both surfaces, shape (rows, 2)."""
    Xs = apply_scaler(m.scaler, X)
    out = np.empty((Xs.shape[0], 2))
    for k, s in enumerate((m.surface_pos, m.surface_neg)):
        vals = 0.5 * np.einsum("ij,ij->i", Xs @ s.W, Xs) + Xs @ s.b + s.c
        grads = Xs @ s.W.T + s.b
        denom = np.maximum(np.linalg.norm(grads, axis=1), GRADIENT_NORM_FLOOR)
        out[:, k] = np.abs(vals) / denom
    return out


def predict(m: TrainedModel, x: np.ndarray) -> int:
    """Label one raw sample: +1 if it is at least as close (in normalized
    distance) to the positive surface as to the negative one."""
    x = np.asarray(x, dtype=float)
    if x.shape != (m.n,):
        raise InvalidInputError(f"expected a vector of length {m.n}, got {x.shape}")
    d = _distances(m, x[None, :])[0]
    return 1 if d[0] <= d[1] else -1


def predict_many(m: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Vectorized predict over rows of a raw feature matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != m.n:
        raise InvalidInputError(f"expected {m.n} features, got {X.shape[1]}")
    d = _distances(m, X)
    return np.where(d[:, 0] <= d[:, 1], 1, -1)


def _surface_doc(s: QuadraticSurface, mode: LiftingMode) -> dict:
    head = hvec(s.W) if mode is LiftingMode.FULL else dvec(s.W)
    return {"w_head": head.tolist(), "b": s.b.tolist(), "c": s.c}


def save_model(m: TrainedModel, path) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "mode": m.mode.value,
        "n": m.n,
        "scaler": {
            "min": m.scaler.minimum.tolist(),
            "max": m.scaler.maximum.tolist(),
        },
        "surface_pos": _surface_doc(m.surface_pos, m.mode),
        "surface_neg": _surface_doc(m.surface_neg, m.mode),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _surface_from_doc(doc: dict, n: int, mode: LiftingMode) -> QuadraticSurface:
    w = np.concatenate([doc["w_head"], doc["b"], [doc["c"]]])
    try:
        W, b, c = unpack_weights(w, n, mode)
    except InvalidInputError as exc:
        raise ModelInconsistencyError(str(exc)) from exc
    return QuadraticSurface(W=W, b=b, c=c)


def load_model(path) -> TrainedModel:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedModelFileError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedModelFileError(f"{path}: expected a key/value document")
    try:
        version = doc["format_version"]
        if version != MODEL_FORMAT_VERSION:
            raise ModelVersionError(
                f"unsupported model format version {version!r} "
                f"(supported: {MODEL_FORMAT_VERSION})"
            )
        mode = LiftingMode(doc["mode"])
        n = int(doc["n"])
        scaler_doc = doc["scaler"]
        scaler = NormalizationParams(
            minimum=np.array(scaler_doc["min"], dtype=float),
            maximum=np.array(scaler_doc["max"], dtype=float),
        )
        sp = _surface_from_doc(doc["surface_pos"], n, mode)
        sn = _surface_from_doc(doc["surface_neg"], n, mode)
    except KeyError as exc:
        raise MalformedModelFileError(f"{path}: missing field {exc}") from exc
    if scaler.minimum.size != n:
        raise ModelInconsistencyError(
            f"{path}: scaler dimension {scaler.minimum.size} != n={n}"
        )
    try:
        return TrainedModel(surface_pos=sp, surface_neg=sn, mode=mode,
                            scaler=scaler, n=n)
    except InvalidInputError as exc:
        raise ModelInconsistencyError(f"{path}: {exc}") from exc
