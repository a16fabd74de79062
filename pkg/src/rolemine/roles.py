"""Role assignment: low-rank factorization of the feature matrix.

NMF with multiplicative updates is the main route (W rows are per-node role
memberships, H rows define roles over features); SVD and k-means are the
alternative assignments. Rank is chosen by a greedy sweep that scores each
rank with an information criterion and stops after a run of non-improving
ranks.

Cost criteria: "aic" (default) is 2*(n*r + r*f) + n*f*ln(SSE/(n*f) + 1e-12).
"mdl" is b*(n*r + r*f) + max(0, (n*f/2)*log2(SSE/(n*f) + 1e-12)); note that
on column-normalized input the MDL error term floors to zero (MSE never
exceeds 1), which makes the sweep degenerate to r=1, hence the AIC default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .features import FeatureDescriptor, descriptors_from_json, descriptors_to_json

_EPS0 = 1e-12


@dataclass(frozen=True, eq=False)
class RoleModel:
    """A fitted role factorization X_normalized ~ W @ H."""

    r: int
    w: np.ndarray
    h: np.ndarray
    column_scales: np.ndarray
    descriptors: tuple[FeatureDescriptor, ...] | None
    cost: float
    criterion: str
    b: int
    seed: int

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        h = np.asarray(self.h, dtype=float)
        scales = np.asarray(self.column_scales, dtype=float)
        if not (1 <= self.r == w.shape[1] == h.shape[0]):
            raise ValueError("rank must be >= 1 and match factor shapes")
        if self.r > min(w.shape[0], h.shape[1]):
            raise ValueError("rank must not exceed min(n, f)")
        if (w < 0).any() or (h < 0).any():
            raise ValueError("factors must be non-negative")
        if (scales <= 0).any():
            raise ValueError("column scales must be positive")
        if h.shape[1] != scales.shape[0]:
            raise ValueError("one scale per feature column required")
        if not np.isfinite(self.cost):
            raise ValueError("model cost must be finite")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "column_scales", scales)
        if self.descriptors is not None:
            object.__setattr__(self, "descriptors", tuple(self.descriptors))


def normalize_columns(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each column so its max is 1; all-zero columns are untouched
    (scale 1). Returns (scaled matrix, per-column scales)."""
    x = np.asarray(x, dtype=float)
    scales = x.max(axis=0) if x.size else np.ones(x.shape[1])
    scales = np.where(scales > 0, scales, 1.0)
    return x / scales, scales


def _validate_input(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("x must be a non-empty 2-d matrix")
    if not np.isfinite(x).all():
        raise ValueError("x must be finite")
    if (x < 0).any():
        raise ValueError("x must be non-negative")
    return x


def nmf_factorize(
    x: np.ndarray,
    r: int,
    seed: int = 0,
    maxiter: int = 500,
    tol: float = 1e-6,
    w0: np.ndarray | None = None,
    h0: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, list[float]]:
    """Multiplicative-update NMF for the Frobenius objective 0.5*||x - WH||^2.

    Returns (W, H, objective history). The history starts at the initial
    point and never increases. Default init is |N(0,1)| scaled by max(x);
    w0/h0 override it (used by the rank sweep to slice one shared draw).
    """
    x = _validate_input(x)
    n, f = x.shape
    if not 1 <= r <= min(n, f):
        raise ValueError(f"rank {r} outside 1..min(n,f)={min(n, f)}")
    if maxiter < 1:
        raise ValueError("maxiter must be >= 1")
    rng = np.random.default_rng(seed)
    scale = x.max() if x.max() > 0 else 1.0
    w = np.abs(rng.standard_normal((n, r))) * scale if w0 is None else np.array(w0, dtype=float)
    h = np.abs(rng.standard_normal((r, f))) * scale if h0 is None else np.array(h0, dtype=float)
    if w.shape != (n, r) or h.shape != (r, f):
        raise ValueError("w0/h0 shapes do not match (n, r) and (r, f)")
    eps = 1e-12
    history = [0.5 * float(((x - w @ h) ** 2).sum())]
    for _ in range(maxiter):
        h *= (w.T @ x) / (w.T @ w @ h + eps)
        w *= (x @ h.T) / (w @ h @ h.T + eps)
        obj = 0.5 * float(((x - w @ h) ** 2).sum())
        history.append(obj)
        prev = history[-2]
        if prev == 0.0 or (prev - obj) / prev < tol:
            break
    return w, h, history


def svd_factorize(x: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-r truncated SVD: returns (U_r, S_r, V_r) with x ~ U_r diag(S_r) V_r^T."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("x must be a non-empty 2-d matrix")
    if not 1 <= r <= min(x.shape):
        raise ValueError(f"rank {r} outside 1..min(n,f)={min(x.shape)}")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    return u[:, :r], s[:r], vt[:r].T


def model_cost(x: np.ndarray, w: np.ndarray, h: np.ndarray, criterion: str = "aic", b: int = 16) -> float:
    """Score a factorization: parameter-count complexity plus an error term
    driven by log mean squared error."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    h = np.asarray(h, dtype=float)
    if w.shape[0] != x.shape[0] or h.shape[1] != x.shape[1] or w.shape[1] != h.shape[0]:
        raise ValueError("shape mismatch between x, w, h")
    if b < 1:
        raise ValueError("b must be >= 1")
    n, f = x.shape
    r = w.shape[1]
    sse = float(((x - w @ h) ** 2).sum())
    mse = sse / (n * f)
    if criterion == "mdl":
        error_bits = (n * f / 2.0) * np.log2(mse + _EPS0)
        return float(b * (n * r + r * f) + max(0.0, error_bits))
    if criterion == "aic":
        return float(2.0 * (n * r + r * f) + (n * f) * np.log(mse + _EPS0))
    raise ValueError(f"unknown criterion {criterion!r}")


def select_rank(
    x: np.ndarray,
    criterion: str = "aic",
    b: int = 16,
    trials: int = 5,
    seed: int = 1,
    descriptors=None,
    maxiter: int = 500,
    tol: float = 1e-6,
    restarts: int = 1,
) -> RoleModel:
    """Greedy rank search over column-normalized x.

    One random (W0, H0) pair is drawn at full rank and sliced to the first r
    columns/rows for each candidate rank; the sweep stops after `trials`
    consecutive ranks without a cost improvement or at r = min(n, f), and the
    cheapest model wins. `restarts` > 1 repeats the sweep with fresh draws
    and keeps the overall best.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    x = _validate_input(x)
    xn, scales = normalize_columns(x)
    n, f = xn.shape
    rmax = min(n, f)
    rng = np.random.default_rng(seed)
    scale0 = xn.max() if xn.max() > 0 else 1.0

    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    for _ in range(restarts):
        w_full = np.abs(rng.standard_normal((n, rmax))) * scale0
        h_full = np.abs(rng.standard_normal((rmax, f))) * scale0
        mincost = np.inf
        failed = 0
        for r in range(1, rmax + 1):
            w, h, _ = nmf_factorize(
                xn, r, maxiter=maxiter, tol=tol, w0=w_full[:, :r], h0=h_full[:r, :]
            )
            cost = model_cost(xn, w, h, criterion=criterion, b=b)
            if cost < mincost:
                mincost = cost
                failed = 0
                if best is None or cost < best[0]:
                    best = (cost, r, w, h)
            else:
                failed += 1
                if failed >= trials:
                    break
    assert best is not None
    cost, r, w, h = best
    return RoleModel(
        r=r,
        w=w,
        h=h,
        column_scales=scales,
        descriptors=tuple(descriptors) if descriptors is not None else None,
        cost=cost,
        criterion=criterion,
        b=b,
        seed=seed,
    )


def factorize_at_rank(
    x: np.ndarray,
    r: int,
    criterion: str = "aic",
    b: int = 16,
    seed: int = 1,
    descriptors=None,
    maxiter: int = 500,
    tol: float = 1e-6,
) -> RoleModel:
    """Skip the sweep and fit a model at a fixed rank (CLI --rank override)."""
    x = _validate_input(x)
    xn, scales = normalize_columns(x)
    w, h, _ = nmf_factorize(xn, r, seed=seed, maxiter=maxiter, tol=tol)
    cost = model_cost(xn, w, h, criterion=criterion, b=b)
    return RoleModel(
        r=r,
        w=w,
        h=h,
        column_scales=scales,
        descriptors=tuple(descriptors) if descriptors is not None else None,
        cost=cost,
        criterion=criterion,
        b=b,
        seed=seed,
    )


def soft_memberships(w: np.ndarray) -> np.ndarray:
    """Row-normalize memberships to distributions; all-zero rows become
    uniform."""
    w = np.asarray(w, dtype=float)
    if (w < 0).any():
        raise ValueError("memberships must be non-negative")
    sums = w.sum(axis=1, keepdims=True)
    r = w.shape[1]
    out = np.where(sums > 0, w / np.where(sums > 0, sums, 1.0), 1.0 / r)
    return out


def hard_assignment(w: np.ndarray) -> np.ndarray:
    """One role per node: the argmax membership, ties to the smallest role id."""
    w = np.asarray(w, dtype=float)
    if (w < 0).any():
        raise ValueError("memberships must be non-negative")
    return np.argmax(w, axis=1)


def kmeans_assign(x: np.ndarray, r: int, seed: int = 1, maxiter: int = 100) -> np.ndarray:
    """Lloyd k-means on rows of column-normalized x.

    Deterministic: the seeded start row plus farthest-point initialization;
    an emptied cluster is re-seeded with the point farthest from its own
    center. Returns hard labels.
    """
    x = _validate_input(x)
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > x.shape[0]:
        raise ValueError("r must not exceed the number of nodes")
    xn, _ = normalize_columns(x)
    n = xn.shape[0]
    rng = np.random.default_rng(seed)
    centers = [xn[int(rng.integers(n))]]
    while len(centers) < r:
        dists = np.min([((xn - c) ** 2).sum(axis=1) for c in centers], axis=0)
        centers.append(xn[int(np.argmax(dists))])
    centers = np.array(centers)
    labels = np.zeros(n, dtype=int)
    for _ in range(maxiter):
        dists = ((xn[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(dists, axis=1)
        for k in range(r):
            members = new_labels == k
            if members.any():
                centers[k] = xn[members].mean(axis=0)
            else:
                own = dists[np.arange(n), new_labels]
                far = int(np.argmax(own))
                centers[k] = xn[far]
                new_labels[far] = k
        if (new_labels == labels).all():
            return new_labels
        labels = new_labels
    return labels


def model_to_json(model: RoleModel) -> str:
    doc = {
        "r": model.r,
        "criterion": model.criterion,
        "b": model.b,
        "seed": model.seed,
        "column_scales": [float(v) for v in model.column_scales],
        "descriptors": None
        if model.descriptors is None
        else json.loads(descriptors_to_json(model.descriptors)),
        "W": [[float(v) for v in row] for row in model.w],
        "H": [[float(v) for v in row] for row in model.h],
        "cost": float(model.cost),
    }
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text: str) -> RoleModel:
    doc = json.loads(text)
    descriptors = None
    if doc.get("descriptors") is not None:
        descriptors = descriptors_from_json(json.dumps(doc["descriptors"]))
    return RoleModel(
        r=doc["r"],
        w=np.array(doc["W"], dtype=float),
        h=np.array(doc["H"], dtype=float),
        column_scales=np.array(doc["column_scales"], dtype=float),
        descriptors=descriptors,
        cost=doc["cost"],
        criterion=doc["criterion"],
        b=doc["b"],
        seed=doc["seed"],
    )
