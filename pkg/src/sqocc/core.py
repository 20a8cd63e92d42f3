"""Superquadric primitives and their occupancy density.

A superquadric is an ellipsoid generalized by two shape exponents that
control squareness along the north-south and east-west directions. The
inside-outside field ``f`` is < 1 inside the body, 1 on the surface and
grows outside; ``exp(-f)`` gives a soft occupancy density in (0, 1].
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

# Shape exponents are clamped to this range: below 0.2 the power 2/eps
# exceeds 10 and inside_outside becomes overflow-prone.
EPS_MIN = 0.2
EPS_MAX = 2.0

# inside_outside saturates here; exp(-F_CAP) underflows to exactly 0,
# which is the correct limiting density.
F_CAP = 1e30


# ---------------------------------------------------------------------------
# quaternion helpers (w, x, y, z), unit quaternions encode rotations
# ---------------------------------------------------------------------------

def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize near-zero quaternion")
    return q / n


def quat_conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product a*b."""
    w1, x1, y1, z1 = np.asarray(a, dtype=np.float64)
    w2, x2, y2, z2 = np.asarray(b, dtype=np.float64)
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_to_matrix(q) -> np.ndarray:
    """3x3 rotation matrix of a unit quaternion (same frame convention)."""
    w, x, y, z = np.asarray(q, dtype=np.float64)
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    return np.array([
        [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
        [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
        [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
    ])


def quat_from_matrix(R) -> np.ndarray:
    """Unit quaternion (w >= 0) of a 3x3 rotation matrix."""
    R = np.asarray(R, dtype=np.float64)
    trace = R[0, 0] + R[1, 1] + R[2, 2]
    if trace > 0.0:
        s = np.sqrt(trace + 1.0) * 2.0
        q = np.array([0.25 * s,
                      (R[2, 1] - R[1, 2]) / s,
                      (R[0, 2] - R[2, 0]) / s,
                      (R[1, 0] - R[0, 1]) / s])
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array([(R[2, 1] - R[1, 2]) / s,
                      0.25 * s,
                      (R[0, 1] + R[1, 0]) / s,
                      (R[0, 2] + R[2, 0]) / s])
    elif R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array([(R[0, 2] - R[2, 0]) / s,
                      (R[0, 1] + R[1, 0]) / s,
                      0.25 * s,
                      (R[1, 2] + R[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array([(R[1, 0] - R[0, 1]) / s,
                      (R[0, 2] + R[2, 0]) / s,
                      (R[1, 2] + R[2, 1]) / s,
                      0.25 * s])
    q = quat_normalize(q)
    if q[0] < 0.0:
        q = -q
    return q


def random_unit_quat(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    while np.linalg.norm(q) < 1e-6:
        q = rng.normal(size=4)
    return quat_normalize(q)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuperQuadric:
    """One scene primitive.

    mu      world-space center, meters
    scale   strictly positive semi-axis lengths, meters
    rot     unit quaternion (w, x, y, z), local-to-world orientation
    opacity scalar in [0, 1]
    logits  per-class scores, length C
    eps1    north-south shape exponent, clamped to [0.2, 2.0]
    eps2    east-west shape exponent, clamped to [0.2, 2.0]

    ``eps_clamped`` records whether construction had to clamp an exponent.
    """

    mu: np.ndarray
    scale: np.ndarray
    rot: np.ndarray
    opacity: float
    logits: np.ndarray
    eps1: float
    eps2: float
    eps_clamped: bool = field(init=False, default=False)

    def __post_init__(self):
        mu = _freeze(self.mu)
        scale = _freeze(self.scale)
        logits = _freeze(self.logits)
        if mu.shape != (3,) or scale.shape != (3,):
            raise ValueError("mu and scale must be 3-vectors")
        if logits.ndim != 1:
            raise ValueError("logits must be a 1-D class-score vector")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(scale)):
            raise ValueError("mu/scale must be finite")
        if not np.all(scale > 0.0):
            raise ValueError("scale components must be strictly positive")
        if not np.all(np.isfinite(logits)):
            raise ValueError("logits must be finite")
        opacity = float(self.opacity)
        if not (0.0 <= opacity <= 1.0):
            raise ValueError("opacity must lie in [0, 1]")
        rot = quat_normalize(self.rot)
        rot.flags.writeable = False
        e1, e2 = float(self.eps1), float(self.eps2)
        clamped = not (EPS_MIN <= e1 <= EPS_MAX and EPS_MIN <= e2 <= EPS_MAX)
        e1 = min(max(e1, EPS_MIN), EPS_MAX)
        e2 = min(max(e2, EPS_MIN), EPS_MAX)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "rot", rot)
        object.__setattr__(self, "opacity", opacity)
        object.__setattr__(self, "logits", logits)
        object.__setattr__(self, "eps1", e1)
        object.__setattr__(self, "eps2", e2)
        object.__setattr__(self, "eps_clamped", clamped)

    @property
    def num_classes(self) -> int:
        return self.logits.shape[0]

    def rotation_matrix(self) -> np.ndarray:
        """Local-to-world rotation."""
        return quat_to_matrix(self.rot)

    def world_to_local_matrix(self) -> np.ndarray:
        """The rotation applied when evaluating points in the local frame."""
        return quat_to_matrix(self.rot).T


@dataclass(frozen=True)
class ClassTable:
    """Semantic class labels plus the reserved free-space sentinel.

    ``free_index`` is not a logit slot; it must lie outside [0, C).
    Defaults to C.
    """

    names: tuple
    free_index: int | None = None

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if len(names) < 1:
            raise ValueError("need at least one class")
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")
        free = len(names) if self.free_index is None else int(self.free_index)
        if 0 <= free < len(names):
            raise ValueError("free_index must lie outside [0, C)")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "free_index", free)

    def __len__(self) -> int:
        return len(self.names)


@dataclass
class Scene:
    """A set of superquadric primitives over a shared class table."""

    primitives: list
    classes: ClassTable

    def __post_init__(self):
        C = len(self.classes)
        for i, sq in enumerate(self.primitives):
            if sq.num_classes != C:
                raise ValueError(
                    f"primitive {i} has {sq.num_classes} logits, expected {C}")

    def __len__(self) -> int:
        return len(self.primitives)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def to_local(sq: SuperQuadric, x) -> np.ndarray:
    """World point(s) into the primitive's local frame: R @ (x - mu).

    Accepts a single 3-vector or an (N, 3) array.
    """
    x = np.asarray(x, dtype=np.float64)
    R = sq.world_to_local_matrix()
    return (x - sq.mu) @ R.T


def to_world(sq: SuperQuadric, x_local) -> np.ndarray:
    """Inverse of :func:`to_local`."""
    x_local = np.asarray(x_local, dtype=np.float64)
    R = sq.rotation_matrix()
    return x_local @ R.T + sq.mu


def inside_outside(sq: SuperQuadric, x_local):
    """Inside-outside field f evaluated at local point(s).

    f = (|x/sx|^(2/e2) + |y/sy|^(2/e2))^(e2/e1) + |z/sz|^(2/e1),
    saturated at F_CAP. Absolute values keep fractional powers real and
    preserve the octant symmetry of the shape family. Returns a float for
    a single point, an (N,) array for (N, 3) input.
    """
    p = np.asarray(x_local, dtype=np.float64)
    single = p.ndim == 1
    ax = np.abs(p[..., 0]) / sq.scale[0]
    ay = np.abs(p[..., 1]) / sq.scale[1]
    az = np.abs(p[..., 2]) / sq.scale[2]
    a = 2.0 / sq.eps2
    b = sq.eps2 / sq.eps1
    c = 2.0 / sq.eps1
    with np.errstate(over="ignore"):
        f = (ax ** a + ay ** a) ** b + az ** c
    f = np.minimum(f, F_CAP)
    return float(f) if single else f


def density(sq: SuperQuadric, x):
    """Occupancy probability exp(-f) at world point(s); in (0, 1].

    Not weighted by the primitive's opacity; callers apply sigma where
    the aggregation requires it.
    """
    return np.exp(-inside_outside(sq, to_local(sq, x)))


def scaled_family(sq: SuperQuadric, K) -> list:
    """Copies of ``sq`` with scale multiplied by each k in K.

    K must be strictly increasing and positive.
    """
    K = [float(k) for k in K]
    if len(K) == 0:
        raise ValueError("K must be non-empty")
    if any(k <= 0.0 for k in K):
        raise ValueError("K entries must be positive")
    if any(b <= a for a, b in zip(K, K[1:])):
        raise ValueError("K must be strictly increasing")
    return [dataclasses.replace(sq, scale=k * np.asarray(sq.scale)) for k in K]
