"""Sensitivity profiles: norms, disparity measures, families and majorization.

A profile is the vector of per-coordinate sensitivities of a query. Global
sensitivities are taken as ``||lambda||_p``, which is exact when the worst-case
change can hit every coordinate at once (decoupled coordinates) and an upper
bound otherwise.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from inid_dp import _kernels
from inid_dp.exceptions import DomainError

MAJORIZATION_TOL = 1e-12


class FamilyKind(str, enum.Enum):
    UNIFORM = "uniform"
    ONE_HOT = "one_hot"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXPONENTIAL = "exponential"


class Normalization(str, enum.Enum):
    L1_UNIT = "l1_unit"
    L2_UNIT = "l2_unit"
    NONE = "none"


@dataclass(frozen=True, eq=False)
class SensitivityProfile:
    """Immutable vector of non-negative per-coordinate sensitivities."""

    lam: np.ndarray

    def __init__(self, lam):
        arr = np.array(lam, dtype=float).reshape(-1)
        if arr.size < 1:
            raise DomainError("a profile needs at least one coordinate")
        if not np.all(np.isfinite(arr)):
            raise DomainError("profile entries must be finite")
        if np.any(arr < 0):
            raise DomainError("profile entries must be non-negative")
        if not np.any(arr > 0):
            raise DomainError("profile must have at least one positive entry")
        arr.setflags(write=False)
        object.__setattr__(self, "lam", arr)

    @property
    def K(self) -> int:
        return int(self.lam.size)

    def __len__(self) -> int:
        return self.K

    def __repr__(self) -> str:
        return f"SensitivityProfile(K={self.K}, lam={np.array2string(self.lam, precision=4, threshold=8)})"

    def norm(self, p=2) -> float:
        return lp_sensitivity(self, p)

    def is_uniform(self, rtol: float = 1e-12) -> bool:
        return bool(np.ptp(self.lam) <= rtol * self.lam.max())


def _as_profile(profile) -> SensitivityProfile:
    if isinstance(profile, SensitivityProfile):
        return profile
    return SensitivityProfile(profile)


def lp_sensitivity(profile, p=2) -> float:
    """``||lambda||_p`` for ``p`` in ``[1, inf]``; ``p=inf`` gives the max entry.

    Raises:
      DomainError: for ``p < 1``.
    """
    lam = _as_profile(profile).lam
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"norm order must be >= 1, got {p}")
    if math.isinf(p):
        return float(lam.max())
    # scale by the max so large p cannot overflow
    m = lam.max()
    return float(m * np.sum((lam / m) ** p) ** (1.0 / p))


def gini(profile) -> float:
    """Gini coefficient ``sum_ij |l_i - l_j| / (2 K ||l||_1)``."""
    lam = _as_profile(profile).lam
    total = lam.sum()
    g = _kernels.pairwise_abs_diff(np.ascontiguousarray(lam)) / (2.0 * lam.size * total)
    # prefix-sum cancellation can leave -1e-17 on a flat profile
    return max(float(g), 0.0)


def disparity_nu(profile) -> float:
    """Mean-to-max ratio ``||l||_1 / (K max_i l_i)``."""
    lam = _as_profile(profile).lam
    return float(lam.sum() / (lam.size * lam.max()))


def majorizes(a, b, tol: float = MAJORIZATION_TOL) -> bool:
    """True iff ``a`` majorizes ``b`` (``a`` is at least as spread as ``b``).

    Compares descending-sorted prefix sums, with equal totals required, up to
    an absolute tolerance ``tol``.

    Raises:
      DomainError: on length mismatch.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise DomainError(f"length mismatch: {a.size} vs {b.size}")
    ca = np.cumsum(np.sort(a)[::-1])
    cb = np.cumsum(np.sort(b)[::-1])
    if abs(ca[-1] - cb[-1]) > tol:
        return False
    return bool(np.all(ca >= cb - tol))


@dataclass(frozen=True)
class ProfileFamily:
    kind: FamilyKind
    K: int
    normalization: Normalization = Normalization.L2_UNIT

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "normalization",
                           Normalization(self.normalization))
        if int(self.K) < 1:
            raise DomainError(f"K must be >= 1, got {self.K}")


def generate(family: ProfileFamily) -> SensitivityProfile:
    """Build a profile of the named shape.

    ``uniform``: all ones; ``one_hot``: last coordinate only; ``linear``,
    ``quadratic``, ``exponential``: proportional to ``i``, ``i**2``, ``e**i``
    for ``i = 1..K``. The exponential family is evaluated as ``e**(i-K)``.
    """
    K = int(family.K)
    i = np.arange(1, K + 1, dtype=float)
    kind = family.kind
    if kind is FamilyKind.UNIFORM:
        lam = np.ones(K)
    elif kind is FamilyKind.ONE_HOT:
        lam = np.zeros(K)
        lam[-1] = 1.0
    elif kind is FamilyKind.LINEAR:
        lam = i
    elif kind is FamilyKind.QUADRATIC:
        lam = i * i
    else:
        lam = np.exp(i - K)
    if family.normalization is Normalization.L1_UNIT:
        lam = lam / lam.sum()
    elif family.normalization is Normalization.L2_UNIT:
        lam = lam / lp_sensitivity(lam, 2)
    return SensitivityProfile(lam)


def family_profile(kind, K: int, normalization="l2_unit") -> SensitivityProfile:
    """Shorthand for ``generate(ProfileFamily(kind, K, normalization))``."""
    return generate(ProfileFamily(FamilyKind(kind), int(K),
                                  Normalization(normalization)))


def robin_hood_transfer(x, i: int, j: int, fraction: float) -> np.ndarray:
    """Move ``fraction`` of half the gap from the larger of ``x[i], x[j]`` to
    the smaller. For ``fraction`` in ``(0, 1]`` the result is majorized by
    ``x``."""
    x = np.array(x, dtype=float)
    hi, lo = (i, j) if x[i] >= x[j] else (j, i)
    amount = 0.5 * fraction * (x[hi] - x[lo])
    x[hi] -= amount
    x[lo] += amount
    return x


def load_profile(path) -> SensitivityProfile:
    """Read a profile from JSON ``{"lambda": [...]}`` or a one-column CSV.

    A CSV may carry a non-numeric header line, which is skipped.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        obj = json.loads(text)
        if not isinstance(obj, dict) or "lambda" not in obj:
            raise DomainError(f"{path}: expected a JSON object with key 'lambda'")
        return SensitivityProfile(obj["lambda"])
    values = []
    for n, row in enumerate(csv.reader(text.splitlines())):
        if not row or not row[0].strip():
            continue
        if len(row) != 1:
            raise DomainError(f"{path}:{n + 1}: expected a single column")
        try:
            values.append(float(row[0]))
        except ValueError:
            if values or n > 0:
                raise DomainError(f"{path}:{n + 1}: not a number: {row[0]!r}")
    return SensitivityProfile(values)


def save_profile(profile, path) -> None:
    lam = _as_profile(profile).lam
    Path(path).write_text(json.dumps({"lambda": lam.tolist()}))
