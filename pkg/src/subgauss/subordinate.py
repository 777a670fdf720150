"""Moving-window transforms of Gaussian paths.

The transform catalog is closed: every entry has an analytically known
marginal law under standard normal input, so thresholds and tail oracles
downstream stay exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from subgauss.gausslin import SeriesMatrix, SpecError


@dataclass(frozen=True)
class Part:
    """One output coordinate of a window transform.

    kinds (lag 0 unless stated):
      identity(coord), abs(coord), square(coord),
      pareto(alpha, coord)        = (1 - Phi(x))^(-1/alpha),
      folded_pareto(alpha, coord) = (1 - F_|N|(|x|))^(-1/alpha),
      window_max(coord, lags)     = max over the given lags of the coordinate.
    """

    kind: str
    coord: int = 0
    alpha: float | None = None
    lags: tuple = (0,)

    def __post_init__(self):
        if self.kind not in (
            "identity", "abs", "square", "pareto", "folded_pareto",
            "window_max",
        ):
            raise SpecError(f"unknown transform kind {self.kind!r}")
        if self.kind in ("pareto", "folded_pareto"):
            if self.alpha is None or self.alpha <= 0:
                raise SpecError(f"{self.kind} requires alpha > 0")

    def evaluate(self, window: np.ndarray) -> np.ndarray:
        """window has shape (nlags, nobs): row l is the coordinate at lag l."""
        x = window[0]
        if self.kind == "identity":
            return x
        if self.kind == "abs":
            return np.abs(x)
        if self.kind == "square":
            return x * x
        if self.kind == "pareto":
            return ndtr(-x) ** (-1.0 / self.alpha)
        if self.kind == "folded_pareto":
            return (2.0 * ndtr(-np.abs(x))) ** (-1.0 / self.alpha)
        # window_max
        return np.max(window[list(self.lags)], axis=0)


@dataclass(frozen=True)
class WindowTransform:
    """Y_{k,i} = G_i(X_k, ..., X_{k-m}) with G_i from the catalog."""

    m: int
    parts: tuple  # tuple of Part

    def __post_init__(self):
        if self.m < 0:
            raise SpecError("window size m must be >= 0")
        for part in self.parts:
            if any(l < 0 or l > self.m for l in part.lags):
                raise SpecError("part references a lag outside [0, m]")

    @property
    def d(self) -> int:
        return len(self.parts)

    def max_coord(self) -> int:
        return max(p.coord for p in self.parts)

    def to_json(self) -> str:
        return json.dumps(
            {
                "m": self.m,
                "parts": [
                    {
                        "kind": p.kind,
                        "coord": p.coord,
                        "alpha": p.alpha,
                        "lags": list(p.lags),
                    }
                    for p in self.parts
                ],
            }
        )

    @staticmethod
    def from_json(text: str) -> "WindowTransform":
        obj = json.loads(text)
        parts = tuple(
            Part(
                kind=p["kind"],
                coord=p.get("coord", 0),
                alpha=p.get("alpha"),
                lags=tuple(p.get("lags", [0])),
            )
            for p in obj["parts"]
        )
        return WindowTransform(m=obj["m"], parts=parts)


def apply(X: SeriesMatrix, t: WindowTransform) -> SeriesMatrix:
    """Apply the moving-window transform; output length n - m.

    Output row k corresponds to input time k + m, i.e. lag l of part i reads
    X_{k+m-l}.
    """
    if X.d <= t.max_coord():
        raise SpecError(
            f"transform references coordinate {t.max_coord()} but the path "
            f"has {X.d} columns"
        )
    if X.n <= t.m:
        raise SpecError("path shorter than the transform window")
    n_out = X.n - t.m
    out = np.empty((n_out, t.d))
    for i, part in enumerate(t.parts):
        # rows of `window`: lag 0 is the current time index
        window = np.stack(
            [X.values[t.m - l : t.m - l + n_out, part.coord] for l in range(t.m + 1)]
        )
        out[:, i] = part.evaluate(window)
    meta = dict(X.meta)
    meta["transform"] = t.to_json()
    return SeriesMatrix(values=out, meta=meta)


def marginal_tail(part: Part, u: float) -> float:
    """Exact P(W > u) for pareto/folded_pareto parts: u^(-alpha) for u >= 1."""
    if part.kind not in ("pareto", "folded_pareto"):
        raise SpecError(f"no closed-form tail for kind {part.kind!r}")
    if u < 1.0:
        raise SpecError("tail is exact only for u >= 1")
    return u ** (-part.alpha)
