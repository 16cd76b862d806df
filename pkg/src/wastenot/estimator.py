"""Pixel-area to waste-weight regression.

One ordinary-least-squares line is fitted on total tray area against total
tray weight from calibration weighings; per-tray waste weight is then
predicted from the summed pixel area of all three categories. All
accumulation is double precision with the centered (x - x̄) formulation so
large pixel counts stay numerically tame.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


class EstimatorError(ValueError):
    pass


class InsufficientSamples(EstimatorError):
    def __init__(self, n: int):
        super().__init__(f"need at least 2 calibration samples, got {n}")


class DegenerateX(EstimatorError):
    def __init__(self):
        super().__init__("all samples share one pixel area; slope is undefined")


class InvalidCalibrationFile(EstimatorError):
    pass


@dataclass(frozen=True)
class WeightSample:
    """One calibration pair: measured pixel area and weighed grams."""

    area_px: int
    weight_g: float

    def __post_init__(self):
        if self.area_px < 0:
            raise ValueError("area_px must be >= 0")
        if self.weight_g < 0:
            raise ValueError("weight_g must be >= 0")


@dataclass(frozen=True)
class LinearModel:
    slope: float  # grams per pixel
    intercept: float  # grams
    r_squared: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if not 0.0 <= self.r_squared <= 1.0:
            raise ValueError("r_squared must be in [0, 1]")

    def to_doc(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "n_samples": self.n_samples,
        }

    @classmethod
    def from_doc(cls, doc) -> "LinearModel":
        return cls(
            slope=float(doc["slope"]),
            intercept=float(doc["intercept"]),
            r_squared=float(doc["r_squared"]),
            n_samples=int(doc["n_samples"]),
        )


def fit(samples: Sequence[WeightSample]) -> LinearModel:
    """Fit weight = slope * area + intercept by ordinary least squares.

    r_squared is 1 - SS_res/SS_tot, defined as 1 when SS_tot is zero (a
    constant-weight calibration set is fitted perfectly by a flat line).
    Raises InsufficientSamples for fewer than two points and DegenerateX
    when every sample shares the same area.
    """
    n = len(samples)
    if n < 2:
        raise InsufficientSamples(n)

    x_mean = sum(s.area_px for s in samples) / n
    y_mean = sum(s.weight_g for s in samples) / n
    s_xx = sum((s.area_px - x_mean) ** 2 for s in samples)
    s_xy = sum((s.area_px - x_mean) * (s.weight_g - y_mean) for s in samples)
    if s_xx == 0.0:
        raise DegenerateX()

    slope = s_xy / s_xx
    intercept = y_mean - slope * x_mean

    ss_res = sum((s.weight_g - (slope * s.area_px + intercept)) ** 2 for s in samples)
    ss_tot = sum((s.weight_g - y_mean) ** 2 for s in samples)
    if ss_tot == 0.0:
        r_squared = 1.0
    else:
        # Mathematically in [0, 1] for OLS with intercept; clamp away
        # last-ulp float excursions so the model invariant holds.
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))

    return LinearModel(slope=slope, intercept=intercept, r_squared=r_squared, n_samples=n)


def predict(model: LinearModel, area_px: int) -> float:
    """Predicted waste grams for a tray area; negative raw values clamp to 0."""
    if area_px < 0:
        raise ValueError("area_px must be >= 0")
    return max(0.0, model.slope * area_px + model.intercept)


CSV_HEADER = ("area_px", "weight_g")


def load_samples_csv(path: str | Path) -> list[WeightSample]:
    """Read calibration samples from a CSV file with header area_px,weight_g."""
    path = Path(path)
    try:
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise InvalidCalibrationFile(f"{path}: empty file") from None
            if tuple(h.strip() for h in header) != CSV_HEADER:
                raise InvalidCalibrationFile(
                    f"{path}: expected header 'area_px,weight_g', got {','.join(header)!r}"
                )
            samples = []
            for line_no, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                try:
                    samples.append(
                        WeightSample(area_px=int(row[0]), weight_g=float(row[1]))
                    )
                except (IndexError, ValueError) as exc:
                    raise InvalidCalibrationFile(f"{path}:{line_no}: {exc}") from None
    except OSError as exc:
        raise InvalidCalibrationFile(f"cannot read {path}: {exc}") from None
    return samples


def fit_from_csv(path: str | Path) -> LinearModel:
    return fit(load_samples_csv(path))
