"""Direction-resolved cross-polarization discrimination."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .measurement import (
    LocationMeasurement,
    Polarization,
    ValidationError,
)
from .pathloss import DirectionClass, classify_directions, direction_path_loss_map


class PathClass(str, Enum):
    """Propagation mechanism behind one pointing pair."""

    BORESIGHT = "boresight"
    REFLECTION = "reflection"


@dataclass(frozen=True)
class DirectionalXpd:
    """Cross-polar discrimination of one pointing pair at one location."""

    direction: tuple[float, float]
    xpd_db: float
    path_class: PathClass
    location: tuple[str, str]

    def __post_init__(self):
        object.__setattr__(self, "path_class", PathClass(self.path_class))
        object.__setattr__(self, "direction", (float(self.direction[0]), float(self.direction[1])))
        object.__setattr__(self, "location", (str(self.location[0]), str(self.location[1])))


def classify_path(loc: LocationMeasurement, direction: tuple[float, float]) -> PathClass:
    """Boresight when the pair is the B direction of the location, else reflection."""
    classes = classify_directions(loc)
    if direction not in classes:
        raise ValidationError("direction", f"{direction} is not detectable at {loc.tx_id}-{loc.rx_id}")
    if classes[direction] is DirectionClass.B:
        return PathClass.BORESIGHT
    return PathClass.REFLECTION


def directional_xpd(
    loc_vv: LocationMeasurement, loc_vh: LocationMeasurement
) -> tuple[DirectionalXpd, ...]:
    """Per-direction XPD = PL_cross - PL_co over directions detectable in both.

    The two locations must be the same physical TX-RX placement measured
    in the two polarizations.  Path classes come from the co-polar sweep.
    """
    if (loc_vv.tx_id, loc_vv.rx_id) != (loc_vh.tx_id, loc_vh.rx_id):
        raise ValidationError(
            "rx_id",
            f"polarization pair mixes locations: "
            f"{loc_vv.tx_id}-{loc_vv.rx_id} vs {loc_vh.tx_id}-{loc_vh.rx_id}",
        )
    if loc_vv.polarization is not Polarization.VV:
        raise ValidationError("polarization", f"first location must be VV, got {loc_vv.polarization.value}")
    if loc_vh.polarization is not Polarization.VH:
        raise ValidationError("polarization", f"second location must be VH, got {loc_vh.polarization.value}")
    if loc_vv.tx_pos_m != loc_vh.tx_pos_m or loc_vv.rx_pos_m != loc_vh.rx_pos_m:
        raise ValidationError("tx_pos_m", "polarization pair was measured at different positions")

    pl_vv = direction_path_loss_map(loc_vv)
    pl_vh = direction_path_loss_map(loc_vh)
    common = sorted(set(pl_vv) & set(pl_vh))
    if not common:
        # nothing detectable in both polarizations is a data fact, not an error
        return ()
    classes = classify_directions(loc_vv)
    out = []
    for direction in common:
        path_class = (
            PathClass.BORESIGHT
            if classes.get(direction) is DirectionClass.B
            else PathClass.REFLECTION
        )
        out.append(
            DirectionalXpd(
                direction=direction,
                xpd_db=pl_vh[direction] - pl_vv[direction],
                path_class=path_class,
                location=(loc_vv.tx_id, loc_vv.rx_id),
            )
        )
    return tuple(out)


@dataclass(frozen=True)
class XpdClassSummary:
    """Population statistics of XPD within one path class."""

    mean_db: float
    std_db: float
    n: int
    cdf: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n", "summary needs at least one sample")
        if len(self.cdf) != self.n:
            raise ValidationError("cdf", "one CDF point per sample expected")


def xpd_summary(xpds: Iterable[DirectionalXpd]) -> dict[PathClass, XpdClassSummary]:
    """Mean, population std, and empirical CDF of XPD per path class.

    CDF points are (value, (k+1)/n) over the sorted values; classes with
    no samples are left out of the result.
    """
    grouped: dict[PathClass, list[float]] = {}
    for x in xpds:
        grouped.setdefault(x.path_class, []).append(x.xpd_db)
    out: dict[PathClass, XpdClassSummary] = {}
    for path_class, values in grouped.items():
        arr = np.array(sorted(values))
        n = len(arr)
        cdf = tuple((float(v), (k + 1) / n) for k, v in enumerate(arr))
        out[path_class] = XpdClassSummary(
            mean_db=float(np.mean(arr)),
            std_db=float(np.sqrt(np.mean((arr - np.mean(arr)) ** 2))),
            n=n,
            cdf=cdf,
        )
    return out


def collect_xpds(
    pairs: Iterable[tuple[LocationMeasurement, LocationMeasurement]]
) -> tuple[DirectionalXpd, ...]:
    """Directional XPDs pooled over polarization pairs."""
    out: list[DirectionalXpd] = []
    for loc_vv, loc_vh in pairs:
        out.extend(directional_xpd(loc_vv, loc_vh))
    return tuple(out)
