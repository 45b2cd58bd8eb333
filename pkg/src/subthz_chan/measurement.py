"""Core data model for directional sub-THz channel measurements.

Power values are dB relative to the campaign reference (dBm at the
receiver unless stated otherwise), delays are nanoseconds, azimuths are
degrees in [0, 360).  All record types are immutable; operations return
new instances instead of mutating.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

SPEED_OF_LIGHT_M_S = 299_792_458.0

#: close-in reference distance shared by every path-loss model here
D0_M = 1.0

#: sounder delay-bin resolution
DEFAULT_DELAY_RESOLUTION_NS = 2.0

#: slack when checking that recorded delays sit on the sounder's delay lattice
DELAY_GRID_TOL_NS = 1e-6


class ValidationError(ValueError):
    """A record violates a data-model invariant; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class NoSignalError(RuntimeError):
    """No power above the noise floor where detectable signal is required."""


class Polarization(str, Enum):
    """TX-to-RX antenna polarization configuration."""

    VV = "VV"
    VH = "VH"


def wrap_deg(angle_deg: float) -> float:
    """Wrap an angle into [0, 360)."""
    return angle_deg % 360.0


def wrap_signed_deg(angle_deg: float) -> float:
    """Wrap an angle into (-180, 180]."""
    w = (angle_deg + 180.0) % 360.0 - 180.0
    return 180.0 if w == -180.0 else w


def circular_distance_deg(a_deg: float, b_deg: float) -> float:
    """Shortest angular distance between two azimuths, in [0, 180]."""
    return abs(wrap_signed_deg(a_deg - b_deg))


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class AntennaConfig:
    """Horn-antenna setup for one end of the link.

    The azimuth sweep grid is uniform with ``az_step_deg`` spacing, so the
    step must divide 360 evenly and cannot be narrower than the beamwidth.
    """

    gain_dbi: float = 27.0
    hpbw_deg: float = 8.0
    az_step_deg: float = 8.0
    height_m: float = 1.5

    def __post_init__(self):
        if self.gain_dbi <= 0:
            raise ValidationError("gain_dbi", f"must be > 0, got {self.gain_dbi}")
        if not 0.0 < self.hpbw_deg <= self.az_step_deg <= 360.0:
            raise ValidationError(
                "hpbw_deg",
                f"need 0 < hpbw_deg <= az_step_deg <= 360, got "
                f"hpbw={self.hpbw_deg}, step={self.az_step_deg}",
            )
        turns = 360.0 / self.az_step_deg
        if abs(turns - round(turns)) > 1e-9:
            raise ValidationError("az_step_deg", f"{self.az_step_deg} does not divide 360 evenly")

    @classmethod
    def default_tx(cls) -> "AntennaConfig":
        return cls(height_m=3.0)

    @classmethod
    def default_rx(cls) -> "AntennaConfig":
        return cls(height_m=1.5)

    @property
    def n_az_bins(self) -> int:
        return round(360.0 / self.az_step_deg)


@dataclass(frozen=True)
class DirectionalPdp:
    """Power delay profile for one fixed (TX azimuth, RX azimuth) pointing pair.

    Delays must be strictly increasing; bins removed by thresholding are
    simply absent, so gaps in the delay axis are legal.
    """

    tx_az_deg: float
    rx_az_deg: float
    delays_ns: tuple[float, ...]
    powers_db: tuple[float, ...]
    noise_floor_db: float

    def __post_init__(self):
        object.__setattr__(self, "delays_ns", tuple(float(t) for t in self.delays_ns))
        object.__setattr__(self, "powers_db", tuple(float(p) for p in self.powers_db))
        for name in ("tx_az_deg", "rx_az_deg"):
            az = getattr(self, name)
            if not 0.0 <= az < 360.0:
                raise ValidationError(name, f"azimuth {az} outside [0, 360)")
        if not self.delays_ns:
            raise ValidationError("delays_ns", "PDP has no bins")
        if len(self.powers_db) != len(self.delays_ns):
            raise ValidationError("powers_db", "length differs from delays_ns")
        if any(b <= a for a, b in zip(self.delays_ns, self.delays_ns[1:])):
            raise ValidationError("delays_ns", "delays must be strictly increasing")
        if not all(math.isfinite(p) for p in self.powers_db):
            raise ValidationError("powers_db", "powers must be finite")
        if not math.isfinite(self.noise_floor_db):
            raise ValidationError("noise_floor_db", "must be finite")

    @property
    def direction(self) -> tuple[float, float]:
        return (self.tx_az_deg, self.rx_az_deg)

    @property
    def peak_db(self) -> float:
        return max(self.powers_db)

    def is_detectable(self) -> bool:
        return self.peak_db > self.noise_floor_db

    def detected(self) -> "DirectionalPdp":
        """Bins at or above the noise floor.

        Raises NoSignalError when not even the peak clears the floor.
        """
        if not self.is_detectable():
            raise NoSignalError(
                f"({self.tx_az_deg}, {self.rx_az_deg}): peak {self.peak_db:.1f} dB "
                f"does not clear the noise floor {self.noise_floor_db:.1f} dB"
            )
        kept = [
            (t, p)
            for t, p in zip(self.delays_ns, self.powers_db)
            if p >= self.noise_floor_db
        ]
        return replace(
            self,
            delays_ns=tuple(t for t, _ in kept),
            powers_db=tuple(p for _, p in kept),
        )


def threshold_pdp(pdp: DirectionalPdp, threshold_db: float) -> DirectionalPdp:
    """Drop bins more than ``threshold_db`` below the peak or below the noise floor.

    The peak bin always survives.  Bins below the noise floor are removed
    even when they sit within the threshold window.
    """
    if threshold_db <= 0:
        raise ValidationError("threshold_db", f"must be > 0, got {threshold_db}")
    det = pdp.detected()
    cut = det.peak_db - threshold_db
    kept = [(t, p) for t, p in zip(det.delays_ns, det.powers_db) if p >= cut]
    return replace(
        det,
        delays_ns=tuple(t for t, _ in kept),
        powers_db=tuple(p for _, p in kept),
    )


def integrated_power_mw(pdp: DirectionalPdp) -> float:
    """Total linear power over the detected bins of one pointing pair."""
    det = pdp.detected()
    return sum(db_to_linear(p) for p in det.powers_db)


@dataclass(frozen=True)
class LocationMeasurement:
    """All sweeps, geometry and polarization setup for one TX-RX pair."""

    tx_id: str
    rx_id: str
    tx_pos_m: tuple[float, float, float]
    rx_pos_m: tuple[float, float, float]
    polarization: Polarization
    los: bool
    sweeps: tuple[DirectionalPdp, ...]
    tx_antenna: AntennaConfig
    rx_antenna: AntennaConfig
    tx_power_dbm: float

    def __post_init__(self):
        for name in ("tx_pos_m", "rx_pos_m"):
            pos = getattr(self, name)
            if len(pos) != 3:
                raise ValidationError(name, "position must be a 3-vector")
            object.__setattr__(self, name, tuple(float(v) for v in pos))
        object.__setattr__(self, "sweeps", tuple(self.sweeps))
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        if not self.tx_id or not self.rx_id:
            raise ValidationError("tx_id", "tx_id and rx_id must be non-empty")
        if not self.sweeps:
            raise ValidationError("sweeps", "location has no sweeps")
        if self.distance_m <= D0_M:
            raise ValidationError(
                "distance_m",
                f"TX-RX distance {self.distance_m:.3f} m must exceed {D0_M} m",
            )
        seen: set[tuple[float, float]] = set()
        for pdp in self.sweeps:
            if pdp.direction in seen:
                raise ValidationError(
                    "sweeps", f"duplicate pointing pair {pdp.direction}"
                )
            seen.add(pdp.direction)

    @property
    def distance_m(self) -> float:
        return math.dist(self.tx_pos_m, self.rx_pos_m)

    @property
    def gain_sum_dbi(self) -> float:
        return self.tx_antenna.gain_dbi + self.rx_antenna.gain_dbi

    def detectable_sweeps(self) -> tuple[DirectionalPdp, ...]:
        return tuple(s for s in self.sweeps if s.is_detectable())


def los_bearings_deg(loc: LocationMeasurement) -> tuple[float, float]:
    """Geometric (TX->RX, RX->TX) azimuth bearings from the survey positions."""
    dx = loc.rx_pos_m[0] - loc.tx_pos_m[0]
    dy = loc.rx_pos_m[1] - loc.tx_pos_m[1]
    tx_to_rx = wrap_deg(math.degrees(math.atan2(dy, dx)))
    return tx_to_rx, wrap_deg(tx_to_rx + 180.0)


@dataclass(frozen=True)
class AnalysisConfig:
    """Campaign-level analysis settings."""

    threshold_db: float = 20.0
    carrier_hz: float = 142e9
    max_measurable_pl_db: float = 152.0
    d0_m: float = D0_M

    def __post_init__(self):
        if self.threshold_db <= 0:
            raise ValidationError("threshold_db", "must be > 0")
        if self.carrier_hz <= 0:
            raise ValidationError("carrier_hz", "must be > 0")
        if self.d0_m <= 0:
            raise ValidationError("d0_m", "must be > 0")
