"""Shared builders for the test suite."""
from __future__ import annotations

import math

from hypothesis import HealthCheck, settings

from subthz_chan import (
    AntennaConfig,
    DirectionalPdp,
    LocationMeasurement,
    Polarization,
)

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_pdp(delays, powers, tx_az=0.0, rx_az=0.0, floor=-200.0):
    return DirectionalPdp(
        tx_az_deg=tx_az,
        rx_az_deg=rx_az,
        delays_ns=tuple(delays),
        powers_db=tuple(powers),
        noise_floor_db=floor,
    )


def make_location(
    sweeps,
    distance=10.0,
    pol=Polarization.VV,
    los=True,
    tx_id="TX1",
    rx_id="RX1",
    tx_power=0.0,
):
    """Location with the TX straight across the aisle: LOS bearings (180, 0).

    The TX sits at height 3 m and the RX at 1.5 m, so the ground-plane
    offset is sqrt(d^2 - 1.5^2) and the 3D separation is exactly ``distance``.
    """
    x = math.sqrt(distance * distance - 2.25)
    return LocationMeasurement(
        tx_id=tx_id,
        rx_id=rx_id,
        tx_pos_m=(x, 0.0, 3.0),
        rx_pos_m=(0.0, 0.0, 1.5),
        polarization=pol,
        los=los,
        sweeps=tuple(sweeps),
        tx_antenna=AntennaConfig.default_tx(),
        rx_antenna=AntennaConfig.default_rx(),
        tx_power_dbm=tx_power,
    )
