"""Link-budget chain: register conversions, packet loss, ESP, path loss, FSL.

Everything here is a pure function over immutable inputs. All logarithms are
base-10 double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core_types import LinkParams, RadioConfig, SignalSample


@dataclass(frozen=True)
class LossBreakdown:
    """Budget attribution for one received sample.

    excess_db is path_loss_db - fsl_db by construction: the part of the
    attenuation not explained by ideal free-space propagation (environment,
    hardware, multipath).
    """

    esp_dbm: float
    path_loss_db: float
    fsl_db: float
    excess_db: float


def rssi_from_register(raw: int, offset_db: float) -> float:
    """Convert the raw packet-RSSI register byte to dBm (raw minus offset)."""
    if not 0 <= raw <= 255:
        raise ValueError(f"raw RSSI register value must be an unsigned byte, got {raw!r}")
    if offset_db <= 0:
        raise ValueError(f"offset_db must be positive, got {offset_db!r}")
    return raw - offset_db


def snr_from_register(raw: int) -> float:
    """Convert the raw packet-SNR register (signed byte) to dB.

    The register holds the SNR in quarter-dB steps, so the scaling is a
    fixed divide by 4.
    """
    if not -128 <= raw <= 127:
        raise ValueError(f"raw SNR register value must be a signed byte, got {raw!r}")
    return raw / 4


def packet_loss_pct(lost: int, sent: int) -> float:
    """Packet loss as a percentage of packets sent."""
    if sent <= 0:
        raise ValueError(f"loss percentage undefined: sent={sent!r}")
    if lost < 0 or lost > sent:
        raise ValueError(f"inconsistent counts: lost={lost!r} of sent={sent!r}")
    return 100 * lost / sent


def esp(sample: SignalSample) -> float:
    """Effective signal power in dBm: received power attributable to the
    signal alone, after removing the noise contribution bundled into RSSI.

    ESP = RSSI + SNR - 10*log10(1 + 10^(0.1*SNR)); strictly below RSSI for
    every finite SNR.
    """
    snr = sample.snr_db
    return sample.rssi_dbm + snr - 10 * math.log10(1 + 10 ** (0.1 * snr))


def path_loss(params: LinkParams, config: RadioConfig, esp_dbm: float) -> float:
    """Empirical path loss: transmit power plus antenna gains minus ESP."""
    return config.tx_power_dbm + params.gt_dbi + params.gr_dbi - esp_dbm


def free_space_loss(distance_m: float, freq_hz: float, c_mps: float) -> float:
    """Free-space loss in dB from the Friis relation.

    FSL = 20*log10(d) + 20*log10(f) - 20*log10(c) + 20*log10(4*pi).
    """
    if distance_m <= 0:
        raise ValueError(f"distance_m must be positive, got {distance_m!r}")
    if freq_hz <= 0:
        raise ValueError(f"freq_hz must be positive, got {freq_hz!r}")
    if c_mps <= 0:
        raise ValueError(f"c_mps must be positive, got {c_mps!r}")
    return (
        20 * math.log10(distance_m)
        + 20 * math.log10(freq_hz)
        - 20 * math.log10(c_mps)
        + 20 * math.log10(4 * math.pi)
    )


def loss_breakdown(params: LinkParams, config: RadioConfig, sample: SignalSample) -> LossBreakdown:
    """Full budget for one sample: ESP -> path loss -> FSL -> excess."""
    esp_dbm = esp(sample)
    pl_db = path_loss(params, config, esp_dbm)
    fsl_db = free_space_loss(params.distance_m, config.freq_hz, params.c_mps)
    return LossBreakdown(esp_dbm=esp_dbm, path_loss_db=pl_db, fsl_db=fsl_db, excess_db=pl_db - fsl_db)
