"""LoRa PHY timing and antenna geometry: symbol duration, time on air,
nominal bit rate, quarter-wave monopole dimensioning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core_types import CodingRate, RadioConfig

# Low-data-rate optimization is conventionally switched on once symbols
# exceed 16 ms (it stabilises the modem against clock drift on long symbols).
LDRO_SYMBOL_THRESHOLD_S = 0.016

# Quarter-wave monopole factors calibrated against the reference 433 MHz
# build: a 16.5 cm radiating element (free-space lambda/4 would be 17.3 cm,
# so the copper element carries a practical velocity/end-effect shortening)
# and four 18.4 cm ground radials, slightly longer than lambda/4, drooped 45
# degrees. Nominal gain: 2.15 dBi dipole equivalent + 3 dB ground reflection.
ELEMENT_LENGTH_FACTOR = 0.953
RADIAL_LENGTH_FACTOR = 1.0625
RADIAL_DROOP_DEG = 45.0
MONOPOLE_GAIN_DBI = 5.15


class AirtimeConfigError(ValueError):
    """The configuration cannot be mapped onto the airtime formula."""


@dataclass(frozen=True)
class FrameParams:
    """Frame-level inputs to the airtime formula.

    low_data_rate_optimize=None means "decide from the symbol duration"
    (see LDRO_SYMBOL_THRESHOLD_S); pass an explicit bool to override.
    """

    payload_bytes: int
    preamble_symbols: int = 8
    explicit_header: bool = True
    crc_on: bool = True
    low_data_rate_optimize: bool | None = None

    def __post_init__(self) -> None:
        if self.payload_bytes < 0:
            raise ValueError(f"payload_bytes must be >= 0, got {self.payload_bytes!r}")
        if self.preamble_symbols < 0:
            raise ValueError(f"preamble_symbols must be >= 0, got {self.preamble_symbols!r}")


@dataclass(frozen=True)
class MonopoleDesign:
    element_len_m: float
    radial_len_m: float
    radial_angle_deg: float
    gain_dbi: float

    def __post_init__(self) -> None:
        if self.element_len_m <= 0:
            raise ValueError(f"element_len_m must be positive, got {self.element_len_m!r}")
        if self.radial_len_m <= self.element_len_m:
            raise ValueError("ground radials must be longer than the radiating element")


def symbol_duration(config: RadioConfig) -> float:
    """Duration of one symbol in seconds: 2^SF / BW."""
    return (2 ** config.sf) / config.bw_hz


def low_data_rate_optimize(config: RadioConfig, frame: FrameParams) -> bool:
    """Resolve the effective LDRO flag (explicit override, else auto rule)."""
    if frame.low_data_rate_optimize is not None:
        return frame.low_data_rate_optimize
    return symbol_duration(config) > LDRO_SYMBOL_THRESHOLD_S


def coding_rate_index(cr: CodingRate) -> int:
    """Map a stored k/8 rate onto the transceiver's coding index 1..4.

    Only 4/8 has an exact transceiver equivalent (index 4, i.e. rate 4/8).
    The 5/8, 6/8 and 7/8 notations have no lossless register mapping, so the
    mapping is refused rather than silently approximated; callers must pass
    an explicit index for those rates.
    """
    if cr.num == 4 and cr.den == 8:
        return 4
    raise AirtimeConfigError(
        f"coding rate {cr} has no exact transceiver coding index; pass cr_index explicitly"
    )


def time_on_air(config: RadioConfig, frame: FrameParams, *, cr_index: int | None = None) -> float:
    """Frame airtime in seconds: preamble time plus payload-symbol time.

    Preamble: (preamble_symbols + 4.25) symbol durations. Payload:
    8 + max(ceil((8*PL - 4*SF + 28 + 16*CRC - 20*IH) / (4*(SF - 2*DE)))
            * (cr_index + 4), 0) symbols.
    """
    if cr_index is None:
        cr_index = coding_rate_index(config.cr)
    if cr_index not in (1, 2, 3, 4):
        raise AirtimeConfigError(f"cr_index must be 1..4, got {cr_index!r}")
    de = 1 if low_data_rate_optimize(config, frame) else 0
    denominator = 4 * (config.sf - 2 * de)
    if denominator <= 0:
        raise AirtimeConfigError(
            f"sf={config.sf} with low-data-rate optimization leaves no payload bits per symbol"
        )
    crc = 1 if frame.crc_on else 0
    ih = 0 if frame.explicit_header else 1
    numerator = 8 * frame.payload_bytes - 4 * config.sf + 28 + 16 * crc - 20 * ih
    payload_symbols = 8 + max(-(-numerator // denominator) * (cr_index + 4), 0)
    t_sym = symbol_duration(config)
    return (frame.preamble_symbols + 4.25) * t_sym + payload_symbols * t_sym


def nominal_bit_rate(config: RadioConfig) -> float:
    """Nominal raw bit rate in bits/s: SF * (BW / 2^SF) * CR."""
    return config.sf * (config.bw_hz / 2 ** config.sf) * config.cr.ratio


def monopole_dimensions(freq_hz: float, c_mps: float = 3.0e8) -> MonopoleDesign:
    """Dimension a quarter-wave monopole with a 4-radial ground plane."""
    if freq_hz <= 0:
        raise ValueError(f"freq_hz must be positive, got {freq_hz!r}")
    if c_mps <= 0:
        raise ValueError(f"c_mps must be positive, got {c_mps!r}")
    quarter_wave = c_mps / (4 * freq_hz)
    return MonopoleDesign(
        element_len_m=ELEMENT_LENGTH_FACTOR * quarter_wave,
        radial_len_m=RADIAL_LENGTH_FACTOR * quarter_wave,
        radial_angle_deg=RADIAL_DROOP_DEG,
        gain_dbi=MONOPOLE_GAIN_DBI,
    )
