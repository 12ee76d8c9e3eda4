"""Measurement tables from the 433 MHz field campaign: loading, validation,
lookup, and reconstruction of the derived excess-loss grid.

Tables are immutable after load and keyed by (sf, bw_hz, cr). Grid-sweep
rows carry cr=None because the coding rate in effect during that sweep was
not recorded; consumers treat those rows as 4/8 (see
MeasurementRecord.effective_cr). The coding-rate sweep rows carry explicit
cr values, which keeps their keys distinct from the grid row at the same
(sf, bw) cell.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from decimal import InvalidOperation
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .core_types import (
    BW_HZ_VALUES,
    CR_NUMERATORS,
    SF_VALUES,
    CodingRate,
    LinkParams,
    RadioConfig,
    SignalSample,
    format_decimal,
    hz_to_khz_str,
    khz_str_to_hz,
)
from .link_budget import loss_breakdown

# Fixed constants of the measurement campaign behind the bundled fixture.
# The transmit power equals the transceiver maximum and is the unique value
# (on a 0.1 dB grid) that minimises the deviation of the reconstructed
# excess-loss grid from the published one; it is a dataset-level assumption,
# overridable per run.
CAMPAIGN_TX_POWER_DBM = 20.0
CAMPAIGN_FREQ_HZ = 433_000_000
CAMPAIGN_LINK_PARAMS = LinkParams()

CSV_COLUMNS = ("sf", "bw_khz", "cr_num", "cr_den", "rssi_dbm", "snr_db", "loss_pct")

_MEASUREMENTS_RESOURCE = "field_measurements.csv"
_EXPECTED_GRID_RESOURCE = "excess_loss_expected.csv"


class MeasurementParseError(ValueError):
    """A source row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MeasurementValidationError(MeasurementParseError):
    """A parsed row violates a validated-mode invariant."""


class DuplicateRecordError(ValueError):
    """Two records share the same (sf, bw_hz, cr) key."""


class RecordNotFoundError(LookupError):
    """No record exists for the requested key."""


class MissingCellError(LookupError):
    """A grid operation needs a cell the table does not provide."""


@dataclass(frozen=True)
class MeasurementRecord:
    """One measured cell: configuration key plus mean link metrics.

    cr is None when the coding rate was not recorded for the row; rssi_dbm
    and loss_pct are None for sweep rows where only SNR was measured.
    """

    sf: int
    bw_hz: float
    cr: CodingRate | None
    rssi_dbm: float | None
    snr_db: float
    loss_pct: float | None

    @property
    def key(self) -> tuple:
        return (self.sf, self.bw_hz, self.cr)

    @property
    def effective_cr(self) -> CodingRate:
        """The coding rate to assume for this row (4/8 when unrecorded)."""
        return self.cr if self.cr is not None else CodingRate(4, 8)


class MeasurementTable:
    """Immutable keyed collection of MeasurementRecord, insertion-ordered."""

    def __init__(self, records: Iterable[MeasurementRecord]) -> None:
        table: dict[tuple, MeasurementRecord] = {}
        for record in records:
            if record.key in table:
                sf, bw_hz, cr = record.key
                raise DuplicateRecordError(
                    f"duplicate record for sf={sf}, bw_khz={hz_to_khz_str(bw_hz)}, cr={cr}"
                )
            table[record.key] = record
        self._records = table

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[MeasurementRecord]:
        return iter(self._records.values())

    def get(self, sf: int, bw_hz: float, cr: CodingRate | None = None) -> MeasurementRecord | None:
        return self._records.get((sf, bw_hz, cr))


def lookup(table: MeasurementTable, sf: int, bw_hz: float, cr: CodingRate | None = None) -> MeasurementRecord:
    """Find the record for a cell.

    cr=None targets the grid-sweep row for the cell; because unrecorded CR
    means "assume 4/8", a miss falls back to the explicit 4/8 row (and vice
    versa when cr=4/8 is requested).
    """
    record = table.get(sf, bw_hz, cr)
    if record is None:
        default = CodingRate(4, 8)
        if cr is None:
            record = table.get(sf, bw_hz, default)
        elif cr == default:
            record = table.get(sf, bw_hz, None)
    if record is None:
        wanted = "unspecified" if cr is None else str(cr)
        raise RecordNotFoundError(
            f"no record for sf={sf}, bw_khz={hz_to_khz_str(bw_hz)}, cr={wanted}"
        )
    return record


def _parse_optional_float(text: str, line_no: int, column: str) -> float | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError as exc:
        raise MeasurementParseError(line_no, f"malformed {column}: {text!r}") from exc


def _parse_row(row: list[str], line_no: int) -> MeasurementRecord:
    if len(row) != len(CSV_COLUMNS):
        raise MeasurementParseError(
            line_no, f"expected {len(CSV_COLUMNS)} columns, got {len(row)}"
        )
    sf_text, bw_text, cr_num_text, cr_den_text, rssi_text, snr_text, loss_text = (
        cell.strip() for cell in row
    )
    try:
        sf = int(sf_text)
    except ValueError as exc:
        raise MeasurementParseError(line_no, f"malformed sf: {sf_text!r}") from exc
    try:
        bw_hz = khz_str_to_hz(bw_text)
    except (ValueError, InvalidOperation) as exc:
        raise MeasurementParseError(line_no, f"malformed bw_khz: {bw_text!r}") from exc
    if (cr_num_text == "") != (cr_den_text == ""):
        raise MeasurementParseError(line_no, "cr_num and cr_den must both be set or both empty")
    cr = None
    if cr_num_text != "":
        try:
            cr = CodingRate(int(cr_num_text), int(cr_den_text))
        except ValueError as exc:
            raise MeasurementParseError(
                line_no, f"malformed coding rate: {cr_num_text!r}/{cr_den_text!r}"
            ) from exc
    rssi_dbm = _parse_optional_float(rssi_text, line_no, "rssi_dbm")
    snr_db = _parse_optional_float(snr_text, line_no, "snr_db")
    if snr_db is None:
        raise MeasurementParseError(line_no, "snr_db must not be empty")
    loss_pct = _parse_optional_float(loss_text, line_no, "loss_pct")
    return MeasurementRecord(sf, bw_hz, cr, rssi_dbm, snr_db, loss_pct)


def _validate_record(record: MeasurementRecord, line_no: int) -> None:
    if record.sf not in SF_VALUES:
        raise MeasurementValidationError(
            line_no, f"sf={record.sf} not in grid {SF_VALUES}"
        )
    if record.bw_hz not in BW_HZ_VALUES:
        raise MeasurementValidationError(
            line_no,
            f"bw_khz={hz_to_khz_str(record.bw_hz)} not in grid "
            f"{{{', '.join(hz_to_khz_str(b) for b in BW_HZ_VALUES)}}}",
        )
    if record.cr is not None and (record.cr.den != 8 or record.cr.num not in CR_NUMERATORS):
        raise MeasurementValidationError(line_no, f"cr={record.cr} not in grid (4..7)/8")
    if record.rssi_dbm is not None and record.rssi_dbm >= 0:
        raise MeasurementValidationError(
            line_no, f"rssi_dbm={record.rssi_dbm} must be negative"
        )
    if record.loss_pct is not None and not 0 <= record.loss_pct <= 100:
        raise MeasurementValidationError(
            line_no, f"loss_pct={record.loss_pct} outside [0, 100]"
        )


def _iter_source_lines(source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            yield from handle
    elif isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
    else:
        for line in source:
            yield line.decode("utf-8") if isinstance(line, bytes) else line


def load_measurements(source, mode: str = "validated") -> MeasurementTable:
    """Load a measurement CSV from a path, byte string, or open stream.

    mode="validated" enforces grid membership and range invariants per row;
    mode="freeform" accepts any parseable values.
    """
    if mode not in ("validated", "freeform"):
        raise ValueError(f"mode must be 'validated' or 'freeform', got {mode!r}")
    records: list[MeasurementRecord] = []
    header_seen = False
    duplicates: dict[tuple, int] = {}
    for line_no, line in enumerate(_iter_source_lines(source), start=1):
        text = line.rstrip("\r\n")
        if not text.strip() or text.lstrip().startswith("#"):
            continue
        row = next(csv.reader([text]))
        if not header_seen:
            if tuple(cell.strip() for cell in row) != CSV_COLUMNS:
                raise MeasurementParseError(
                    line_no, f"expected header {','.join(CSV_COLUMNS)!r}, got {text!r}"
                )
            header_seen = True
            continue
        record = _parse_row(row, line_no)
        if mode == "validated":
            _validate_record(record, line_no)
        if record.key in duplicates:
            raise DuplicateRecordError(
                f"line {line_no}: duplicate of line {duplicates[record.key]} "
                f"(sf={record.sf}, bw_khz={hz_to_khz_str(record.bw_hz)}, cr={record.cr})"
            )
        duplicates[record.key] = line_no
        records.append(record)
    if not header_seen:
        raise MeasurementParseError(1, "no header row found")
    return MeasurementTable(records)


def save_measurements(table: MeasurementTable, stream: IO[str]) -> None:
    """Write a table back out in the canonical CSV form."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for record in table:
        cells = [
            str(record.sf),
            hz_to_khz_str(record.bw_hz),
            "" if record.cr is None else str(record.cr.num),
            "" if record.cr is None else str(record.cr.den),
            "" if record.rssi_dbm is None else format_decimal(record.rssi_dbm),
            format_decimal(record.snr_db),
            "" if record.loss_pct is None else format_decimal(record.loss_pct),
        ]
        stream.write(",".join(cells) + "\n")


def bundled_measurements_text() -> str:
    return resources.files(__package__).joinpath("data", _MEASUREMENTS_RESOURCE).read_text("utf-8")


def load_bundled_measurements() -> MeasurementTable:
    """The packaged field-measurement fixture (36 grid rows + 4 CR-sweep rows)."""
    return load_measurements(io.StringIO(bundled_measurements_text()))


def bundled_expected_grid_text() -> str:
    return resources.files(__package__).joinpath("data", _EXPECTED_GRID_RESOURCE).read_text("utf-8")


def load_expected_grid(source=None) -> list[list[float]]:
    """Load an excess-loss grid CSV (rows BW ascending, columns SF 7..12).

    source=None loads the grid published with the bundled measurements.
    """
    if source is None:
        lines: Iterable[str] = io.StringIO(bundled_expected_grid_text())
    else:
        lines = _iter_source_lines(source)
    expected_header = ("bw_khz",) + tuple(f"sf{sf}" for sf in SF_VALUES)
    rows: dict[float, list[float]] = {}
    header_seen = False
    for line_no, line in enumerate(lines, start=1):
        text = line.rstrip("\r\n")
        if not text.strip() or text.lstrip().startswith("#"):
            continue
        row = next(csv.reader([text]))
        if not header_seen:
            if tuple(cell.strip() for cell in row) != expected_header:
                raise MeasurementParseError(
                    line_no, f"expected header {','.join(expected_header)!r}, got {text!r}"
                )
            header_seen = True
            continue
        if len(row) != 7:
            raise MeasurementParseError(line_no, f"expected 7 columns, got {len(row)}")
        try:
            bw_hz = khz_str_to_hz(row[0].strip())
            values = [float(cell) for cell in row[1:]]
        except (ValueError, InvalidOperation) as exc:
            raise MeasurementParseError(line_no, f"malformed grid row: {text!r}") from exc
        rows[bw_hz] = values
    missing = [bw for bw in BW_HZ_VALUES if bw not in rows]
    if missing:
        raise MissingCellError(
            f"expected grid missing bandwidth row(s): "
            f"{', '.join(hz_to_khz_str(b) for b in missing)}"
        )
    return [rows[bw] for bw in BW_HZ_VALUES]


def reconstruct_excess_loss(
    table: MeasurementTable,
    params: LinkParams,
    tx_power_dbm: float,
    freq_hz: float = CAMPAIGN_FREQ_HZ,
) -> list[list[float]]:
    """Apply the budget chain to every (SF, BW) cell of the table.

    Returns the excess-loss grid as rows of ascending bandwidth by columns
    of ascending SF, the layout of the published table.
    """
    grid: list[list[float]] = []
    for bw_hz in BW_HZ_VALUES:
        row: list[float] = []
        for sf in SF_VALUES:
            try:
                record = lookup(table, sf, bw_hz)
            except RecordNotFoundError as exc:
                raise MissingCellError(
                    f"table lacks cell sf={sf}, bw_khz={hz_to_khz_str(bw_hz)}"
                ) from exc
            if record.rssi_dbm is None:
                raise MissingCellError(
                    f"cell sf={sf}, bw_khz={hz_to_khz_str(bw_hz)} has no rssi_dbm"
                )
            config = RadioConfig(
                sf=sf,
                bw_hz=bw_hz,
                cr=record.effective_cr,
                tx_power_dbm=tx_power_dbm,
                freq_hz=freq_hz,
            )
            sample = SignalSample(record.rssi_dbm, record.snr_db)
            row.append(loss_breakdown(params, config, sample).excess_db)
        grid.append(row)
    return grid
