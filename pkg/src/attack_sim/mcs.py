"""IEEE 802.11ac (20 MHz, single stream) MCS table and AMC logic.

The table is public; the attack rests on reading it backwards, from a
detected modulation to the SNR band Alice must have measured.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, DomainError, OutOfCoverage


class Modulation(enum.IntEnum):
    """Modulations ordered by spectral efficiency; the value is a wire code."""

    BPSK = 0
    QPSK = 1
    QAM16 = 2
    QAM64 = 3

    @property
    def order(self) -> int:
        """Bits per symbol."""
        return (1, 2, 4, 6)[self.value]

    @property
    def label(self) -> str:
        return ("BPSK", "QPSK", "16-QAM", "64-QAM")[self.value]

    @classmethod
    def parse(cls, text: str) -> Modulation:
        key = text.strip().upper().replace("-", "").replace("_", "")
        aliases = {"BPSK": cls.BPSK, "QPSK": cls.QPSK,
                   "16QAM": cls.QAM16, "QAM16": cls.QAM16,
                   "64QAM": cls.QAM64, "QAM64": cls.QAM64}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown modulation {text!r}") from None


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation: Modulation
    code_rate: Fraction
    data_rate_800ns: float  # Mbit/s
    data_rate_400ns: float  # Mbit/s
    min_snr: float  # dB


class McsTable:
    """An ordered, validated sequence of MCS entries."""

    def __init__(self, entries):
        self.entries = tuple(entries)
        if not self.entries:
            raise ConfigError("MCS table is empty")
        for pos, entry in enumerate(self.entries):
            if entry.index != pos:
                raise ConfigError(f"MCS indices must be contiguous from 0, got {entry.index} at {pos}")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if not cur.min_snr > prev.min_snr:
                raise ConfigError("min_snr must be strictly increasing with index")
            if cur.modulation < prev.modulation:
                raise ConfigError("modulation must be non-decreasing with index")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, index) -> McsEntry:
        return self.entries[index]

    @property
    def floor(self) -> float:
        """Lowest serviceable SNR in dB."""
        return self.entries[0].min_snr

    @property
    def modulations(self) -> tuple[Modulation, ...]:
        return tuple(sorted({e.modulation for e in self.entries}))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for e in self.entries:
            writer.writerow([e.index, e.modulation.label, str(e.code_rate),
                             _num(e.data_rate_800ns), _num(e.data_rate_400ns), _num(e.min_snr)])
        return buf.getvalue()


CSV_COLUMNS = ("index", "modulation", "code_rate", "rate_800ns_mbps", "rate_400ns_mbps", "min_snr_db")


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(x)


def parse_mcs_csv(text: str) -> McsTable:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != CSV_COLUMNS:
        raise ConfigError(f"MCS CSV header must be {','.join(CSV_COLUMNS)}")
    entries = []
    for row in reader:
        row = {k.strip(): v.strip() for k, v in row.items()}
        try:
            entries.append(McsEntry(
                index=int(row["index"]),
                modulation=Modulation.parse(row["modulation"]),
                code_rate=Fraction(row["code_rate"]),
                data_rate_800ns=float(row["rate_800ns_mbps"]),
                data_rate_400ns=float(row["rate_400ns_mbps"]),
                min_snr=float(row["min_snr_db"]),
            ))
        except (ValueError, ZeroDivisionError, DomainError) as exc:
            raise ConfigError(f"bad MCS row {row}: {exc}") from None
    return McsTable(entries)


def load_mcs_csv(path) -> McsTable:
    return parse_mcs_csv(Path(path).read_text())


DEFAULT_TABLE_CSV = """\
index,modulation,code_rate,rate_800ns_mbps,rate_400ns_mbps,min_snr_db
0,BPSK,1/2,6.5,7.2,2
1,QPSK,1/2,13,14.4,5
2,QPSK,3/4,19.5,21.7,9
3,16-QAM,1/2,26,28.9,11
4,16-QAM,3/4,39,43.3,15
5,64-QAM,2/3,52,57.8,18
6,64-QAM,3/4,58.5,65,20
7,64-QAM,5/6,65,72.2,25
"""

DEFAULT_TABLE = parse_mcs_csv(DEFAULT_TABLE_CSV)


def select_mcs(snr: float, table: McsTable = DEFAULT_TABLE) -> McsEntry:
    """Alice's AMC choice: the entry with the largest ``min_snr <= snr``."""
    if math.isnan(snr):
        raise DomainError("snr is NaN")
    chosen = None
    for entry in table:
        if entry.min_snr <= snr:
            chosen = entry
        else:
            break
    if chosen is None:
        raise OutOfCoverage(f"SNR {snr:.2f} dB is below the table floor {table.floor} dB")
    return chosen


def snr_interval_for_modulation(m: Modulation, table: McsTable = DEFAULT_TABLE) -> tuple[float, float]:
    """Half-open SNR band ``[lo, hi)`` in dB over which Alice picks ``m``.

    ``hi`` is ``math.inf`` for the highest modulation in the table.
    """
    lows = [e.min_snr for e in table if e.modulation == m]
    if not lows:
        raise DomainError(f"{m.label} does not appear in the MCS table")
    higher = [e.min_snr for e in table if e.modulation > m]
    return min(lows), (min(higher) if higher else math.inf)
