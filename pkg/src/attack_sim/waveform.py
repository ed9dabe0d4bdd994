"""Baseband constellations, random symbol frames and the IQF1 file format."""

from __future__ import annotations

import functools
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .mcs import Modulation

IQF_MAGIC = b"IQF1"
_HEADER = struct.Struct("<4sIIf")
_UNKNOWN_MOD = 0xFFFFFFFF


def _gray_decode(g: np.ndarray) -> np.ndarray:
    b = g.copy()
    shift = g >> 1
    while np.any(shift):
        b ^= shift
        shift >>= 1
    return b


@functools.lru_cache(maxsize=None)
def _points(m: Modulation) -> np.ndarray:
    if m is Modulation.BPSK:
        pts = np.array([-1.0, 1.0], dtype=complex)
    else:
        # square QAM, Gray code per axis; high bits drive I, low bits drive Q
        half = m.order // 2
        side = 1 << half
        labels = np.arange(1 << m.order)
        i_idx = _gray_decode(labels >> half)
        q_idx = _gray_decode(labels & (side - 1))
        pts = (2 * i_idx - (side - 1)) + 1j * (2 * q_idx - (side - 1))
    pts = pts / math.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class Constellation:
    modulation: Modulation

    @property
    def points(self) -> np.ndarray:
        """Unit-average-power points indexed by their Gray label."""
        return _points(self.modulation)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class IqFrame:
    samples: np.ndarray
    nominal_snr: float | None = None
    modulation: Modulation | None = None

    def __len__(self):
        return len(self.samples)

    @property
    def length(self) -> int:
        return len(self.samples)


def modulate(m: Modulation, n: int, rng: np.random.Generator) -> IqFrame:
    """``n`` i.i.d. uniformly drawn symbols of ``m``, one sample per symbol."""
    if n < 1:
        raise DomainError("frame length must be at least 1")
    pts = _points(m)
    symbols = pts[rng.integers(0, len(pts), n)]
    return IqFrame(symbols, nominal_snr=math.inf, modulation=m)


def theoretical_c42(m: Modulation) -> float:
    """C42 = E|s|^4 - |E s^2|^2 - 2 (E|s|^2)^2 over the unit-power constellation."""
    s = _points(m)
    p2 = np.mean(np.abs(s) ** 2)
    return float(np.mean(np.abs(s) ** 4) - abs(np.mean(s * s)) ** 2 - 2 * p2 ** 2)


def write_iqf(path, frame: IqFrame) -> None:
    mod = _UNKNOWN_MOD if frame.modulation is None else int(frame.modulation)
    snr = math.nan if frame.nominal_snr is None else frame.nominal_snr
    body = np.empty(2 * len(frame), dtype="<f4")
    body[0::2] = frame.samples.real
    body[1::2] = frame.samples.imag
    Path(path).write_bytes(_HEADER.pack(IQF_MAGIC, len(frame), mod, snr) + body.tobytes())


def read_iqf(path) -> IqFrame:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise DomainError(f"{path}: truncated IQF1 header")
    magic, count, mod, snr = _HEADER.unpack_from(raw)
    if magic != IQF_MAGIC:
        raise DomainError(f"{path}: bad magic {magic!r}")
    body = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    if body.size != 2 * count:
        raise DomainError(f"{path}: header says {count} samples, file holds {body.size // 2}")
    samples = body[0::2].astype(float) + 1j * body[1::2].astype(float)
    return IqFrame(
        samples,
        nominal_snr=None if math.isnan(snr) else float(snr),
        modulation=None if mod == _UNKNOWN_MOD else Modulation(mod),
    )
