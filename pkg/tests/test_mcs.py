import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from attack_sim.errors import ConfigError, DomainError, OutOfCoverage
from attack_sim.mcs import (DEFAULT_TABLE, McsEntry, McsTable, Modulation, parse_mcs_csv, select_mcs,
                            snr_interval_for_modulation)

# 802.11ac, 20 MHz, one spatial stream
REFERENCE_ROWS = [
    (0, Modulation.BPSK, "1/2", 6.5, 7.2, 2),
    (1, Modulation.QPSK, "1/2", 13.0, 14.4, 5),
    (2, Modulation.QPSK, "3/4", 19.5, 21.7, 9),
    (3, Modulation.QAM16, "1/2", 26.0, 28.9, 11),
    (4, Modulation.QAM16, "3/4", 39.0, 43.3, 15),
    (5, Modulation.QAM64, "2/3", 52.0, 57.8, 18),
    (6, Modulation.QAM64, "3/4", 58.5, 65.0, 20),
    (7, Modulation.QAM64, "5/6", 65.0, 72.2, 25),
]


@pytest.mark.parametrize("row", REFERENCE_ROWS, ids=lambda r: f"mcs{r[0]}")
def test_default_table_rows(row):
    idx, mod, rate, r800, r400, snr = row
    e = DEFAULT_TABLE[idx]
    assert (e.index, e.modulation, e.code_rate, e.min_snr) == (idx, mod, Fraction(rate), snr)
    assert e.data_rate_800ns == pytest.approx(r800) and e.data_rate_400ns == pytest.approx(r400)


@pytest.mark.parametrize("snr, idx", [(2.0, 0), (4.999, 0), (5.0, 1), (10.0, 2), (12.0, 3), (17.9, 4), (24.0, 6), (40.0, 7)])
def test_select_mcs_examples(snr, idx):
    assert select_mcs(snr).index == idx


def test_select_mcs_below_floor():
    with pytest.raises(OutOfCoverage):
        select_mcs(1.99)
    with pytest.raises(DomainError):
        select_mcs(math.nan)


def test_modulation_intervals():
    assert snr_interval_for_modulation(Modulation.BPSK) == (2, 5)
    assert snr_interval_for_modulation(Modulation.QPSK) == (5, 11)
    assert snr_interval_for_modulation(Modulation.QAM16) == (11, 18)
    assert snr_interval_for_modulation(Modulation.QAM64) == (18, math.inf)


@given(st.floats(2.0, 80.0))
def test_intervals_partition_coverage(snr):
    hits = [m for m in Modulation
            if snr_interval_for_modulation(m)[0] <= snr < snr_interval_for_modulation(m)[1]]
    assert hits == [select_mcs(snr).modulation]


@given(st.floats(2.0, 60.0), st.floats(0.0, 20.0))
def test_select_mcs_monotone(snr, gap):
    assert select_mcs(snr + gap).index >= select_mcs(snr).index


def test_csv_round_trip():
    again = parse_mcs_csv(DEFAULT_TABLE.to_csv())
    assert again.entries == DEFAULT_TABLE.entries


def test_table_validation():
    e = DEFAULT_TABLE.entries
    with pytest.raises(ConfigError):
        McsTable([e[1], e[0]])
    with pytest.raises(ConfigError):
        McsTable([e[0], McsEntry(1, Modulation.QPSK, Fraction(1, 2), 13, 14.4, 2.0)])
    with pytest.raises(ConfigError):
        McsTable([e[3], McsEntry(1, Modulation.BPSK, Fraction(1, 2), 6.5, 7.2, 20.0)])
    with pytest.raises(ConfigError):
        parse_mcs_csv("index,modulation\n0,BPSK\n")


def test_modulation_parse_and_labels():
    for text in ("bpsk", "QPSK", "qam16", "16-QAM", "qam64"):
        assert Modulation.parse(text).label in ("BPSK", "QPSK", "16-QAM", "64-QAM")
    assert [m.order for m in Modulation] == [1, 2, 4, 6]
    with pytest.raises(DomainError):
        Modulation.parse("8psk")


def test_twelve_db_picks_rate_half_16qam():
    e = select_mcs(12.0)
    assert (e.modulation, e.code_rate) == (Modulation.QAM16, Fraction(1, 2))
