import math

import pytest

from tiltphase.controller import ActivationSet
from tiltphase.trace import (
    FIELDS,
    format_record,
    read_trace,
    record_values,
    write_trace,
)


def sample_records(n=5):
    records = []
    for k in range(n):
        act = ActivationSet(
            arm_tilt=(0.1 * k, -0.05 * k),
            gait_frequency=2.0 * math.pi + 0.001 * k,
            mu=0.1 * k,
            deviation=(1e-17 * k, -0.3),
            flags=("deviation_degenerate",) if k == 3 else (),
        )
        records.append(record_values(0.01 * (k + 1), act))
    return records


class TestRecordValues:
    def test_field_count_matches_schema(self):
        assert len(record_values(0.0, ActivationSet())) == len(FIELDS)

    def test_format_uses_repr_for_floats(self):
        rec = record_values(0.01, ActivationSet(deviation=(0.1 + 0.2, 0.0)))
        line = format_record(rec)
        assert "0.30000000000000004" in line


class TestRoundTrip:
    def test_write_read_round_trip(self, tmp_path):
        path = tmp_path / "run.trace"
        records = sample_records()
        write_trace(path, records)
        back = read_trace(path)
        assert len(back) == len(records)
        for rec, row in zip(records, back):
            for name, value in zip(FIELDS, rec):
                if name == "flags":
                    assert row[name] == value
                else:
                    assert row[name] == value  # repr round trips floats exactly

    def test_csv_header_mode(self, tmp_path):
        path = tmp_path / "run.csv"
        write_trace(path, sample_records(), csv=True)
        text = path.read_text()
        assert text.splitlines()[0] == ",".join(FIELDS)
        assert read_trace(path)  # header line is skipped on read

    def test_write_is_byte_deterministic(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        records = sample_records()
        write_trace(a, records)
        write_trace(b, records)
        assert a.read_bytes() == b.read_bytes()

    def test_malformed_record_rejected(self, tmp_path):
        path = tmp_path / "bad.trace"
        path.write_text("# tiltphase-trace v1\n1.0,2.0,3.0\n")
        with pytest.raises(ValueError, match="malformed"):
            read_trace(path)
