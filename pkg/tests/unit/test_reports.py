"""Unit tests for table rendering and console output."""

import csv
import io
import json
import pytest

import mpmath as mp

from hankel_ladder.models import REPORT_COLUMNS, IdentityId, OutputFormat, ResidualReport
from hankel_ladder.reports import (
    COEFF_COLUMNS,
    SWEEP_COLUMNS,
    coefficient_rows,
    print_summary,
    render,
    report_rows,
    status,
    write_table,
)


@pytest.fixture
def reports():
    with mp.workprec(64):
        return [
            ResidualReport.judge(IdentityId.STRING_R_SUM, 1, 0, mp.mpf(1e-30), mp.mpf(1e-20)),
            ResidualReport.judge(IdentityId.STRING_R_SUM, 2, 0, mp.mpf(1e-10), mp.mpf(1e-20), notes="a, b"),
            ResidualReport.skip(IdentityId.RICCATI_R_SMALL, 1, 0, "R_n vanishes"),
        ]


@pytest.mark.unit
class TestRender:
    def test_csv_header_and_quoting(self, reports):
        text = render(report_rows(reports, 64), REPORT_COLUMNS, OutputFormat.CSV)
        rows = list(csv.DictReader(io.StringIO(text)))
        assert text.splitlines()[0] == ",".join(REPORT_COLUMNS)
        assert [row["pass"] for row in rows] == ["true", "false", "true"]
        assert rows[1]["notes"] == "a, b"

    def test_json_has_same_fields(self, reports):
        data = json.loads(render(report_rows(reports, 64), REPORT_COLUMNS, OutputFormat.JSON))
        assert len(data) == 3
        assert list(data[0]) == REPORT_COLUMNS
        assert data[2]["notes"].startswith("skipped:")

    def test_missing_columns_are_blank(self):
        text = render([{"n": "1"}], ["n", "R_n"], OutputFormat.CSV)
        assert text == "n,R_n\n1,\n"


@pytest.mark.unit
class TestCoefficientRows:
    def test_rows_per_degree(self, hermite_pipeline):
        snap = hermite_pipeline.snapshot()
        rows = coefficient_rows(snap.rec, snap.aux)
        assert len(rows) == snap.rec.n_max + 1
        assert list(rows[0]) == COEFF_COLUMNS
        assert float(rows[2]["beta_n"]) == pytest.approx(1.0)

    def test_sweep_rows_lead_with_t(self, hermite_pipeline):
        snap = hermite_pipeline.snapshot()
        rows = coefficient_rows(snap.rec, snap.aux, with_t=True)
        assert list(rows[0]) == SWEEP_COLUMNS
        assert rows[0]["t"] == "0.7"


@pytest.mark.unit
class TestWriteTable:
    def test_stdout(self, capsys):
        write_table([{"k": "0", "mu_k": "1.0"}], ["k", "mu_k"], OutputFormat.CSV)
        captured = capsys.readouterr()
        assert captured.out == "k,mu_k\n0,1.0\n"
        assert captured.err == ""

    def test_file_with_status(self, tmp_path, capsys):
        path = tmp_path / "nested" / "table.json"
        write_table([{"k": "0"}], ["k"], OutputFormat.JSON, path)
        assert json.loads(path.read_text()) == [{"k": "0"}]
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "📄 1 rows saved to:" in captured.err

    def test_quiet_file(self, tmp_path, capsys):
        write_table([], ["k"], OutputFormat.CSV, tmp_path / "t.csv", quiet=True)
        assert capsys.readouterr().err == ""


@pytest.mark.unit
class TestConsole:
    def test_status_goes_to_stderr(self, capsys):
        status("🔍 working")
        status("hidden", quiet=True)
        captured = capsys.readouterr()
        assert captured.err == "🔍 working\n"
        assert captured.out == ""

    def test_summary_counts(self, reports, capsys):
        print_summary(reports)
        err = capsys.readouterr().err
        assert "📊 VERIFICATION RESULTS" in err
        assert "❌ string_r_sum: 1 passed, 1 failed" in err
        assert "✅ riccati_r: 0 passed, 1 skipped" in err
        assert "1 failed checks" in err
