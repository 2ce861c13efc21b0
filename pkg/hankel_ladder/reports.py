"""Table writers and console status lines.

Standard output carries only the machine-readable table; every status line
goes to standard error so that `hankel-ladder ... > table.csv` stays clean.
"""

import csv
import io
import json
import sys
from collections import Counter
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from .models import (
    REPORT_COLUMNS,
    AuxQuantities,
    MomentTable,
    OutputFormat,
    RecurrenceData,
    ResidualReport,
    decimal_string,
    short_decimal,
)

MOMENT_COLUMNS = ["k", "mu_k"]
COEFF_COLUMNS = ["n", "h_n", "alpha_n", "beta_n", "p_n", "D_n", "R_n", "r_n", "sigma_n"]
SWEEP_COLUMNS = ["t"] + COEFF_COLUMNS
ASYMPTOTIC_COLUMNS = ["n", "R_n", "expansion", "abs_err", "ratio", "branch_fraction"]

Row = Dict[str, str]


def status(message: str, quiet: bool = False) -> None:
    """Print a human-oriented progress line to stderr."""
    if not quiet:
        print(message, file=sys.stderr, flush=True)


def moment_rows(table: MomentTable) -> List[Row]:
    bits = table.policy.precision_bits
    return [
        {"k": str(k), "mu_k": decimal_string(mu, bits)}
        for k, mu in enumerate(table.moments)
    ]


def coefficient_rows(rec: RecurrenceData, aux: AuxQuantities, with_t: bool = False) -> List[Row]:
    """One row per n = 0..n_max; sweep tables prepend the t column."""
    bits = rec.precision_bits
    rows = []
    for n in range(rec.n_max + 1):
        row = {}
        if with_t:
            row["t"] = short_decimal(aux.t)
        row.update(
            n=str(n),
            h_n=decimal_string(rec.h[n], bits),
            alpha_n=decimal_string(rec.alpha[n], bits),
            beta_n=decimal_string(rec.beta[n], bits),
            p_n=decimal_string(rec.p[n], bits),
            D_n=decimal_string(rec.D[n], bits),
            R_n=decimal_string(aux.R[n], bits),
            r_n=decimal_string(aux.r[n], bits),
            sigma_n=decimal_string(aux.sigma[n], bits),
        )
        rows.append(row)
    return rows


def report_rows(reports: Iterable[ResidualReport], precision_bits: int) -> List[Row]:
    return [report.to_row(precision_bits) for report in reports]


def render(rows: Sequence[Row], columns: Sequence[str], fmt: OutputFormat) -> str:
    """Serialize rows to CSV or to a JSON array with the same field names."""
    if fmt is OutputFormat.JSON:
        data = [{c: row.get(c, "") for c in columns} for row in rows]
        return json.dumps(data, indent=2) + "\n"

    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buffer.getvalue()


def write_table(
    rows: Sequence[Row],
    columns: Sequence[str],
    fmt: OutputFormat,
    out_path: Optional[Path] = None,
    quiet: bool = False,
) -> None:
    text = render(rows, columns, fmt)
    if out_path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(text)
    status(f"📄 {len(rows)} rows saved to: {out_path}", quiet)


def print_summary(reports: Sequence[ResidualReport], quiet: bool = False) -> None:
    """Per-identity pass/fail/skip counts, failures listed individually."""
    if quiet:
        return
    counts = Counter()
    for report in reports:
        key = "skipped" if report.skipped else ("passed" if report.passed else "failed")
        counts[(report.identity_id.value, key)] += 1

    status("\n📊 VERIFICATION RESULTS")
    status("=" * 40)
    names = sorted({identity for identity, _ in counts})
    for name in names:
        passed = counts[(name, "passed")]
        failed = counts[(name, "failed")]
        skipped = counts[(name, "skipped")]
        mark = "❌" if failed else "✅"
        line = f"{mark} {name}: {passed} passed"
        if failed:
            line += f", {failed} failed"
        if skipped:
            line += f", {skipped} skipped"
        status(line)

    failures = [r for r in reports if not r.passed]
    if failures:
        status(f"\n⚠️  {len(failures)} failed checks:")
        for report in failures:
            status(f"   {report}")
