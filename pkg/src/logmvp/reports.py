"""JSON / CSV serialisation of verification reports and generic result rows.

Floats are written with ``repr`` (shortest string that round-trips), so files
re-read by :func:`read_reports` reproduce the reports exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, List, Sequence

from .mvp import VerificationReport

REPORT_COLUMNS = (
    "check_id", "label", "d", "mu", "x", "r", "observed", "expected",
    "residual", "tolerance", "verdict", "expected_provenance",
)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return " ".join(fmt(float(v)) for v in value)
    return str(value)


def reports_to_json(reports: Iterable[VerificationReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=1) + "\n"


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        row = r.to_dict()
        w.writerow([fmt(row[c]) for c in REPORT_COLUMNS])
    return buf.getvalue()


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(list(rows), indent=1) + "\n"


def _opt_float(s: str):
    return None if s == "" else float(s)


def _parse_csv_reports(text: str) -> List[VerificationReport]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(VerificationReport(
            check_id=row["check_id"],
            label=row["label"],
            x=tuple(float(v) for v in row["x"].split()),
            r=_opt_float(row["r"]),
            d=None if row["d"] == "" else int(row["d"]),
            mu=_opt_float(row["mu"]),
            observed=float(row["observed"]),
            expected=float(row["expected"]),
            residual=float(row["residual"]),
            tolerance=float(row["tolerance"]),
            verdict=row["verdict"],
            expected_provenance=row["expected_provenance"],
        ))
    return out


def parse_reports(text: str) -> List[VerificationReport]:
    """Parse either serialisation, detected from the first character."""
    if text.lstrip().startswith("["):
        return [VerificationReport.from_dict(d) for d in json.loads(text)]
    return _parse_csv_reports(text)


def read_reports(path) -> List[VerificationReport]:
    return parse_reports(Path(path).read_text())


def read_rows(path) -> List[dict]:
    """Generic reader for sweep / solve / bessel outputs (CSV or JSON)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("["):
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))
