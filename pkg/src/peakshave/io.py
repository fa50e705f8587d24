"""Profile CSV reading and writing, plus curve and report emission helpers."""

from __future__ import annotations

import csv
import io
import math
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .errors import ProfileError
from .params import HOURS_PER_DAY, DayProfile

PROFILE_HEADER = ("hour", "load_mw", "pv_mw")
BUNDLED_PROFILE = "jiangsu_typical.csv"


def bundled_profile_path() -> Path:
    return Path(str(resources.files("peakshave") / "data" / BUNDLED_PROFILE))


def _cell(row: list[str], col: int, lineno: int, name: str) -> float:
    try:
        value = float(row[col])
    except (IndexError, ValueError):
        raise ProfileError(f"row {lineno}, column {name!r}: not a number: "
                           f"{row[col] if col < len(row) else ''!r}") from None
    if not math.isfinite(value):
        raise ProfileError(f"row {lineno}, column {name!r}: not finite")
    return value


def parse_profile(text: str, dt: float = 1.0) -> DayProfile:
    """Parse profile CSV text. Lines starting with ``#`` are comments."""
    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise ProfileError("profile is empty")
    header_no, header_line = lines[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    missing = [h for h in PROFILE_HEADER if h not in header]
    if missing:
        raise ProfileError(f"row {header_no}: missing columns {missing}")
    cols = {name: header.index(name) for name in PROFILE_HEADER}
    expected = round(HOURS_PER_DAY / dt)
    body = lines[1:]
    if len(body) != expected:
        raise ProfileError(f"expected {expected} rows, got {len(body)}")
    load, pv = [], []
    for k, (lineno, line) in enumerate(body):
        row = [c.strip() for c in next(csv.reader([line]))]
        hour = _cell(row, cols["hour"], lineno, "hour")
        if abs(hour - k * dt) > 1e-9:
            raise ProfileError(f"row {lineno}, column 'hour': expected {k * dt:g}, got {hour:g}")
        load.append(_cell(row, cols["load_mw"], lineno, "load_mw"))
        pv.append(_cell(row, cols["pv_mw"], lineno, "pv_mw"))
    try:
        return DayProfile(load, pv, dt)
    except ProfileError:
        raise
    except ValueError as exc:
        raise ProfileError(str(exc)) from None


def load_profile(path: str | Path | None = None, dt: float = 1.0) -> DayProfile:
    """Read a profile file; ``None`` loads the bundled typical day."""
    path = bundled_profile_path() if path is None else Path(path)
    if not path.is_file():
        # fall back to the bundled data directory for bare file names
        candidate = bundled_profile_path().parent / path.name
        if path.parent == Path(".") and candidate.is_file():
            path = candidate
        else:
            raise ProfileError(f"profile file not found: {path}")
    return parse_profile(path.read_text(), dt)


def write_profile(profile: DayProfile, out: TextIO, comment: str | None = None) -> None:
    if comment:
        for line in comment.splitlines():
            out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(PROFILE_HEADER)
    for h, load, pv in zip(profile.hours(), profile.load, profile.pv):
        writer.writerow([f"{h:g}", repr(load), repr(pv)])


def profile_to_csv(profile: DayProfile) -> str:
    buf = io.StringIO()
    write_profile(profile, buf)
    return buf.getvalue()


def format_number(value: float | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def write_table(header: Sequence[str], rows: Iterable[Sequence], out: TextIO) -> None:
    """Plain CSV with a one-line header; floats at full precision."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (int, float)) and not isinstance(v, bool)
                         else ("" if v is None else v) for v in row])
