import csv
import io
import json
import logging
import math
import os
from typing import Any, Dict, List, Sequence

from .errors import UsageError

logger = logging.getLogger(__name__)


# -----------------------------
# JSON documents
# -----------------------------
class JsonStorage:
    """One JSON document on disk, replaced atomically on every save."""

    def __init__(self, path: str):
        self.path = path

    def load(self) -> Any:
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            raise UsageError(f"File not found: {self.path}")
        except json.JSONDecodeError as e:
            raise UsageError(f"Invalid JSON in {self.path}: {e}")
        except UnicodeDecodeError as e:
            raise UsageError(f"{self.path} is not UTF-8 text: {e}")
        except OSError as e:
            raise UsageError(f"Cannot read {self.path}: {e}")

    def save(self, doc: Any):
        directory = os.path.dirname(self.path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        tmp_path = self.path + ".tmp"
        with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps(doc))
        os.replace(tmp_path, self.path)
        logger.info(f"✅ Wrote {self.path}")


def _plain(value: Any) -> Any:
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dumps(doc: Any) -> str:
    """Sorted-key, 2-space JSON with a trailing newline; same input, same bytes."""
    return json.dumps(_plain(doc), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


# -----------------------------
# CSV tables
# -----------------------------
def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp_path = path + ".tmp"
    with open(tmp_path, "w", encoding="utf-8", newline="") as f:
        f.write(render_csv(header, rows))
    os.replace(tmp_path, path)
    logger.info(f"✅ Wrote {path} ({len(rows)} rows)")


def read_csv(path: str) -> List[Dict[str, str]]:
    """Rows as dicts of raw strings; values keep the exact text that was written."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def reemit_csv(path: str) -> str:
    """Parse a written CSV and render it again (round-trip check)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()
