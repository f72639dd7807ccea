"""
Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Lists (``values``,
``w_schedule``) are comma separated. ``rho_db = -inf`` isolates the cells.
"""

from pathlib import Path

from .errors import ValidationError

INT_KEYS = {"L_d", "L_u", "K", "N_b", "N_m", "s", "max_iters", "trials",
            "seed", "threads"}
FLOAT_KEYS = {"P", "snr_db", "rho_db", "w", "tol"}
LIST_KEYS = {"values", "w_schedule"}
STR_KEYS = {"name", "mode", "precoder", "axis"}
KNOWN_KEYS = INT_KEYS | FLOAT_KEYS | LIST_KEYS | STR_KEYS


def _convert(key, raw, where):
    try:
        if key in INT_KEYS:
            return int(raw)
        if key in FLOAT_KEYS:
            return float(raw)
        if key in LIST_KEYS:
            return [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{where}: bad value {raw!r} for {key}") from None
    return raw


def parse_config(text, source="<config>"):
    """Parse config text into a dict of typed values."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if "=" not in line:
            raise ValidationError(f"{where}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ValidationError(f"{where}: unknown key {key!r}")
        out[key] = _convert(key, raw, where)
    return out


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
