"""Sweep configuration files (INI-style ``key = value`` sections).

Example::

    [link]
    modulation = qam16
    mimo = 2x2            ; Nt x Nr
    channel = identity    ; identity | rayleigh
    target = pmin-factor:2.0
    branch = lower
    snr_ref = dmin        ; dmin | es
    beta_model = siso     ; siso | union

    [sweep]
    snr_db_range = 0:14:2 ; or: snr_db = 0, 3, 6
    trials = 100000
    seed = 1

    [output]
    out = complexity.csv
    plot = complexity.svg
"""
from __future__ import annotations

import configparser
import re
from typing import Dict, Tuple

import numpy as np

from .errors import ConfigError

__all__ = ["KNOWN_KEYS", "parse_snr_range", "parse_mimo", "load_config", "read_config_text"]

KNOWN_KEYS = {
    "link": ("modulation", "mimo", "channel", "target", "branch", "snr_ref", "beta_model"),
    "sweep": ("snr_db_range", "snr_db", "trials", "seed"),
    "output": ("out", "plot"),
}


def parse_snr_range(text: str) -> Tuple[float, ...]:
    """``a:b:step`` inclusive of ``b`` (within rounding)."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"SNR range '{text}' must be start:stop:step")
    a, b, step = (float(p) for p in parts)
    if step <= 0 or b < a:
        raise ValueError(f"SNR range '{text}' needs step > 0 and stop >= start")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return tuple(round(a + i * step, 10) for i in range(n))


def parse_mimo(text: str) -> Tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise ValueError(f"MIMO size '{text}' must look like 2x2")
    nt, nr = int(m.group(1)), int(m.group(2))
    if nt < 1 or nr < 1:
        raise ValueError("antenna counts must be >= 1")
    return nt, nr


def _line_of(lines, section, key):
    cur = None
    for no, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip().lower()
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.I):
            return no
    return None


def read_config_text(text: str) -> Dict[str, str]:
    """Parse config text into a flat ``{key: raw value}`` mapping.

    Raises
    ------
    ConfigError
        On syntax errors, unknown sections/keys, or duplicate SNR settings;
        the message carries the offending line and field.
    """
    lines = text.splitlines()
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"),
                                   interpolation=None)
    try:
        cp.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside any [section]", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", line=exc.lineno, field=exc.option) from None
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("unparseable line", line=line) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    out: Dict[str, str] = {}
    lines_of: Dict[str, int] = {}
    for section in cp.sections():
        sec = section.lower()
        if sec not in KNOWN_KEYS:
            line = next((i for i, l in enumerate(lines, 1)
                         if l.strip().lower() == f"[{sec}]"), None)
            raise ConfigError(f"unknown section [{section}]", line=line)
        for key, val in cp.items(section):
            if key not in KNOWN_KEYS[sec]:
                raise ConfigError("unknown key", line=_line_of(lines, sec, key),
                                  field=f"{sec}.{key}")
            out[key] = val.strip()
            lines_of[key] = _line_of(lines, sec, key)
    if "snr_db_range" in out and "snr_db" in out:
        raise ConfigError("give either snr_db_range or snr_db, not both",
                          line=lines_of.get("snr_db"), field="sweep.snr_db")
    out["__lines__"] = lines_of  # type: ignore[assignment]
    return out


def load_config(path: str) -> Dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    return read_config_text(text)
