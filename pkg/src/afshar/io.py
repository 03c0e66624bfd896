"""Config files and result artifacts.

Config format: one ``key = value`` per line, SI units, ``#`` starts a
comment.  Keys are the ``AfsharConfig`` field names; ``detector_plane`` is
derived and accepted only if it matches the lens equation.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import fields
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .apparatus import CONFIG_KEYS, AfsharConfig, ScenarioResult
from .errors import InvalidConfigError
from .wavefield import IntensityProfile

SCHEMA = 1
_INT_KEYS = {f.name for f in fields(AfsharConfig) if f.type in ("int", int)}


def _coerce(key: str, raw: str, line: Optional[int]):
    raw = raw.strip()
    try:
        if key in _INT_KEYS:
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        return float(raw)
    except ValueError:
        raise InvalidConfigError(f"{key}: cannot parse {raw!r} as a number", line=line) from None


def parse_config_pairs(pairs: Iterable[tuple[str, str, Optional[int]]], base: Optional[AfsharConfig] = None) -> AfsharConfig:
    values = {} if base is None else {k: getattr(base, k) for k in CONFIG_KEYS}
    plane = None
    for key, raw, line in pairs:
        key = key.strip()
        if key == "detector_plane":
            plane = (_coerce(key, raw, line), line)
            continue
        if key not in CONFIG_KEYS:
            raise InvalidConfigError(f"unknown key {key!r}", line=line)
        values[key] = _coerce(key, raw, line)
    cfg = AfsharConfig(**values)
    if plane is not None and not np.isclose(plane[0], cfg.detector_plane, rtol=1e-9, atol=0):
        raise InvalidConfigError(
            f"detector_plane {plane[0]} disagrees with the lens equation ({cfg.detector_plane})", line=plane[1]
        )
    return cfg


def parse_config_text(text: str, base: Optional[AfsharConfig] = None) -> AfsharConfig:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, eq, value = body.partition("=")
        if not eq or not key.strip() or not value.strip():
            raise InvalidConfigError(f"expected 'key = value', got {line.strip()!r}", line=lineno)
        pairs.append((key, value, lineno))
    return parse_config_pairs(pairs, base)


def load_config(path) -> AfsharConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidConfigError(f"cannot read config {path}: {e.strerror}") from None
    return parse_config_text(text, AfsharConfig())


def apply_overrides(config: AfsharConfig, overrides: Iterable[str]) -> AfsharConfig:
    pairs = []
    for item in overrides:
        key, eq, value = item.partition("=")
        if not eq:
            raise InvalidConfigError(f"override must be key=value, got {item!r}")
        pairs.append((key, value, None))
    return parse_config_pairs(pairs, config)


def dump_config(config: AfsharConfig) -> str:
    return "".join(f"{k} = {getattr(config, k)!r}\n" for k in CONFIG_KEYS)


def profile_csv(profile: IntensityProfile, config: Optional[AfsharConfig] = None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA}\n")
    if config is not None:
        buf.write(f"# config: {json.dumps(config.to_dict(), sort_keys=True)}\n")
    buf.write("position_m,intensity\n")
    for x, v in zip(profile.x, profile.values):
        buf.write(f"{float(x)!r},{float(v)!r}\n")
    return buf.getvalue()


def read_profile_csv(text: str) -> IntensityProfile:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    x, v = data[:, 0], data[:, 1]
    dx = float(x[1] - x[0])
    n = x.size
    return IntensityProfile(v, dx, float(x[n // 2]))


def summary_record(result: ScenarioResult, config: AfsharConfig, **extra) -> dict:
    return {"schema": SCHEMA, "config": config.to_dict(), **result.summary(), **extra}


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_artifacts(outdir, artifacts: dict[str, str]) -> list[Path]:
    """Write every ``name -> text`` pair; called only once all computation is done."""
    paths = []
    for name, text in artifacts.items():
        p = Path(outdir) / name
        write_atomic(p, text)
        paths.append(p)
    return paths
