"""Helper functions for the application"""

import hashlib
import json
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator


def file_digest(path: Path, algorithm: str = "sha256") -> str:
    """Hex digest of a file's content"""
    digest = hashlib.new(algorithm)
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def write_json(path: Path, payload: Any) -> Path:
    """Write JSON with stable key order and a trailing newline"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def read_json(path: Path) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def format_coord(value: float, decimals: int) -> str:
    """Fixed-decimal rendering used by every CSV writer; never emits '-0.0...'"""
    text = f"{value:.{decimals}f}"
    if text.lstrip('-').strip('0.') == '':
        text = text.lstrip('-')
    return text


@contextmanager
def stopwatch() -> Iterator[dict]:
    """Measure wall time of a block; elapsed seconds land in ``timer['elapsed_s']``"""
    timer = {'elapsed_s': 0.0}
    start = time.perf_counter()
    try:
        yield timer
    finally:
        timer['elapsed_s'] = time.perf_counter() - start
