"""Machine-readable result certificates.

A certificate bundles the verdicts, reports and payloads of one command
run.  Serialization is canonical (sorted keys, shortest round-trip float
repr), so re-running with the same input digest and seed reproduces the
bytes except for the ``timing`` block.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

__all__ = ["Certificate", "TOOL_VERSION"]

TOOL_VERSION = "0.1.0"


def _plain(obj):
    """Recursively strip numpy scalars/arrays down to JSON-native types."""
    import numpy as np

    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and obj != obj:  # NaN is not valid JSON
        return None
    return obj


@dataclass
class Certificate:
    command: str
    input_digest: str
    seed: int
    verdicts: list = field(default_factory=list)
    stability: dict | None = None
    paths: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    started: float = field(default_factory=time.time)

    @property
    def has_fail(self) -> bool:
        return any(v.get("status") == "fail" for v in self.verdicts)

    def to_dict(self, with_timing: bool = True) -> dict:
        body = {
            "tool_version": TOOL_VERSION,
            "schema_version": 1,
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed,
            "verdicts": _plain(self.verdicts),
            "stability": _plain(self.stability),
            "paths": _plain(self.paths),
            "notes": _plain(self.notes),
            "extras": _plain(self.extras),
        }
        if with_timing:
            body["timing"] = {"wall_seconds": time.time() - self.started}
        return body

    def to_json(self, with_timing: bool = True) -> str:
        return json.dumps(self.to_dict(with_timing), sort_keys=True, indent=2)
