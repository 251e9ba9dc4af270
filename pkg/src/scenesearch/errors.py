"""Error taxonomy shared by every module.

Each error carries a short machine-readable ``code`` (e.g. ``"bad-magic"``)
next to the human-readable message, and an ``exit_code`` the CLI maps to a
process exit status. Codes are stable contract surface; tests assert on them.
"""

from __future__ import annotations


class SceneSearchError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class TensorFormatError(SceneSearchError):
    """Malformed tensor payload. Carries the byte offset of the violation."""

    exit_code = 4

    def __init__(self, code: str, message: str, offset: int):
        super().__init__(code, f"{message} (byte offset {offset})")
        self.offset = offset


class DatasetValidationError(SceneSearchError):
    """Dataset failed validation. Lists every violation, not just the first."""

    exit_code = 3

    def __init__(self, violations: list[str]):
        summary = "; ".join(violations)
        super().__init__("invalid-dataset", f"{len(violations)} violation(s): {summary}")
        self.violations = list(violations)


class EmbeddingError(SceneSearchError):
    """Degenerate vectors, unmapped terms/synsets, unknown queries."""

    exit_code = 5


class TrainingError(SceneSearchError):
    """Degenerate training sets, single-class calibration, empty pair sets."""

    exit_code = 6


class FeatureError(SceneSearchError):
    """Missing keyframe features or incomplete activation bundles."""

    exit_code = 7


class IndexError_(SceneSearchError):
    """Missing or malformed index files.

    Trailing underscore avoids shadowing the builtin ``IndexError``.
    """

    exit_code = 8


class ConfigError(SceneSearchError):
    """Out-of-range or inconsistent configuration values."""

    exit_code = 2
