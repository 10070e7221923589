"""Error hierarchy shared by every avir package."""
from pathlib import Path
from typing import Iterable, Optional, Union

PathLike = Union[str, Path]


class AvirError(Exception):
    """Base class for all avir errors."""


class InvalidInputError(AvirError, ValueError):
    """A pure operation was called outside its preconditions."""


class AlignmentError(InvalidInputError):
    """Two record sets do not cover the same question ids."""

    def __init__(self, missing_ids: Iterable[str] = (), unexpected_ids: Iterable[str] = ()):
        self.missing_ids = sorted(missing_ids)
        self.unexpected_ids = sorted(unexpected_ids)
        parts = []
        if self.missing_ids:
            parts.append(f"missing {len(self.missing_ids)} question(s): {_preview(self.missing_ids)}")
        if self.unexpected_ids:
            parts.append(f"unexpected {len(self.unexpected_ids)} question(s): {_preview(self.unexpected_ids)}")
        super().__init__("; ".join(parts) or "question ids do not line up")


def _preview(ids: list, limit: int = 10) -> str:
    shown = ", ".join(ids[:limit])
    return shown + (", ..." if len(ids) > limit else "")


class ConfigError(AvirError):
    """The run configuration is unusable."""


class RecordParseError(AvirError):
    """A line of a record file could not be parsed against its schema."""

    def __init__(self, path: PathLike, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class RecordValidationError(AvirError):
    """Records parsed but break a range, uniqueness or alignment rule."""

    def __init__(
        self,
        message: str,
        path: Optional[PathLike] = None,
        line_no: Optional[int] = None,
        missing_ids: Optional[Iterable[str]] = None,
    ):
        self.path = str(path) if path is not None else None
        self.line_no = line_no
        self.missing_ids = sorted(missing_ids) if missing_ids else []
        where = ""
        if self.path is not None:
            where = f"{self.path}:{line_no}: " if line_no is not None else f"{self.path}: "
        super().__init__(f"{where}{message}")


class OutputWriteError(AvirError):
    def __init__(self, path: PathLike, cause: Exception):
        self.path = str(path)
        super().__init__(f"Could not write {self.path}: {cause}")


class BackendUnavailableError(AvirError):
    """A model endpoint kept failing after the retry budget was spent."""


class InvalidScoreError(AvirError, ValueError):
    """A scorer produced a relevance value outside [0, 1]."""


class ScoreNotFoundError(AvirError, KeyError):
    """The score cache has no entry for a question."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class EmptyAnswerError(AvirError):
    """The answer backend returned an empty completion."""
