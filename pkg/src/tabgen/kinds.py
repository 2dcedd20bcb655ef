"""Dataset kinds and the table orientation each one produces."""

from __future__ import annotations

from enum import Enum

from tabgen.table import Orientation


class DatasetKind(str, Enum):
    E2E = "e2e"
    WIKITABLETEXT = "wikitabletext"
    WIKIBIO = "wikibio"
    ROTOWIRE_TEAM = "rotowire-team"
    ROTOWIRE_PLAYER = "rotowire-player"

    @property
    def orientation(self) -> Orientation:
        if self in (DatasetKind.ROTOWIRE_TEAM, DatasetKind.ROTOWIRE_PLAYER):
            return Orientation.MATRIX
        return Orientation.ATTRIBUTE_VALUE

    @property
    def numeric(self) -> bool:
        """Whether cell values are numbers, enabling numeric answer extraction."""
        return self in (DatasetKind.ROTOWIRE_TEAM, DatasetKind.ROTOWIRE_PLAYER)

    @classmethod
    def from_string(cls, value: str) -> "DatasetKind":
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown dataset kind {value!r}; expected one of: {names}") from None
