"""Stream element types: int (32-bit wrapping), float (binary32), bool, fixed lists."""
from __future__ import annotations

from dataclasses import dataclass


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class Scalar(Type):
    name: str  # "int" | "float" | "bool"

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ListOf(Type):
    elem: Type
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValueError(f"list length must be >= 1, got {self.length}")

    def __str__(self) -> str:
        return f"list[{self.elem},{self.length}]"


INT = Scalar("int")
FLOAT = Scalar("float")
BOOL = Scalar("bool")

SCALARS = {"int": INT, "float": FLOAT, "bool": BOOL}


def is_numeric(t: Type) -> bool:
    return t == INT or t == FLOAT


def parse_type(text: str) -> Type:
    """Parse the textual form produced by ``str(t)``; used by the JSON IR."""
    text = text.replace(" ", "")
    if text in SCALARS:
        return SCALARS[text]
    if text.startswith("list[") and text.endswith("]"):
        inner = text[5:-1]
        elem, _, length = inner.rpartition(",")
        if elem and length.isdigit():
            return ListOf(parse_type(elem), int(length))
    raise ValueError(f"not a type: {text!r}")
