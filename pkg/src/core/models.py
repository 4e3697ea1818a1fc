"""Pydantic data models for documents read from and written to disk."""

from __future__ import annotations

from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


# ── Numbers ──


class ComplexValue(BaseModel):
    re: float = 0.0
    im: float = 0.0

    @classmethod
    def of(cls, value: complex) -> "ComplexValue":
        value = complex(value)
        return cls(re=float(value.real), im=float(value.imag))

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


def _coerce_complex(value: Any) -> Any:
    """Accept bare numbers and ``[re, im]`` pairs wherever a ComplexValue is expected."""
    if isinstance(value, (int, float)):
        return {"re": float(value), "im": 0.0}
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return {"re": float(value[0]), "im": float(value[1])}
    return value


class MatrixDocument(BaseModel):
    """Dense complex matrix as an array of rows."""
    rows: list[list[ComplexValue]]

    @field_validator("rows", mode="before")
    @classmethod
    def _numbers_allowed(cls, rows: Any) -> Any:
        if isinstance(rows, list):
            return [[_coerce_complex(x) for x in row] if isinstance(row, list) else row
                    for row in rows]
        return rows

    @classmethod
    def of(cls, matrix: np.ndarray) -> "MatrixDocument":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=np.complex128))
        return cls(rows=[[ComplexValue.of(x) for x in row] for row in matrix])

    def to_array(self) -> np.ndarray:
        widths = {len(row) for row in self.rows}
        if len(widths) > 1:
            raise ValueError(f"ragged matrix rows of widths {sorted(widths)}")
        if not self.rows:
            return np.zeros((0, 0), dtype=np.complex128)
        return np.array([[x.to_complex() for x in row] for row in self.rows],
                        dtype=np.complex128)


# ── Diagrams ──


class LegDocument(BaseModel):
    wire: Literal["F", "Q", "O"]
    dir: Literal["in", "out"]


class RawTensorDocument(BaseModel):
    """Entries of a raw node, flattened C-order over leg positions ``0..k-1``."""
    entries: list[ComplexValue]

    @field_validator("entries", mode="before")
    @classmethod
    def _numbers_allowed(cls, entries: Any) -> Any:
        if isinstance(entries, list):
            return [_coerce_complex(x) for x in entries]
        return entries


class NodeDocument(BaseModel):
    id: str
    kind: str
    param: ComplexValue | None = None
    legs: list[LegDocument] = Field(default_factory=list)
    tensor: RawTensorDocument | None = None

    @field_validator("param", mode="before")
    @classmethod
    def _number_param(cls, value: Any) -> Any:
        return _coerce_complex(value)


class DiagramDocument(BaseModel):
    """``{"nodes": [...], "edges": [[[n1, leg], [n2, leg]]], "boundary": [[n, leg, name?]]}``."""
    nodes: list[NodeDocument] = Field(default_factory=list)
    edges: list[tuple[tuple[str, int], tuple[str, int]]] = Field(default_factory=list)
    boundary: list[tuple[str, int] | tuple[str, int, str]] = Field(default_factory=list)


# ── Reports ──


class VerificationRecord(BaseModel):
    """One verified (rule, params) cell of a sweep."""
    model_config = ConfigDict(populate_by_name=True)

    rule: str
    group: str = ""
    params: dict[str, Any] = Field(default_factory=dict)
    max_dev: float | None = None
    passed: bool = Field(default=False, alias="pass")
    skipped: bool = False
    reason: str = ""
    elapsed_ms: float = 0.0


class ScheduleEntry(BaseModel):
    round: int
    op: Literal["measure-XX", "measure-PP", "unitary-Cgg'"]
    sites: list[list[int]]


class ImageTable(BaseModel):
    """Qubit image of each nearest-neighbour bilinear: ``{bilinear: {edge: letter}}``."""
    entries: dict[str, dict[str, str]] = Field(default_factory=dict)
