"""Minimal JSON parameter schema for function-calling tools.

The schema language is deliberately small: named parameters with a kind
drawn from {string, number, integer, boolean, array, enum}, a required
flag, an optional default and a description.  That covers every built-in
tool without dragging in a full schema standard.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import (
    InvalidSchemaError,
    KindMismatchError,
    MissingRequiredError,
    UnknownKeyError,
)

PARAM_KINDS = ("string", "number", "integer", "boolean", "array", "enum")


@dataclass(frozen=True)
class Parameter:
    name: str
    kind: str
    required: bool = False
    default: Any = None
    description: str = ""
    values: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.kind not in PARAM_KINDS:
            raise InvalidSchemaError(f"parameter '{self.name}': unknown kind '{self.kind}'")
        if self.kind == "enum" and not self.values:
            raise InvalidSchemaError(f"enum parameter '{self.name}' needs values")
        if self.kind != "enum" and self.values:
            raise InvalidSchemaError(f"parameter '{self.name}': values only allowed for enum")
        if self.required and self.default is not None:
            raise InvalidSchemaError(f"required parameter '{self.name}' must not set a default")

    def to_json_obj(self) -> dict:
        obj: dict = {
            "name": self.name,
            "kind": self.kind,
            "required": self.required,
            "default": self.default,
            "description": self.description,
        }
        if self.kind == "enum":
            obj["values"] = list(self.values)
        return obj

    @staticmethod
    def from_json_obj(obj: dict) -> "Parameter":
        return Parameter(
            name=obj["name"],
            kind=obj["kind"],
            required=bool(obj.get("required", False)),
            default=obj.get("default"),
            description=obj.get("description", ""),
            values=tuple(obj.get("values", ())),
        )


def _json_kind(value: Any) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "integer"
    if isinstance(value, float):
        return "number"
    if isinstance(value, str):
        return "string"
    if isinstance(value, (list, tuple)):
        return "array"
    return type(value).__name__


def coerce_value(param: Parameter, value: Any) -> Any:
    """Check one value against a parameter, applying lossless coercions."""
    got = _json_kind(value)
    kind = param.kind
    if kind == "string":
        if got != "string":
            raise KindMismatchError(param.name, "string", got)
        return value
    if kind == "boolean":
        if got != "boolean":
            raise KindMismatchError(param.name, "boolean", got)
        return value
    if kind == "number":
        if got == "integer":
            return float(value)
        if got != "number":
            raise KindMismatchError(param.name, "number", got)
        return value
    if kind == "integer":
        if got == "integer":
            return value
        if got == "number" and float(value).is_integer():
            return int(value)
        raise KindMismatchError(param.name, "integer", got)
    if kind == "array":
        if got != "array":
            raise KindMismatchError(param.name, "array", got)
        return list(value)
    # enum
    if got != "string":
        raise KindMismatchError(param.name, "enum", got)
    if value not in param.values:
        raise KindMismatchError(
            param.name, "one of {" + ", ".join(param.values) + "}", repr(value)
        )
    return value


def validate_args(parameters: tuple[Parameter, ...], args: dict) -> dict:
    """Validate a JSON argument object against a parameter list.

    Unknown keys are rejected outright (there is deliberately no escape
    hatch: arguments like a train/test split fraction must fail loudly, not
    pass through).  Required parameters must be present and non-null, kinds
    are coerced only when lossless, and defaults fill the gaps.
    """
    by_name = {p.name: p for p in parameters}
    for key in sorted(args):
        if key not in by_name:
            raise UnknownKeyError(key)
    out: dict = {}
    for p in parameters:
        if p.name in args and args[p.name] is not None:
            out[p.name] = coerce_value(p, args[p.name])
        elif p.required:
            raise MissingRequiredError(p.name)
        else:
            out[p.name] = p.default
    return out
