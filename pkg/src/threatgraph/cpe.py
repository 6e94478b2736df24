"""CPE 2.3 formatted-string parsing, comparison, and canonical serialization.

A formatted string looks like::

    cpe:2.3:a:google:chrome:10.0.648.126:*:*:*:*:*:*:*

i.e. exactly 13 colon-delimited fields: the literal ``cpe``, the literal
``2.3``, then eleven attributes (part, vendor, product, version, update,
edition, language, sw_edition, target_sw, target_hw, other).  Inside a
field, ``*`` means "any value", ``-`` means "not applicable", and a
backslash escapes the next character.  Only this binding is accepted; the
legacy ``cpe:/`` URI binding is rejected as malformed.

Canonical text is lowercase, and serialization escapes exactly the
characters ``\\ * ? :`` inside values (plus a value that is exactly ``-``,
which must be escaped to stay distinguishable from "not applicable").
``parse_cpe23`` lowercases its input, so parse -> serialize -> parse is a
fixed point for every accepted string.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BadEscapeError,
    CpeError,
    EmptyFieldError,
    MalformedCpeError,
    WildcardVendorProductError,
)

ATTRIBUTE_NAMES = (
    "part", "vendor", "product", "version", "update", "edition",
    "language", "sw_edition", "target_sw", "target_hw", "other",
)

_ESCAPED = set("\\*?:")


@dataclass(frozen=True)
class CpeAttribute:
    """One CPE attribute: any-value, not-applicable, or a concrete value."""

    kind: str  # "any" | "na" | "value"
    text: str = ""

    def __post_init__(self):
        if self.kind not in ("any", "na", "value"):
            raise ValueError(f"bad attribute kind {self.kind!r}")
        if self.kind == "value" and not self.text:
            raise ValueError("value attribute must be non-empty")
        if self.kind != "value" and self.text:
            raise ValueError("only value attributes carry text")

    @property
    def is_any(self) -> bool:
        return self.kind == "any"

    @property
    def is_na(self) -> bool:
        return self.kind == "na"

    @property
    def is_value(self) -> bool:
        return self.kind == "value"

    def field_text(self) -> str:
        """Canonical field text: ``*``, ``-``, or the escaped value."""
        if self.kind == "any":
            return "*"
        if self.kind == "na":
            return "-"
        if self.text == "-":
            return "\\-"
        return "".join("\\" + c if c in _ESCAPED else c for c in self.text).lower()


ANY = CpeAttribute("any")
NA = CpeAttribute("na")


def value(text: str) -> CpeAttribute:
    """Concrete attribute value (unescaped text)."""
    return CpeAttribute("value", text)


@dataclass(frozen=True)
class CpeName:
    """A parsed CPE 2.3 name; one :class:`CpeAttribute` per field."""

    part: CpeAttribute
    vendor: CpeAttribute
    product: CpeAttribute
    version: CpeAttribute
    update: CpeAttribute
    edition: CpeAttribute
    language: CpeAttribute
    sw_edition: CpeAttribute
    target_sw: CpeAttribute
    target_hw: CpeAttribute
    other: CpeAttribute

    def __post_init__(self):
        if self.part.is_value and self.part.text not in ("a", "o", "h"):
            raise MalformedCpeError(
                f"part must be one of a/o/h, got {self.part.text!r}")

    def to_string(self) -> str:
        """Canonical formatted string for this name."""
        fields = [getattr(self, name).field_text() for name in ATTRIBUTE_NAMES]
        return "cpe:2.3:" + ":".join(fields)


def _split_fields(text: str) -> list[str]:
    """Split on unescaped colons; backslash escapes the following char."""
    fields: list[str] = []
    current: list[str] = []
    it = iter(text)
    for ch in it:
        if ch == "\\":
            nxt = next(it, None)
            if nxt is None:
                raise BadEscapeError(f"dangling backslash in {text!r}")
            current.append("\\" + nxt)
        elif ch == ":":
            fields.append("".join(current))
            current = []
        else:
            current.append(ch)
    fields.append("".join(current))
    return fields


def _unescape(field: str) -> str:
    out: list[str] = []
    it = iter(field)
    for ch in it:
        if ch == "\\":
            out.append(next(it))  # _split_fields already rejected danglers
        else:
            out.append(ch)
    return "".join(out)


def parse_cpe23(text: str) -> CpeName:
    """Parse a CPE 2.3 formatted string into a :class:`CpeName`.

    Raises :class:`MalformedCpeError` for a wrong prefix or field count,
    :class:`BadEscapeError` for a dangling backslash, and
    :class:`EmptyFieldError` for an empty field.
    """
    fields = _split_fields(text.lower())
    if len(fields) != 13:
        raise MalformedCpeError(
            f"expected 13 colon-delimited fields, got {len(fields)} in {text!r}")
    if fields[0] != "cpe" or fields[1] != "2.3":
        raise MalformedCpeError(
            f"not a cpe:2.3 formatted string: {text!r}")
    attrs = []
    for name, field in zip(ATTRIBUTE_NAMES, fields[2:]):
        if field == "*":
            attrs.append(ANY)
        elif field == "-":
            attrs.append(NA)
        elif field == "":
            raise EmptyFieldError(f"empty {name} field in {text!r}")
        else:
            attrs.append(value(_unescape(field)))
    return CpeName(*attrs)


def serialize_cpe23(name: CpeName) -> str:
    """Canonical formatted string; alias for :meth:`CpeName.to_string`."""
    return name.to_string()


def vendor_product(name: CpeName) -> tuple[str, str]:
    """The concrete (vendor, product) pair of a name.

    Raises :class:`WildcardVendorProductError` when either field is a
    wildcard or not-applicable.
    """
    if not (name.vendor.is_value and name.product.is_value):
        raise WildcardVendorProductError(
            f"vendor/product not concrete in {name.to_string()!r}")
    return name.vendor.text, name.product.text


def version_key(text: str):
    """Sort key for a dotted version string.

    Splits on ``.``; all-digit segments rank before lexical segments and
    compare numerically, lexical segments compare as text, and a shorter
    version precedes any extension of itself.  Total on all strings.
    """
    return tuple(
        (0, int(seg), "") if seg.isascii() and seg.isdigit() else (1, 0, seg)
        for seg in text.split(".")
    )


def compare_versions(a: str, b: str) -> int:
    """-1, 0, or 1 as version ``a`` precedes, equals, or follows ``b``."""
    ka, kb = version_key(a), version_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0
