"""Measured serving profiles: devices, draft variants, verifiers, acceptance data.

The on-disk format is a directory of four CSV files (``devices.csv``,
``verifiers.csv``, ``variants.csv``, ``acceptance.csv``): comma-separated
UTF-8 with a mandatory header row and no quoting. Identifiers are
case-sensitive ``[a-z0-9._-]+``; quantisation tags additionally allow
uppercase (``Q4_K_M``). Numbers are plain decimal text with a ``.`` radix
point. A missing power reading is an empty field, never a sentinel value.

A loaded :class:`ProfileStore` is immutable and safe for concurrent reads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

from .acceptance import TabulatedCurve
from .errors import (
    DuplicateKeyError,
    IntegrityError,
    MalformedRowError,
    MissingInputError,
    NotFoundError,
)

DEVICES_CSV = "devices.csv"
VERIFIERS_CSV = "verifiers.csv"
VARIANTS_CSV = "variants.csv"
ACCEPTANCE_CSV = "acceptance.csv"

# Canonical file order; violation listings and error precedence follow it.
PROFILE_FILES = (DEVICES_CSV, VERIFIERS_CSV, VARIANTS_CSV, ACCEPTANCE_CSV)

_HEADERS = {
    DEVICES_CSV: ["device_id", "display_name", "has_power_data"],
    VERIFIERS_CSV: ["target_id", "price_per_mtok", "t_verify_s"],
    VARIANTS_CSV: [
        "model_id",
        "family",
        "params_billions",
        "quant_id",
        "device_id",
        "v_d_tok_s",
        "power_w",
    ],
    ACCEPTANCE_CSV: ["model_id", "quant_id", "target_id", "k", "alpha"],
}

_ID_RE = re.compile(r"[a-z0-9._-]+\Z")
_QUANT_RE = re.compile(r"[A-Za-z0-9._-]+\Z")

ID_PATTERN = _ID_RE.pattern
QUANT_PATTERN = _QUANT_RE.pattern


@dataclass(frozen=True)
class DevicePlatform:
    device_id: str
    display_name: str
    has_power_data: bool


@dataclass(frozen=True)
class DraftModel:
    model_id: str
    family: str
    params_billions: float


@dataclass(frozen=True)
class VariantProfile:
    """Drafting throughput and power of one (model, quant) on one device."""

    model_id: str
    quant_id: str
    device_id: str
    v_d_tok_s: float
    power_w: float | None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.model_id, self.quant_id, self.device_id)


@dataclass(frozen=True)
class VerifierSpec:
    target_id: str
    price_per_mtok: float
    t_verify_s: float

    @property
    def price_per_token(self) -> float:
        """Unit price in dollars per verified-submitted token."""
        return self.price_per_mtok * 1e-6


@dataclass(frozen=True)
class AcceptancePoint:
    """Measured acceptance rate of a draft variant at one speculative length."""

    model_id: str
    quant_id: str
    target_id: str
    k: int
    alpha: float

    @property
    def curve_key(self) -> tuple[str, str, str]:
        return (self.model_id, self.quant_id, self.target_id)


@dataclass(frozen=True)
class Violation:
    """One failed store invariant. ``kind`` selects the error class on load."""

    file: str
    key: str
    rule: str
    kind: str = "invalid"  # "invalid" | "duplicate" | "dangling"

    def __str__(self) -> str:
        return f"{self.file}: {self.key}: {self.rule}"


@dataclass(frozen=True)
class ProfileStore:
    """Immutable, canonically ordered collection of all profile records."""

    devices: tuple[DevicePlatform, ...]
    models: tuple[DraftModel, ...]
    variants: tuple[VariantProfile, ...]
    verifiers: tuple[VerifierSpec, ...]
    acceptance: tuple[AcceptancePoint, ...]

    @classmethod
    def from_records(
        cls,
        devices=(),
        models=(),
        variants=(),
        verifiers=(),
        acceptance=(),
    ) -> "ProfileStore":
        """Build a store in canonical key order, regardless of input order."""
        return cls(
            devices=tuple(sorted(devices, key=lambda d: d.device_id)),
            models=tuple(sorted(models, key=lambda m: m.model_id)),
            variants=tuple(sorted(variants, key=lambda v: v.key)),
            verifiers=tuple(sorted(verifiers, key=lambda v: v.target_id)),
            acceptance=tuple(sorted(acceptance, key=lambda a: (*a.curve_key, a.k))),
        )

    # Indexes assume a validated store; on duplicate keys the first record
    # in canonical order wins, which keeps lookups deterministic either way.
    @cached_property
    def _device_index(self) -> dict[str, DevicePlatform]:
        index: dict[str, DevicePlatform] = {}
        for dev in self.devices:
            index.setdefault(dev.device_id, dev)
        return index

    @cached_property
    def _model_index(self) -> dict[str, DraftModel]:
        index: dict[str, DraftModel] = {}
        for model in self.models:
            index.setdefault(model.model_id, model)
        return index

    @cached_property
    def _verifier_index(self) -> dict[str, VerifierSpec]:
        index: dict[str, VerifierSpec] = {}
        for verifier in self.verifiers:
            index.setdefault(verifier.target_id, verifier)
        return index

    @cached_property
    def _variant_index(self) -> dict[tuple[str, str, str], VariantProfile]:
        index: dict[tuple[str, str, str], VariantProfile] = {}
        for variant in self.variants:
            index.setdefault(variant.key, variant)
        return index

    @cached_property
    def _curve_index(self) -> dict[tuple[str, str, str], tuple[AcceptancePoint, ...]]:
        grouped: dict[tuple[str, str, str], list[AcceptancePoint]] = {}
        for point in self.acceptance:
            grouped.setdefault(point.curve_key, []).append(point)
        return {key: tuple(points) for key, points in grouped.items()}

    def device(self, device_id: str) -> DevicePlatform:
        try:
            return self._device_index[device_id]
        except KeyError:
            raise NotFoundError(f"unknown device '{device_id}'") from None

    def model(self, model_id: str) -> DraftModel:
        try:
            return self._model_index[model_id]
        except KeyError:
            raise NotFoundError(f"unknown draft model '{model_id}'") from None

    def verifier(self, target_id: str) -> VerifierSpec:
        try:
            return self._verifier_index[target_id]
        except KeyError:
            raise NotFoundError(f"unknown verifier target '{target_id}'") from None

    def variant(self, model_id: str, quant_id: str, device_id: str) -> VariantProfile:
        try:
            return self._variant_index[(model_id, quant_id, device_id)]
        except KeyError:
            raise NotFoundError(
                f"no variant profile for ({model_id}, {quant_id}, {device_id})"
            ) from None

    def variants_on_device(self, device_id: str) -> tuple[VariantProfile, ...]:
        return tuple(v for v in self.variants if v.device_id == device_id)

    def has_acceptance_curve(self, model_id: str, quant_id: str, target_id: str) -> bool:
        return (model_id, quant_id, target_id) in self._curve_index

    def acceptance_curve(self, model_id: str, quant_id: str, target_id: str) -> TabulatedCurve:
        """Tabulated acceptance-vs-k curve for one (model, quant, target)."""
        key = (model_id, quant_id, target_id)
        points = self._curve_index.get(key)
        if not points:
            raise NotFoundError(
                f"no acceptance curve for ({model_id}, {quant_id}, {target_id})"
            )
        return TabulatedCurve(tuple((p.k, p.alpha) for p in points))

    @property
    def device_ids(self) -> tuple[str, ...]:
        return tuple(d.device_id for d in self.devices)

    @property
    def target_ids(self) -> tuple[str, ...]:
        return tuple(v.target_id for v in self.verifiers)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _split_rows(name: str, text: str) -> list[tuple[int, list[str]]]:
    """Split CSV text into (line_number, fields) rows and check the header.

    The format forbids quoting and embedded commas, so a plain split is the
    whole parser; line numbers stay exact for error messages.
    """
    expected = _HEADERS[name]
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRowError(name, 1, "header", "file is empty, header row required")
    header = [cell.strip("\r") for cell in lines[0].split(",")]
    if header != expected:
        raise MalformedRowError(
            name, 1, "header", f"expected columns {','.join(expected)}, got {','.join(header)}"
        )
    rows: list[tuple[int, list[str]]] = []
    for offset, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if line == "":
            continue
        fields = line.split(",")
        if len(fields) != len(expected):
            raise MalformedRowError(
                name,
                offset,
                "row",
                f"expected {len(expected)} fields, got {len(fields)}",
            )
        rows.append((offset, fields))
    return rows


def _parse_id(name: str, line: int, column: str, text: str, pattern: re.Pattern[str]) -> str:
    if not pattern.match(text):
        raise MalformedRowError(
            name, line, column, f"'{text}' does not match identifier pattern {pattern.pattern[:-2]}"
        )
    return text


def _parse_text(name: str, line: int, column: str, text: str) -> str:
    if not text:
        raise MalformedRowError(name, line, column, "must not be empty")
    return text


def _parse_bool(name: str, line: int, column: str, text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise MalformedRowError(name, line, column, f"expected 'true' or 'false', got '{text}'")


def _parse_float(
    name: str,
    line: int,
    column: str,
    text: str,
    *,
    positive: bool = False,
    nonnegative: bool = False,
    unit_interval: bool = False,
) -> float:
    try:
        if "_" in text:  # float() tolerates 1_000; the format does not
            raise ValueError
        value = float(text)
    except ValueError:
        raise MalformedRowError(name, line, column, f"'{text}' is not a number") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise MalformedRowError(name, line, column, f"'{text}' is not finite")
    if positive and value <= 0:
        raise MalformedRowError(name, line, column, f"must be > 0, got {text}")
    if nonnegative and value < 0:
        raise MalformedRowError(name, line, column, f"must be >= 0, got {text}")
    if unit_interval and not 0.0 <= value <= 1.0:
        raise MalformedRowError(name, line, column, f"must be within [0, 1], got {text}")
    return value


def _parse_int(name: str, line: int, column: str, text: str, *, minimum: int) -> int:
    try:
        if "_" in text:
            raise ValueError
        value = int(text)
    except ValueError:
        raise MalformedRowError(name, line, column, f"'{text}' is not an integer") from None
    if value < minimum:
        raise MalformedRowError(name, line, column, f"must be >= {minimum}, got {text}")
    return value


def _read_file(directory: Path, name: str) -> str:
    path = directory / name
    if not path.is_file():
        raise MissingInputError(f"missing input: {name}")
    return path.read_text(encoding="utf-8")


def parse_profile_dir(directory: str | Path) -> ProfileStore:
    """Parse the four CSV files into a store without semantic validation.

    Raises on missing files and malformed rows only; duplicate keys and
    cross-file inconsistencies survive into the store so that
    :func:`validate` can report all of them at once.
    """
    directory = Path(directory)
    texts = {name: _read_file(directory, name) for name in PROFILE_FILES}

    devices = []
    for line, f in _split_rows(DEVICES_CSV, texts[DEVICES_CSV]):
        devices.append(
            DevicePlatform(
                device_id=_parse_id(DEVICES_CSV, line, "device_id", f[0], _ID_RE),
                display_name=_parse_text(DEVICES_CSV, line, "display_name", f[1]),
                has_power_data=_parse_bool(DEVICES_CSV, line, "has_power_data", f[2]),
            )
        )

    verifiers = []
    for line, f in _split_rows(VERIFIERS_CSV, texts[VERIFIERS_CSV]):
        verifiers.append(
            VerifierSpec(
                target_id=_parse_id(VERIFIERS_CSV, line, "target_id", f[0], _ID_RE),
                price_per_mtok=_parse_float(
                    VERIFIERS_CSV, line, "price_per_mtok", f[1], nonnegative=True
                ),
                t_verify_s=_parse_float(VERIFIERS_CSV, line, "t_verify_s", f[2], positive=True),
            )
        )

    models: dict[tuple[str, str, float], DraftModel] = {}
    variants = []
    for line, f in _split_rows(VARIANTS_CSV, texts[VARIANTS_CSV]):
        model = DraftModel(
            model_id=_parse_id(VARIANTS_CSV, line, "model_id", f[0], _ID_RE),
            family=_parse_id(VARIANTS_CSV, line, "family", f[1], _ID_RE),
            params_billions=_parse_float(
                VARIANTS_CSV, line, "params_billions", f[2], positive=True
            ),
        )
        # Conflicting metadata for one model_id yields two DraftModel records,
        # which validate() reports as a duplicate model id.
        models.setdefault((model.model_id, model.family, model.params_billions), model)
        power_text = f[6]
        variants.append(
            VariantProfile(
                model_id=model.model_id,
                quant_id=_parse_id(VARIANTS_CSV, line, "quant_id", f[3], _QUANT_RE),
                device_id=_parse_id(VARIANTS_CSV, line, "device_id", f[4], _ID_RE),
                v_d_tok_s=_parse_float(VARIANTS_CSV, line, "v_d_tok_s", f[5], positive=True),
                power_w=None
                if power_text == ""
                else _parse_float(VARIANTS_CSV, line, "power_w", power_text, positive=True),
            )
        )

    acceptance = []
    for line, f in _split_rows(ACCEPTANCE_CSV, texts[ACCEPTANCE_CSV]):
        acceptance.append(
            AcceptancePoint(
                model_id=_parse_id(ACCEPTANCE_CSV, line, "model_id", f[0], _ID_RE),
                quant_id=_parse_id(ACCEPTANCE_CSV, line, "quant_id", f[1], _QUANT_RE),
                target_id=_parse_id(ACCEPTANCE_CSV, line, "target_id", f[2], _ID_RE),
                k=_parse_int(ACCEPTANCE_CSV, line, "k", f[3], minimum=1),
                alpha=_parse_float(ACCEPTANCE_CSV, line, "alpha", f[4], unit_interval=True),
            )
        )

    return ProfileStore.from_records(
        devices=devices,
        models=list(models.values()),
        variants=variants,
        verifiers=verifiers,
        acceptance=acceptance,
    )


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate(store: ProfileStore) -> list[Violation]:
    """Check every store invariant; empty result means the store is sound.

    Violations are data, not errors: the list is ordered deterministically
    by file, then record key, so reports are stable across runs.
    """
    found: list[tuple[int, str, Violation]] = []

    def add(file: str, key: str, rule: str, kind: str = "invalid") -> None:
        found.append((PROFILE_FILES.index(file), key, Violation(file, key, rule, kind)))

    seen_devices: set[str] = set()
    for dev in store.devices:
        if not _ID_RE.match(dev.device_id):
            add(DEVICES_CSV, dev.device_id or "<empty>", "device_id must match identifier pattern")
        if dev.device_id in seen_devices:
            add(DEVICES_CSV, dev.device_id, "duplicate device_id", kind="duplicate")
        seen_devices.add(dev.device_id)
        powered = [
            v for v in store.variants if v.device_id == dev.device_id and v.power_w is not None
        ]
        if not dev.has_power_data and powered:
            key = powered[0].key
            add(
                DEVICES_CSV,
                dev.device_id,
                f"has_power_data=false but variant {key} carries power_w",
            )

    seen_targets: set[str] = set()
    for verifier in store.verifiers:
        if verifier.target_id in seen_targets:
            add(VERIFIERS_CSV, verifier.target_id, "duplicate target_id", kind="duplicate")
        seen_targets.add(verifier.target_id)
        if verifier.t_verify_s <= 0:
            add(VERIFIERS_CSV, verifier.target_id, "t_verify_s must be > 0")
        if verifier.price_per_mtok < 0:
            add(VERIFIERS_CSV, verifier.target_id, "price_per_mtok must be >= 0")

    seen_models: set[str] = set()
    for model in store.models:
        if model.model_id in seen_models:
            add(
                VARIANTS_CSV,
                model.model_id,
                "conflicting family/params_billions for one model_id",
                kind="duplicate",
            )
        seen_models.add(model.model_id)
        if model.params_billions <= 0:
            add(VARIANTS_CSV, model.model_id, "params_billions must be > 0")

    seen_variants: set[tuple[str, str, str]] = set()
    for variant in store.variants:
        key = str(variant.key)
        if variant.key in seen_variants:
            add(VARIANTS_CSV, key, "duplicate (model_id, quant_id, device_id)", kind="duplicate")
        seen_variants.add(variant.key)
        if variant.v_d_tok_s <= 0:
            add(VARIANTS_CSV, key, "v_d_tok_s must be > 0")
        if variant.power_w is not None and variant.power_w <= 0:
            add(VARIANTS_CSV, key, "power_w must be > 0 when present")
        if variant.model_id not in store._model_index:
            add(
                VARIANTS_CSV,
                key,
                f"references unknown draft model '{variant.model_id}'",
                kind="dangling",
            )
        device = store._device_index.get(variant.device_id)
        if device is None:
            add(
                VARIANTS_CSV,
                key,
                f"references unknown device '{variant.device_id}'",
                kind="dangling",
            )
        elif device.has_power_data and variant.power_w is None:
            add(
                VARIANTS_CSV,
                key,
                f"power_w absent but device '{device.device_id}' has has_power_data=true",
            )

    variant_pairs = {(v.model_id, v.quant_id) for v in store.variants}
    seen_points: set[tuple[str, str, str, int]] = set()
    for point in store.acceptance:
        key = f"({point.model_id}, {point.quant_id}, {point.target_id}, k={point.k})"
        if (*point.curve_key, point.k) in seen_points:
            add(ACCEPTANCE_CSV, key, "duplicate (model_id, quant_id, target_id, k)", kind="duplicate")
        seen_points.add((*point.curve_key, point.k))
        if point.k < 1:
            add(ACCEPTANCE_CSV, key, "k must be >= 1")
        if not 0.0 <= point.alpha <= 1.0:
            add(ACCEPTANCE_CSV, key, f"alpha must be within [0, 1], got {point.alpha}")
        if (point.model_id, point.quant_id) not in variant_pairs:
            add(
                ACCEPTANCE_CSV,
                key,
                f"references unknown variant '({point.model_id}, {point.quant_id})'",
                kind="dangling",
            )
        if point.target_id not in store._verifier_index:
            add(
                ACCEPTANCE_CSV,
                key,
                f"references unknown verifier target '{point.target_id}'",
                kind="dangling",
            )

    for curve_key, points in sorted(store._curve_index.items()):
        distinct_k = {p.k for p in points}
        if len(distinct_k) < 2:
            add(
                ACCEPTANCE_CSV,
                str(curve_key),
                f"acceptance curve needs >= 2 distinct k points, got {len(distinct_k)}",
            )

    found.sort(key=lambda item: (item[0], item[1], item[2].rule))
    return [violation for _, _, violation in found]


_KIND_ERRORS = {"duplicate": DuplicateKeyError, "dangling": IntegrityError}


def load_profiles(directory: str | Path) -> ProfileStore:
    """Load and fully validate a profile directory.

    Row order in the files never affects the result. The first violation in
    deterministic (file, key) order is raised as its matching error class.
    """
    store = parse_profile_dir(directory)
    violations = validate(store)
    if violations:
        first = violations[0]
        raise _KIND_ERRORS.get(first.kind, IntegrityError)(str(first))
    return store


def lookup_variant(
    store: ProfileStore, model_id: str, quant_id: str, device_id: str
) -> VariantProfile:
    """Return the unique variant profile for the given triple."""
    return store.variant(model_id, quant_id, device_id)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _fmt(value: float) -> str:
    # repr() emits the shortest decimal that parses back to the same double,
    # so load(serialize(store)) round-trips numeric fields bit-exactly.
    return repr(float(value))


def serialize(store: ProfileStore, directory: str | Path) -> None:
    """Write the store back out as the four CSV files, rows sorted by key."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    canonical = ProfileStore.from_records(
        devices=store.devices,
        models=store.models,
        variants=store.variants,
        verifiers=store.verifiers,
        acceptance=store.acceptance,
    )

    lines = [",".join(_HEADERS[DEVICES_CSV])]
    for dev in canonical.devices:
        flag = "true" if dev.has_power_data else "false"
        lines.append(f"{dev.device_id},{dev.display_name},{flag}")
    (directory / DEVICES_CSV).write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [",".join(_HEADERS[VERIFIERS_CSV])]
    for verifier in canonical.verifiers:
        lines.append(
            f"{verifier.target_id},{_fmt(verifier.price_per_mtok)},{_fmt(verifier.t_verify_s)}"
        )
    (directory / VERIFIERS_CSV).write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [",".join(_HEADERS[VARIANTS_CSV])]
    for variant in canonical.variants:
        model = canonical.model(variant.model_id)
        power = "" if variant.power_w is None else _fmt(variant.power_w)
        lines.append(
            f"{variant.model_id},{model.family},{_fmt(model.params_billions)},"
            f"{variant.quant_id},{variant.device_id},{_fmt(variant.v_d_tok_s)},{power}"
        )
    (directory / VARIANTS_CSV).write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = [",".join(_HEADERS[ACCEPTANCE_CSV])]
    for point in canonical.acceptance:
        lines.append(
            f"{point.model_id},{point.quant_id},{point.target_id},{point.k},{_fmt(point.alpha)}"
        )
    (directory / ACCEPTANCE_CSV).write_text("\n".join(lines) + "\n", encoding="utf-8")
