"""Event containers, file I/O and temporal scaling.

Events are kept column-wise (x, y, t, label arrays) rather than as a list of
objects; ``EventStream[i]`` still hands back a single :class:`Event`.
Labels use 1 = real, 0 = noise, -1 = unknown.
"""
from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple, Optional

import numpy as np

REAL = 1
NOISE = 0
UNKNOWN = -1

_MAGIC = b"EVD1"
_HEADER = struct.Struct("<4sIHH")
_RECORD = np.dtype([("x", "<u2"), ("y", "<u2"), ("t", "<f8"), ("label", "u1")])
_BINARY_UNKNOWN = 255

TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6}


class EventFormatError(ValueError):
    """Raised when an event file cannot be decoded."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f", line {line}"
            where += ": "
        super().__init__(where + message)


class Event(NamedTuple):
    x: int
    y: int
    t: float
    label: int = UNKNOWN


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-ordered events from a sensor of ``width`` x ``height`` pixels.

    Use :meth:`from_arrays` to build one; it copies, stable-sorts by ``t`` and
    freezes the arrays.
    """

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    label: np.ndarray
    width: int
    height: int

    @classmethod
    def from_arrays(cls, x, y, t, label=None, width=None, height=None) -> "EventStream":
        x = np.asarray(x, dtype=np.int64).reshape(-1)
        y = np.asarray(y, dtype=np.int64).reshape(-1)
        t = np.asarray(t, dtype=np.float64).reshape(-1)
        n = t.shape[0]
        if x.shape[0] != n or y.shape[0] != n:
            raise ValueError("x, y and t must have the same length")
        if label is None:
            label = np.full(n, UNKNOWN, dtype=np.int8)
        else:
            label = np.asarray(label, dtype=np.int8).reshape(-1)
            if label.shape[0] != n:
                raise ValueError("label must have the same length as t")
            if not np.isin(label, (REAL, NOISE, UNKNOWN)).all():
                raise ValueError("labels must be 1 (real), 0 (noise) or -1 (unknown)")
        if n and (not np.isfinite(t).all() or (t < 0).any()):
            raise ValueError("timestamps must be finite and non-negative")
        if n and ((x < 0).any() or (y < 0).any()):
            raise ValueError("pixel coordinates must be non-negative")
        if width is None:
            width = int(x.max()) + 1 if n else 0
        if height is None:
            height = int(y.max()) + 1 if n else 0
        if n and (x.max() >= width or y.max() >= height):
            raise ValueError(f"event outside the declared {width}x{height} sensor")

        order = np.argsort(t, kind="stable")
        return cls(_frozen(x[order]), _frozen(y[order]), _frozen(t[order]),
                   _frozen(label[order]), int(width), int(height))

    @classmethod
    def from_events(cls, events, width=None, height=None) -> "EventStream":
        events = [Event(*e) for e in events]
        return cls.from_arrays([e.x for e in events], [e.y for e in events],
                               [e.t for e in events], [e.label for e in events],
                               width=width, height=height)

    def __len__(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.x[i]), int(self.y[i]), float(self.t[i]), int(self.label[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
                and np.array_equal(self.t, other.t) and np.array_equal(self.label, other.label))

    @property
    def t_min(self) -> float:
        return float(self.t[0]) if len(self) else 0.0

    @property
    def t_max(self) -> float:
        return float(self.t[-1]) if len(self) else 0.0

    @property
    def has_labels(self) -> bool:
        return bool(len(self)) and not (self.label == UNKNOWN).any()

    def with_labels(self, label) -> "EventStream":
        """Same events, new label column (given in this stream's order)."""
        label = _frozen(np.asarray(label, dtype=np.int8).copy())
        if label.shape != self.t.shape:
            raise ValueError("label vector length does not match the stream")
        return EventStream(self.x, self.y, self.t, label, self.width, self.height)

    def coords(self) -> np.ndarray:
        """Raw N x 3 matrix of (x, y, t)."""
        return np.column_stack([self.x.astype(np.float64), self.y.astype(np.float64), self.t])


@dataclass(frozen=True)
class ScaledEvents:
    coords: np.ndarray
    beta: float

    def __len__(self) -> int:
        return self.coords.shape[0]


def scale_time(stream, beta: float) -> ScaledEvents:
    """Multiply the time axis by ``beta`` so it is commensurate with pixels.

    ``stream`` may be an :class:`EventStream` or an existing
    :class:`ScaledEvents` (in which case the third column is scaled again).
    """
    if not beta > 0 or not np.isfinite(beta):
        raise ValueError(f"beta must be a positive finite number, got {beta!r}")
    if isinstance(stream, ScaledEvents):
        coords = stream.coords.copy()
        total = stream.beta * beta
    else:
        coords = stream.coords()
        total = beta
    coords[:, 2] *= beta
    return ScaledEvents(_frozen(coords), float(total))


# -- file formats ----------------------------------------------------------

def _sniff_format(path: Path) -> str:
    with open(path, "rb") as fh:
        return "binary" if fh.read(4) == _MAGIC else "csv"


def load_events(path, format: Optional[str] = None, time_unit: str = "s",
                width: Optional[int] = None, height: Optional[int] = None) -> EventStream:
    """Read a CSV or ``EVD1`` binary event file.

    ``time_unit`` applies to CSV timestamps only (binary files store seconds).
    Sensor dimensions given here override whatever the file declares.
    """
    path = Path(path)
    if format is None:
        format = _sniff_format(path)
    if format == "csv":
        if time_unit not in TIME_UNITS:
            raise ValueError(f"unknown time unit {time_unit!r}; expected one of {sorted(TIME_UNITS)}")
        stream = _load_csv(path, TIME_UNITS[time_unit])
    elif format == "binary":
        stream = _load_binary(path)
    else:
        raise ValueError(f"unknown event format {format!r}")
    if width is not None or height is not None:
        stream = EventStream.from_arrays(stream.x, stream.y, stream.t, stream.label,
                                         width=width or stream.width,
                                         height=height or stream.height)
    return stream


def _load_csv(path: Path, unit_scale: float) -> EventStream:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EventFormatError(f"cannot read file ({exc.strerror})", path) from exc

    lines = text.split("\n")
    width = height = None
    lineno = 0
    # optional sensor comment written by save_events
    while lineno < len(lines) and lines[lineno].startswith("#"):
        for tok in lines[lineno][1:].split():
            key, _, val = tok.partition("=")
            if key in ("width", "height"):
                try:
                    if key == "width":
                        width = int(val)
                    else:
                        height = int(val)
                except ValueError:
                    raise EventFormatError(f"bad sensor size {tok!r}", path, lineno + 1)
        lineno += 1
    if lineno >= len(lines) or not lines[lineno].strip():
        raise EventFormatError("missing header line 'x,y,t[,label]'", path, lineno + 1)
    header = [h.strip() for h in lines[lineno].rstrip("\r").split(",")]
    if header not in (["x", "y", "t"], ["x", "y", "t", "label"]):
        raise EventFormatError(f"unexpected header {lines[lineno]!r}", path, lineno + 1)
    has_label = len(header) == 4
    ncol = len(header)

    xs, ys, ts, ls = [], [], [], []
    for i in range(lineno + 1, len(lines)):
        row = lines[i].rstrip("\r")
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != ncol:
            raise EventFormatError(f"expected {ncol} fields, got {len(parts)}", path, i + 1)
        try:
            x, y = int(parts[0]), int(parts[1])
            t = float(parts[2]) * unit_scale
            if has_label and parts[3].strip():
                lab = int(parts[3])
            else:
                lab = UNKNOWN
        except ValueError:
            raise EventFormatError(f"cannot parse row {row!r}", path, i + 1)
        if x < 0 or y < 0 or not np.isfinite(t) or t < 0:
            raise EventFormatError(f"invalid event {row!r}", path, i + 1)
        if has_label and lab not in (REAL, NOISE, UNKNOWN):
            raise EventFormatError(f"label must be 0 or 1, got {parts[3]!r}", path, i + 1)
        xs.append(x)
        ys.append(y)
        ts.append(t)
        ls.append(lab)
    try:
        return EventStream.from_arrays(xs, ys, ts, ls, width=width, height=height)
    except ValueError as exc:
        raise EventFormatError(str(exc), path) from exc


def _load_binary(path: Path) -> EventStream:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise EventFormatError(f"cannot read file ({exc.strerror})", path) from exc
    if len(raw) < _HEADER.size:
        raise EventFormatError("truncated header", path)
    magic, n, width, height = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise EventFormatError("bad magic bytes, expected EVD1", path)
    expected = _HEADER.size + n * _RECORD.itemsize
    if len(raw) != expected:
        raise EventFormatError(f"expected {expected} bytes for {n} events, found {len(raw)}", path)
    rec = np.frombuffer(raw, dtype=_RECORD, count=n, offset=_HEADER.size)
    lab = rec["label"].astype(np.int16)
    if not np.isin(lab, (0, 1, _BINARY_UNKNOWN)).all():
        raise EventFormatError("label bytes must be 0, 1 or 255", path)
    lab[lab == _BINARY_UNKNOWN] = UNKNOWN
    try:
        return EventStream.from_arrays(rec["x"], rec["y"], rec["t"], lab, width=width, height=height)
    except ValueError as exc:
        raise EventFormatError(str(exc), path) from exc


def save_events(stream: EventStream, path, format: str = "csv") -> None:
    """Write ``stream`` so that :func:`load_events` reproduces it exactly."""
    path = Path(path)
    if format == "csv":
        payload = _csv_bytes(stream)
    elif format == "binary":
        payload = _binary_bytes(stream)
    else:
        raise ValueError(f"unknown event format {format!r}")
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write events: {exc.strerror}", str(path)) from exc


def _csv_bytes(stream: EventStream) -> bytes:
    buf = io.StringIO(newline="")
    buf.write(f"# width={stream.width} height={stream.height}\n")
    # an empty label field marks an unknown label inside a labelled file
    labelled = bool((stream.label != UNKNOWN).any())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "t", "label"] if labelled else ["x", "y", "t"])
    # repr() of a float is the shortest string that round-trips exactly
    if labelled:
        for x, y, t, lab in zip(stream.x.tolist(), stream.y.tolist(), stream.t.tolist(),
                                stream.label.tolist()):
            w.writerow([x, y, repr(t), lab if lab != UNKNOWN else ""])
    else:
        for x, y, t in zip(stream.x.tolist(), stream.y.tolist(), stream.t.tolist()):
            w.writerow([x, y, repr(t)])
    return buf.getvalue().encode("utf-8")


def _binary_bytes(stream: EventStream) -> bytes:
    n = len(stream)
    if stream.width > 0xFFFF or stream.height > 0xFFFF:
        raise ValueError("binary format limits sensor dimensions to 65535")
    rec = np.empty(n, dtype=_RECORD)
    rec["x"] = stream.x
    rec["y"] = stream.y
    rec["t"] = stream.t
    lab = stream.label.astype(np.int16)
    lab[lab == UNKNOWN] = _BINARY_UNKNOWN
    rec["label"] = lab
    return _HEADER.pack(_MAGIC, n, stream.width, stream.height) + rec.tobytes()
