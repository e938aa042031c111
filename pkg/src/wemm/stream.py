"""The example stream shared by every learner, plus its CSV form.

CSV layout: header ``t,y,x_0,...,x_{d-1}``, one row per round, ``t`` starting
at 1. Floats are written with ``repr`` so a write/read cycle is bit-exact.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyStream, InvalidParameter, NormViolation, ParseError

NORM_SLACK = 1e-12


@dataclass
class Stream:
    X: np.ndarray
    y: np.ndarray
    generator: str = "file"
    seed: int | None = None
    scale_factor: float = 1.0

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise InvalidParameter(f"X must be 2-d, got shape {self.X.shape}")
        if self.y.shape != (self.X.shape[0],):
            raise InvalidParameter("y length does not match X rows")
        if self.X.shape[1] < 1:
            raise InvalidParameter("dimension must be >= 1")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise InvalidParameter("stream has non-finite values")

    @property
    def T(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def norms(self):
        return np.linalg.norm(self.X, axis=1)

    @property
    def max_norm(self):
        return float(self.norms.max()) if self.T else 0.0

    def __len__(self):
        return self.T

    def prefix(self, t):
        return Stream(self.X[:t], self.y[:t], self.generator, self.seed, self.scale_factor)

    def require_nonempty(self):
        if self.T == 0:
            raise EmptyStream("stream has no examples")

    def metadata(self):
        return {
            "generator": self.generator,
            "seed": self.seed,
            "d": self.d,
            "T": self.T,
            "max_norm": self.max_norm,
            "scale_factor": self.scale_factor,
        }


def _fmt(v):
    return repr(float(v))


def write_stream_csv(stream, path):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["t", "y"] + [f"x_{i}" for i in range(stream.d)]) + "\n")
        for t in range(stream.T):
            row = [str(t + 1), _fmt(stream.y[t])] + [_fmt(v) for v in stream.X[t]]
            fh.write(",".join(row) + "\n")


def read_stream_csv(path):
    """Parse a stream CSV without applying any norm policy."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        d = len(header) - 2
        expected = ["t", "y"] + [f"x_{i}" for i in range(d)]
        if d < 1 or [h.strip() for h in header] != expected:
            raise ParseError(f"bad header {header!r}", line=1)
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 2:
                raise ParseError(f"expected {d + 2} fields, got {len(row)}", line=lineno)
            try:
                vals = [float(v) for v in row[1:]]
                int(row[0])
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", line=lineno)
            ys.append(vals[0])
            xs.append(vals[1:])
    X = np.array(xs, dtype=np.float64).reshape(len(xs), d)
    return Stream(X, np.array(ys, dtype=np.float64), generator="file")


def apply_norm_policy(stream, policy="reject"):
    """Enforce ``max ||x|| <= 1`` by rejecting or by scaling the whole stream."""
    m = stream.max_norm
    if m <= 1.0 + NORM_SLACK:
        return stream
    if policy == "reject":
        raise NormViolation(f"max input norm {m!r} exceeds 1")
    if policy == "prescale":
        factor = 1.0 / m
        X = stream.X * factor
        # rounding can leave a row a hair above 1
        over = np.linalg.norm(X, axis=1) > 1.0
        X[over] = X[over] / np.linalg.norm(X[over], axis=1)[:, None] * (1.0 - 1e-15)
        return Stream(X, stream.y.copy(), stream.generator, stream.seed, stream.scale_factor * factor)
    raise InvalidParameter(f"unknown norm policy {policy!r}")


def load_stream(path, norm_policy="reject"):
    return apply_norm_policy(read_stream_csv(path), norm_policy)
