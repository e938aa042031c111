"""Per-round run records and their CSV form (``t,y,yhat,loss,a_t,cum_loss``)."""
import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError

TRACE_HEADER = ["t", "y", "yhat", "loss", "a_t", "cum_loss"]


@dataclass
class RunTrace:
    name: str
    algorithm: str
    y: np.ndarray
    yhat: np.ndarray
    a: np.ndarray | None = None
    b_reg: float | None = None
    equality_weights: bool = False
    runtime_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def T(self):
        return len(self.y)

    @property
    def loss(self):
        return (self.y - self.yhat) ** 2

    @property
    def cum_loss(self):
        return np.cumsum(self.loss)

    @property
    def L_T(self):
        return float(np.sum(self.loss))

    def write_csv(self, path):
        loss = self.loss
        cum = self.cum_loss
        with open(path, "w", newline="") as fh:
            fh.write(",".join(TRACE_HEADER) + "\n")
            for t in range(self.T):
                a_t = "" if self.a is None else repr(float(self.a[t]))
                row = [
                    str(t + 1),
                    repr(float(self.y[t])),
                    repr(float(self.yhat[t])),
                    repr(float(loss[t])),
                    a_t,
                    repr(float(cum[t])),
                ]
                fh.write(",".join(row) + "\n")


def read_trace_csv(path, name=None, b_reg=None):
    """Load a trace; the WEMM weight column makes it certifiable again."""
    ys, yh, a_vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != TRACE_HEADER:
            raise ParseError(f"bad trace header {header!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(TRACE_HEADER):
                raise ParseError(f"expected {len(TRACE_HEADER)} fields", line=lineno)
            try:
                ys.append(float(row[1]))
                yh.append(float(row[2]))
                a_vals.append(float(row[4]) if row[4] != "" else None)
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from None
    has_a = bool(a_vals) and all(v is not None for v in a_vals)
    if not has_a and any(v is not None for v in a_vals):
        raise ParseError("a_t column is partially filled")
    return RunTrace(
        name=name or str(path),
        algorithm="wemm" if has_a else "unknown",
        y=np.array(ys),
        yhat=np.array(yh),
        a=np.array(a_vals, dtype=np.float64) if has_a else None,
        b_reg=b_reg,
        equality_weights=has_a,
    )
