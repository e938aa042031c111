"""Deterministic synthetic streams.

Randomness comes from :class:`SplitMix64`, a tiny portable 64-bit generator,
so the streams can be reproduced outside numpy. Reference output for seed
1234567 (first five ``next_u64`` values)::

    6457827717110365317, 3203168211198807973, 9817491932198370423,
    4593380528125082431, 16408922859458223821

Draw order per stream: comparator (``d`` normals), then per round the
input (``d`` normals for the direction, one uniform for the radius unless
on the sphere), then the label noise / drift step.
"""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidSpec
from .stream import Stream

MASK64 = (1 << 64) - 1
KINDS = ("realizable", "gaussian_noise", "drift", "unit_sphere_edge")


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self):
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self):
        # Box-Muller, cosine branch only; 1 - u keeps the log argument in (0, 1]
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def normals(self, n):
        return np.array([self.normal() for _ in range(n)], dtype=np.float64)

    def unit_vector(self, d):
        while True:
            v = self.normals(d)
            nrm = math.sqrt(float(v @ v))
            if nrm > 0.0:
                return v / nrm


@dataclass
class GeneratorSpec:
    kind: str
    d: int
    T: int
    seed: int = 0
    input_scale: float = 1.0
    sigma: float = 0.0
    step: float = 0.0
    anchor_pull: float = 0.0

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown generator kind {self.kind!r}")
        if int(self.d) < 1 or int(self.T) < 0:
            raise InvalidSpec("need d >= 1 and T >= 0")
        if not 0.0 < self.input_scale <= 1.0:
            raise InvalidSpec("input_scale must lie in (0, 1]")
        if self.sigma < 0.0 or not math.isfinite(self.sigma):
            raise InvalidSpec("sigma must be >= 0")
        if self.step < 0.0 or not math.isfinite(self.step):
            raise InvalidSpec("step must be >= 0")
        if not 0.0 <= self.anchor_pull <= 1.0:
            raise InvalidSpec("anchor_pull must lie in [0, 1]")
        if not 0 <= int(self.seed) <= MASK64:
            raise InvalidSpec("seed must be an unsigned 64-bit integer")
        return self

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        extra = set(data) - set(known)
        if extra:
            raise InvalidSpec(f"unknown generator fields {sorted(extra)}")
        try:
            spec = cls(**known)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None
        return spec.validate()

    def to_dict(self):
        return asdict(self)


@dataclass
class GroundTruth:
    """The comparator that generated the labels."""

    u_bar: np.ndarray
    u_seq: np.ndarray | None = None

    @property
    def u_true(self):
        return self.u_bar

    @property
    def V_m(self):
        if self.u_seq is None:
            return 0.0
        return float(np.sum((self.u_seq - self.u_bar) ** 2))

    def to_dict(self):
        out = {"u_bar": self.u_bar.tolist()}
        if self.u_seq is not None:
            out["u_seq"] = self.u_seq.tolist()
            out["V_m"] = self.V_m
        return out

    @classmethod
    def from_dict(cls, data):
        u_seq = data.get("u_seq")
        return cls(
            np.asarray(data["u_bar"], dtype=np.float64),
            None if u_seq is None else np.asarray(u_seq, dtype=np.float64),
        )


def _draw_input(rng, d, scale, on_sphere):
    direction = rng.unit_vector(d)
    radius = scale if on_sphere else scale * rng.uniform() ** (1.0 / d)
    x = direction * radius
    # both the dot-product and the row-reduction norm must respect the scale
    while max(math.sqrt(float(x @ x)), float(np.linalg.norm(x[None, :], axis=1)[0])) > scale:
        x *= 1.0 - 2.0**-52
    return x


def generate(spec):
    """Generate ``(stream, ground_truth)`` for ``spec``; equal specs give identical streams."""
    spec.validate()
    d, T = int(spec.d), int(spec.T)
    rng = SplitMix64(spec.seed)
    u_bar = rng.normals(d)
    X = np.empty((T, d))
    y = np.empty(T)
    drifting = spec.kind == "drift"
    u_seq = np.empty((T, d)) if drifting else None
    u = u_bar.copy()
    for t in range(T):
        x = _draw_input(rng, d, spec.input_scale, spec.kind == "unit_sphere_edge")
        X[t] = x
        if drifting:
            u = (1.0 - spec.anchor_pull) * u + spec.anchor_pull * u_bar
            if spec.step > 0.0:
                u = u + spec.step * rng.unit_vector(d)
            u_seq[t] = u
            y[t] = float(u @ x)
        else:
            y[t] = float(u_bar @ x)
            if spec.kind != "realizable" and spec.sigma > 0.0:
                y[t] += spec.sigma * rng.normal()
    stream = Stream(X, y, generator=spec.kind, seed=int(spec.seed))
    return stream, GroundTruth(u_bar, u_seq)


def write_ground_truth(truth, path):
    with open(path, "w") as fh:
        json.dump(truth.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_ground_truth(path):
    with open(path) as fh:
        return GroundTruth.from_dict(json.load(fh))
