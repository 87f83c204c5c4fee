"""Grids, fields, far-field continuation and run configuration.

Every other module works on the objects defined here.  A :class:`Grid` is a
uniform lattice ``x_j = -L + j*dx`` on ``[-L, L)``; a :class:`Field` holds
samples of a density ``n`` or of its logarithmic transform ``u`` on that
lattice.  Nonlocal operators need values beyond the lattice, which are
supplied by a far-field continuation object (:class:`AlgebraicTail` for
densities with power-law tails, :class:`LinearLogTail` for densities whose
Hopf-Cole transform is continued linearly).
"""
from __future__ import annotations

import configparser
import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gamma


class ConfigError(ValueError):
    """Raised for invalid user-facing configuration."""


class NumericalAbort(RuntimeError):
    """Raised when a time stepper detects a blow-up or a violated bound."""

    def __init__(self, message, time=None):
        if time is not None:
            message = f"{message} (t = {time:.6g})"
        super().__init__(message)
        self.time = time


# ---------------------------------------------------------------------------
# lattice and exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform 1-D lattice on ``[-L, L)``.

    Parameters
    ----------
    n_points : int
        Number of lattice points.
    half_width : float
        Domain half-width ``L``.
    periodic : bool
        Whether the lattice wraps around.
    """

    n_points: int
    half_width: float
    periodic: bool = True

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 16:
            raise ConfigError(f"n_points must be an integer >= 16, got {self.n_points}")
        if not self.half_width > 0:
            raise ConfigError(f"half_width must be positive, got {self.half_width}")
        if self.periodic and (self.n_points & (self.n_points - 1)):
            raise ConfigError(
                f"periodic grids need a power-of-two n_points, got {self.n_points}")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_width / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.dx * np.arange(self.n_points)

    @property
    def x_first(self) -> float:
        return -self.half_width

    @property
    def x_last(self) -> float:
        return -self.half_width + self.dx * (self.n_points - 1)

    def index_of(self, x: float) -> int:
        """Index of the lattice point closest to ``x``."""
        j = int(round((x + self.half_width) / self.dx))
        if not 0 <= j < self.n_points:
            raise ValueError(f"x = {x} lies outside the grid")
        return j


def make_grid(n_points: int, L: float, periodic: bool = True) -> Grid:
    """Build a :class:`Grid` with spacing ``2L/n_points``."""
    return Grid(int(n_points), float(L), bool(periodic))


@dataclass(frozen=True)
class FracOrder:
    """Order ``alpha`` of the fractional Laplacian, ``0 < alpha < 2``."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ConfigError(f"alpha must lie in (0, 2), got {self.alpha}")

    @property
    def symbol_constant(self) -> float:
        """Constant ``c`` with ``(-Delta)^{alpha/2} e^{i xi x} = c |xi|^alpha e^{i xi x}``.

        The operator is the bare singular integral against ``|h|^{-1-alpha}``,
        without the usual normalisation, so its Fourier symbol carries
        ``c = pi / (Gamma(1 + alpha) sin(pi alpha / 2))`` (``c = pi`` at
        ``alpha = 1``).
        """
        a = self.alpha
        return math.pi / (gamma(1.0 + a) * math.sin(0.5 * math.pi * a))


def as_frac_order(alpha) -> FracOrder:
    return alpha if isinstance(alpha, FracOrder) else FracOrder(float(alpha))


# ---------------------------------------------------------------------------
# far-field continuation
# ---------------------------------------------------------------------------

class FarField:
    """Continuation of lattice samples beyond ``[x_first, x_last]``."""

    def extend(self, values: np.ndarray, grid: Grid, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def tail_mass(self, values: np.ndarray, grid: Grid) -> float:
        """Integral of the continuation over both exterior half-lines."""
        raise NotImplementedError

    def jump_sum(self, values: np.ndarray, grid: Grid, shifts: np.ndarray,
                 weights: np.ndarray) -> np.ndarray:
        """``sum_j w_j [n(x_i + s_j) + n(x_i - s_j)]`` at every lattice point.

        Every shift must carry both targets past the grid ends.
        """
        x = grid.x
        out = np.zeros(grid.n_points)
        for lo in range(0, len(shifts), 256):
            s = shifts[None, lo:lo + 256]
            w = weights[lo:lo + 256]
            right = self.extend(values, grid, (x[:, None] + s).ravel()).reshape(len(x), -1)
            left = self.extend(values, grid, (x[:, None] - s).ravel()).reshape(len(x), -1)
            out += (right + left) @ w
        return out


@dataclass(frozen=True)
class AlgebraicTail(FarField):
    """Power-law continuation ``n(y) = n_edge (|x_edge| / |y|)**decay``.

    Used for densities with tails like ``|x|^{-1-alpha}``, so ``decay``
    is normally ``1 + alpha``.
    """

    decay: float

    def extend(self, values, grid, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        right = y > 0
        out[right] = values[-1] * (abs(grid.x_last) / y[right]) ** self.decay
        out[~right] = values[0] * (abs(grid.x_first) / -y[~right]) ** self.decay
        return out

    def tail_mass(self, values, grid):
        q = self.decay - 1.0
        if q <= 0:
            return math.inf
        return (values[-1] * abs(grid.x_last) + values[0] * abs(grid.x_first)) / q


@dataclass(frozen=True)
class LinearLogTail(FarField):
    """Continuation with ``eps * log n`` linear of slope ``-A`` outward.

    ``n(y) = n_edge exp(-A (|y| - |x_edge|) / eps)``.
    """

    A: float
    epsilon: float

    def extend(self, values, grid, y):
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        right = y > 0
        rate = self.A / self.epsilon
        out[right] = values[-1] * np.exp(-rate * (y[right] - grid.x_last))
        out[~right] = values[0] * np.exp(-rate * (grid.x_first - y[~right]))
        return out

    def tail_mass(self, values, grid):
        return (values[0] + values[-1]) * self.epsilon / self.A

    def jump_sum(self, values, grid, shifts, weights):
        # the exponential factorises; shifting by the smallest jump keeps
        # every exponent nonpositive
        rate = self.A / self.epsilon
        s0 = float(np.min(shifts))
        common = float(np.dot(weights, np.exp(-rate * (shifts - s0))))
        x = grid.x
        right = values[-1] * np.exp(-rate * (x + s0 - grid.x_last))
        left = values[0] * np.exp(-rate * (grid.x_first - x + s0))
        return common * (right + left)


def padded_values(values: np.ndarray, grid: Grid, far_field: Optional[FarField],
                  n_pad: int) -> np.ndarray:
    """Samples on the lattice extended by ``n_pad`` nodes on each side."""
    values = np.asarray(values, dtype=float)
    if n_pad == 0:
        return values.copy()
    if grid.periodic:
        return np.take(values, np.arange(-n_pad, grid.n_points + n_pad), mode="wrap")
    if far_field is None:
        raise ValueError("a non-periodic grid needs a far-field continuation")
    k = np.arange(1, n_pad + 1)
    left = far_field.extend(values, grid, grid.x_first - grid.dx * k[::-1])
    right = far_field.extend(values, grid, grid.x_last + grid.dx * k)
    return np.concatenate([left, values, right])


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass
class Field:
    """Samples on a :class:`Grid` at a given time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0
    mass: Optional[float] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} values, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise NumericalAbort("non-finite field values", self.time)
        if self.time < 0:
            raise ValueError("field time must be nonnegative")

    def with_values(self, values, time=None, mass=None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time, mass)


@dataclass
class MassState:
    """Total mass ``I`` of a density."""

    I: float

    def __post_init__(self):
        if not self.I > 0:
            raise NumericalAbort(f"mass must stay positive, got {self.I}")


def mass(field: Field, far_field: Optional[FarField] = None) -> float:
    """Integral of a field over the line.

    Periodic grids use the rectangle sum (exact for trigonometric
    polynomials), other grids the trapezoid rule; ``far_field`` adds the
    closed-form mass of the continuation.
    """
    v = field.values
    dx = field.grid.dx
    if field.grid.periodic:
        total = float(np.sum(v) * dx)
    else:
        total = float(np.trapezoid(v, dx=dx))
        if far_field is not None:
            total += far_field.tail_mass(v, field.grid)
    return total


def field_from_initial(grid: Grid, kind: str, params: dict) -> Field:
    """Sample an initial condition.

    Parameters
    ----------
    grid : Grid
    kind : str
        ``algebraic_tail_n``: ``C / (1 + |x/scale|^((1+alpha)/epsilon))``;
        ``log_tail_u``: ``-A log(1+|x|) + B``;
        ``log_tail_n``: ``exp((-A log(1+|x|) + B)/epsilon)``;
        ``bump``: ``amplitude * exp(-(x/width)^2)``;
        ``constant``: ``value``.
    params : dict
        Parameters of the chosen kind.  ``A`` is checked against ``alpha``
        whenever both are given.
    """
    x = grid.x
    p = dict(params)
    if kind == "algebraic_tail_n":
        C = float(p.get("C", 1.0))
        if C <= 0:
            raise ConfigError("C must be positive")
        alpha = as_frac_order(p["alpha"]).alpha
        eps = float(p.get("epsilon", 1.0))
        scale = float(p.get("scale", 1.0))
        values = C / (1.0 + np.abs(x / scale) ** ((1.0 + alpha) / eps))
    elif kind in ("log_tail_u", "log_tail_n"):
        A = float(p["A"])
        B = float(p.get("B", 0.0))
        if A <= 0:
            raise ConfigError("A must be positive")
        if "alpha" in p and A >= float(p["alpha"]):
            raise ConfigError(f"A = {A} must be smaller than alpha = {p['alpha']}")
        values = -A * np.log1p(np.abs(x)) + B
        if kind == "log_tail_n":
            values = np.exp(values / float(p["epsilon"]))
    elif kind == "bump":
        values = float(p.get("amplitude", 1.0)) * np.exp(-(x / float(p.get("width", 1.0))) ** 2)
    elif kind == "constant":
        values = np.full(grid.n_points, float(p.get("value", 1.0)))
    else:
        raise ConfigError(f"unknown initial kind {kind!r}")
    return Field(grid, values, 0.0)


# ---------------------------------------------------------------------------
# reactions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Reaction:
    """Growth term of the model.

    ``kind = "kpp"`` is the local logistic term ``n (1 - n)``.
    ``kind = "nonlocal"`` is ``n R(I)`` with ``R(I) = r (1 - I / I0)``, which
    is decreasing with ``R(I0) = 0`` and ``-R' = r / I0``.
    """

    kind: str = "kpp"
    r: float = 1.0
    I0: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("kpp", "nonlocal"):
            raise ConfigError(f"unknown reaction kind {self.kind!r}")
        if self.kind == "nonlocal" and not self.r > 0:
            raise ConfigError("r must be positive")

    @property
    def I_zero(self) -> float:
        return self.r if self.I0 is None else float(self.I0)

    @property
    def slope(self) -> float:
        """Lower bound ``C2`` on ``-R'``."""
        return self.r / self.I_zero

    def R(self, I):
        return self.r * (1.0 - np.asarray(I) / self.I_zero)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

PROBLEMS = ("kpp", "nonlocal", "sme_kpp", "sme_nonlocal", "frac_heat", "hj", "hj_obstacle")


@dataclass
class RunConfig:
    """Resolved settings of one run.

    The file form is an INI document with sections ``problem``, ``grid``,
    ``time``, ``reaction``, ``tails`` and ``output``; see the README for the
    key list.
    """

    problem: str = "kpp"
    alpha: float = 1.0
    epsilon: float = 1.0
    n_points: int = 1024
    half_width: float = 64.0
    periodic: bool = True
    dt: float = 0.01
    t_final: float = 1.0
    r: float = 1.0
    I0: Optional[float] = None
    A: float = 0.5
    B: float = 0.0
    C: float = 1.0
    initial: str = ""
    scale: float = 1.0
    stride: int = 10
    path: str = "out"

    _SCHEMA = {
        "problem": {"problem": str, "alpha": float, "epsilon": float},
        "grid": {"n_points": int, "half_width": float, "periodic": bool},
        "time": {"dt": float, "t_final": float},
        "reaction": {"r": float, "I0": float},
        "tails": {"A": float, "B": float, "C": float, "initial": str, "scale": float},
        "output": {"stride": int, "path": str},
    }

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.problem not in PROBLEMS:
            raise ConfigError(f"problem must be one of {PROBLEMS}, got {self.problem!r}")
        FracOrder(self.alpha)
        make_grid(self.n_points, self.half_width, self.periodic)
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not (self.dt > 0 and self.t_final > 0):
            raise ConfigError("dt and t_final must be positive")
        if self.problem.startswith(("sme", "hj")) and not 0 < self.A < self.alpha:
            raise ConfigError(f"tail parameter A = {self.A} must satisfy 0 < A < alpha")
        if self.stride < 1:
            raise ConfigError("output stride must be at least 1")

    @property
    def grid(self) -> Grid:
        return make_grid(self.n_points, self.half_width, self.periodic)

    @property
    def frac_order(self) -> FracOrder:
        return FracOrder(self.alpha)

    @property
    def reaction(self) -> Reaction:
        kind = "nonlocal" if self.problem in ("nonlocal", "sme_nonlocal") else "kpp"
        return Reaction(kind, self.r, self.I0)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, sections: dict, overrides=()) -> "RunConfig":
        """Build from ``{section: {key: text}}`` plus ``key=value`` overrides."""
        kwargs = {}
        where = {}
        for section, keys in cls._SCHEMA.items():
            for key in keys:
                where[key.lower()] = (section, key)
        for section, items in sections.items():
            if section not in cls._SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, text in items.items():
                kwargs_key = where.get(key.lower())
                if kwargs_key is None or kwargs_key[0] != section:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                kwargs[kwargs_key[1]] = _convert(cls._SCHEMA[section][kwargs_key[1]], text, key)
        for item in overrides:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, text = (s.strip() for s in item.split("=", 1))
            key = key.split(".")[-1]
            if key.lower() in where:
                section, name = where[key.lower()]
                kwargs[name] = _convert(cls._SCHEMA[section][name], text, key)
            else:
                raise ConfigError(f"unknown override key {key!r}")
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path, overrides=()) -> "RunConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        sections = {s: dict(parser.items(s)) for s in parser.sections()}
        return cls.from_mapping(sections, overrides)

    def to_ini(self) -> str:
        lines = []
        values = dataclasses.asdict(self)
        for section, keys in self._SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                v = values[key]
                if v is None:
                    continue
                lines.append(f"{key} = {repr(v) if isinstance(v, float) else v}")
            lines.append("")
        return "\n".join(lines)


def _convert(kind, text, key):
    text = str(text).strip()
    try:
        if kind is bool:
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"bad value {text!r} for {key}") from exc
