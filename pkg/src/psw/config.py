"""Run configuration for the command line, parsed from one JSON document.

Everything is validated before any state matrix is built.  Example::

    {
      "state": {"name": "squeezed", "r": 0.3, "cutoff": 60},
      "grid": {"half_width": 3, "n": 121},
      "s_list": [0, -1],
      "format": "csv"
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import states
from .clicksim import MultiplexConfig
from .errors import ConfigError
from .phasespace import PhaseGrid, S_MAX

# state name -> {parameter: required}
STATE_PARAMS = {
    "vacuum": {},
    "fock": {"n": True},
    "coherent": {"beta": True},
    "squeezed": {"r": True, "phi": False},
    "lossy_photon": {"q": True},
    "thermal": {"nbar": True},
    "spats": {"nbar": True},
    "cat": {"omega": True},
}
COMMON_STATE_KEYS = {"name", "cutoff", "loss", "representation", "tail_tol"}
GAUSSIAN_STATES = {"vacuum", "coherent", "squeezed", "thermal"}
TOP_KEYS = {"state", "grid", "alpha", "s_list", "k_list", "k_vec", "search", "multiplex",
            "shots", "seed", "format", "out", "shot_log", "threads"}


def _num(value, name: str, lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    if v < lo or (lo_open and v == lo) or v > hi or (hi_open and v == hi):
        raise ConfigError(f"{name} = {v} is out of range")
    return v


def _int(value, name: str, lo: int = 0, hi: int = 2**64 - 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if not lo <= value <= hi:
        raise ConfigError(f"{name} = {value} is out of range")
    return value


def _complex(value, name: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(_num(value[0], name), _num(value[1], name))
    return complex(_num(value, name), 0.0)


def _unknown(keys, allowed, where: str) -> None:
    extra = set(keys) - set(allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(extra)}")


@dataclass(frozen=True)
class StateConfig:
    name: str
    params: dict
    cutoff: int | None = None
    loss: float | None = None
    representation: str = "fock"
    tail_tol: float = states.DEFAULT_TAIL_TOL

    @classmethod
    def parse(cls, raw: Any) -> "StateConfig":
        if not isinstance(raw, dict) or "name" not in raw:
            raise ConfigError("state must be an object with a 'name'")
        name = raw["name"]
        if name not in STATE_PARAMS:
            raise ConfigError(f"unknown state {name!r}; choose from {sorted(STATE_PARAMS)}")
        spec = STATE_PARAMS[name]
        _unknown(raw, COMMON_STATE_KEYS | set(spec), f"state {name!r}")
        for key, required in spec.items():
            if required and key not in raw:
                raise ConfigError(f"state {name!r} needs parameter {key!r}")
        params = {}
        if "n" in raw:
            params["n"] = _int(raw["n"], "n", 0, 10_000)
        if "beta" in raw:
            params["beta"] = _complex(raw["beta"], "beta")
        if "omega" in raw:
            params["omega"] = _complex(raw["omega"], "omega")
        if "r" in raw:
            params["r"] = _num(raw["r"], "r", 0.0, 3.0, hi_open=True)
        if "phi" in raw:
            params["phi"] = _num(raw["phi"], "phi")
        if "q" in raw:
            params["q"] = _num(raw["q"], "q", 0.0, 1.0)
        if "nbar" in raw:
            params["nbar"] = _num(raw["nbar"], "nbar", 0.0, 1e4)
        cutoff = raw.get("cutoff")
        if cutoff is not None and cutoff != "auto":
            cutoff = _int(cutoff, "cutoff", 0, 4000)
        loss = raw.get("loss")
        if loss is not None:
            loss = _num(loss, "loss", 0.0, 1.0)
        rep = raw.get("representation", "fock")
        if rep not in ("fock", "gaussian"):
            raise ConfigError("representation must be 'fock' or 'gaussian'")
        if rep == "gaussian" and name not in GAUSSIAN_STATES:
            raise ConfigError(f"state {name!r} has no Gaussian representation")
        tol = _num(raw.get("tail_tol", states.DEFAULT_TAIL_TOL), "tail_tol", 0.0, 1e-3, lo_open=True)
        return cls(name, params, None if cutoff == "auto" else cutoff, loss, rep, tol)

    def build(self):
        """Construct the state (the only step that allocates matrices)."""
        p = self.params
        if self.representation == "gaussian":
            spec = {
                "vacuum": lambda: states.gaussian_vacuum(),
                "coherent": lambda: states.gaussian_coherent(p["beta"]),
                "squeezed": lambda: states.gaussian_squeezed(p["r"], p.get("phi", 0.0)),
                "thermal": lambda: states.gaussian_thermal(p["nbar"]),
            }[self.name]()
            return spec if self.loss is None else states.gaussian_loss(spec, self.loss)

        tol = self.tail_tol
        makers = {
            "vacuum": lambda cutoff: states.vacuum(cutoff),
            "fock": lambda cutoff: states.fock(p["n"], max(cutoff, p["n"])),
            "coherent": lambda cutoff: states.make_coherent(p["beta"], cutoff, tol),
            "squeezed": lambda cutoff: states.make_squeezed_vacuum(p["r"], p.get("phi", 0.0), cutoff, tol),
            "lossy_photon": lambda cutoff: states.make_lossy_single_photon(p["q"]).padded(max(cutoff, 1)),
            "thermal": lambda cutoff: states.make_thermal(p["nbar"], cutoff, tol),
            "spats": lambda cutoff: states.make_spats(p["nbar"], cutoff, tol),
            "cat": lambda cutoff: states.make_even_cat(p["omega"], cutoff, tol),
        }
        make = makers[self.name]
        if self.cutoff is None:
            state = states.auto_cutoff(lambda cutoff: make(cutoff))
        else:
            state = make(self.cutoff)
        return state if self.loss is None else states.apply_loss(state, self.loss)


def _grid(raw: Any) -> PhaseGrid:
    if not isinstance(raw, dict):
        raise ConfigError("grid must be an object")
    if "half_width" in raw:
        _unknown(raw, {"half_width", "n", "center"}, "grid")
        hw = _num(raw["half_width"], "grid.half_width", 0.0, 50.0)
        n = _int(raw.get("n", 81), "grid.n", 1, 2001)
        center = _complex(raw.get("center", 0.0), "grid.center")
        return PhaseGrid.square(hw, n, center)
    keys = ("re_min", "re_max", "im_min", "im_max", "n_re", "n_im")
    _unknown(raw, keys, "grid")
    missing = [k for k in keys if k not in raw]
    if missing:
        raise ConfigError(f"grid is missing {missing}")
    b = [_num(raw[k], f"grid.{k}", -50.0, 50.0) for k in keys[:4]]
    n = [_int(raw[k], f"grid.{k}", 1, 2001) for k in keys[4:]]
    try:
        return PhaseGrid(*b, *n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class RunConfig:
    state: StateConfig | None = None
    grid: PhaseGrid | None = None
    alpha: complex = 0j
    s_list: tuple[float, ...] = (0.0,)
    k_list: tuple[float, ...] = (0.5,)
    k_vec: tuple[float, ...] | None = None
    search: bool = False
    multiplex: MultiplexConfig | None = None
    shots: int = 100_000
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    shot_log: bool = False
    threads: int | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def parse(cls, raw: Any) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        _unknown(raw, TOP_KEYS, "configuration")
        kw: dict[str, Any] = {"raw": raw}
        if "state" in raw:
            kw["state"] = StateConfig.parse(raw["state"])
        if "grid" in raw:
            kw["grid"] = _grid(raw["grid"])
        if "alpha" in raw:
            kw["alpha"] = _complex(raw["alpha"], "alpha")
        if "s_list" in raw:
            s_list = raw["s_list"]
            if not isinstance(s_list, list) or not s_list:
                raise ConfigError("s_list must be a nonempty list")
            kw["s_list"] = tuple(_num(s, "s", -1e6, S_MAX) for s in s_list)
        if "k_list" in raw:
            k_list = raw["k_list"]
            if not isinstance(k_list, list) or not k_list:
                raise ConfigError("k_list must be a nonempty list")
            kw["k_list"] = tuple(_num(k, "k", 0.0, 1.0, True, True) for k in k_list)
        if "k_vec" in raw:
            k_vec = raw["k_vec"]
            if not isinstance(k_vec, list) or len(k_vec) < 2:
                raise ConfigError("k_vec must list at least two fractions")
            kw["k_vec"] = tuple(_num(k, "k_vec entry", 0.0, 1.0, True, True) for k in k_vec)
            if abs(math.fsum(kw["k_vec"]) - 1) > 1e-12:
                raise ConfigError("k_vec must sum to 1")
        if "search" in raw:
            if not isinstance(raw["search"], bool):
                raise ConfigError("search must be true or false")
            kw["search"] = raw["search"]
        if "multiplex" in raw:
            m = raw["multiplex"]
            if not isinstance(m, dict):
                raise ConfigError("multiplex must be an object")
            _unknown(m, {"eta", "splits", "channels"}, "multiplex")
            eta = _num(m.get("eta", 1.0), "multiplex.eta", 0.0, 1.0, lo_open=True)
            if "splits" in m:
                splits = m["splits"]
                if not isinstance(splits, list):
                    raise ConfigError("multiplex.splits must be a list")
                splits = tuple(_num(u, "split", 0.0, 1.0, True, True) for u in splits)
            else:
                ch = _int(m.get("channels", 2), "multiplex.channels", 2, 64)
                splits = (1.0 / ch,) * ch
            try:
                kw["multiplex"] = MultiplexConfig(eta, splits)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        if "shots" in raw:
            kw["shots"] = _int(raw["shots"], "shots", 1, 10**10)
        if "seed" in raw:
            kw["seed"] = _int(raw["seed"], "seed")
        if "format" in raw:
            if raw["format"] not in ("csv", "json"):
                raise ConfigError("format must be 'csv' or 'json'")
            kw["format"] = raw["format"]
        if "out" in raw:
            if not isinstance(raw["out"], str):
                raise ConfigError("out must be a path string")
            kw["out"] = raw["out"]
        if "shot_log" in raw:
            if not isinstance(raw["shot_log"], bool):
                raise ConfigError("shot_log must be true or false")
            kw["shot_log"] = raw["shot_log"]
        if "threads" in raw:
            kw["threads"] = _int(raw["threads"], "threads", 1, 1024)
        return cls(**kw)

    def require(self, *names: str) -> None:
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ConfigError(f"configuration needs {missing}")


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return RunConfig.parse(raw)
