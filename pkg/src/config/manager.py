"""Run configuration and path memory.

Two files in config/:
  - state.json: active profile name and the last matrix path used
  - <name>.json (e.g. default.json): caps, schedules and seeds for a profile

Values resolve as: command-line flag > SPARSEBOUND_THREADS (threads only)
> profile file > built-in default.
"""

import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.core.utils import parse_fraction, parse_int_list


# Keys stored in state.json. Everything else lives in the profile file.
STATE_KEYS = {
    "active_config",
    "last_matrix_path",
}

THREADS_ENV = "SPARSEBOUND_THREADS"

CONFIG_DEFAULTS: Dict[str, Any] = {
    "cap_group": 1_000_000,
    "cap_minors": 200_000,
    "cap_box": 2_000_000,
    "cap_oracle_points": 10_000_000,
    "cap_oracle_columns": 12,
    "factor_ceiling": 10**9,
    "sample_size": 10_000,
    "epsilon": "1/100",
    "seed": 0,
    "t_schedule": [6, 12, 24, 48],
    "k_list": [],
    "threads": 0,
    "plan_cache_dir": ".cache/plans",
}


def _get_project_root() -> str:
    """Get project root (parent of src/)."""
    if getattr(sys, "frozen", False):
        return os.path.dirname(sys.executable)
    return str(Path(__file__).resolve().parents[2])


def _get_config_dir() -> str:
    return os.path.join(_get_project_root(), "config")


def _get_state_path() -> str:
    return os.path.join(_get_config_dir(), "state.json")


def get_available_configs() -> List[str]:
    """List available profile names (without .json), excluding state and underscore files."""
    config_dir = _get_config_dir()
    if not os.path.isdir(config_dir):
        return ["default"]
    configs = [
        f[:-5] for f in os.listdir(config_dir)
        if f.endswith(".json") and not f.startswith("_") and f != "state.json"
    ]
    return sorted(configs) if configs else ["default"]


def check_config_name(name: str) -> str:
    """Reject a --config name with no profile file; the built-in default always works."""
    available = get_available_configs()
    if name != "default" and name not in available:
        raise ValueError(f"unknown config profile {name!r} (available: {', '.join(available)})")
    return name


# ---------- State persistence ----------

_STATE_DEFAULTS: Dict[str, Any] = {
    "active_config": "default",
    "last_matrix_path": "",
}


def _load_state() -> Dict[str, Any]:
    path = _get_state_path()
    state = dict(_STATE_DEFAULTS)
    try:
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            state.update({k: v for k, v in data.items() if k in STATE_KEYS})
    except Exception as e:
        print(f"Error loading state: {e}", file=sys.stderr)
    return state


def _save_state(state: Dict[str, Any]) -> None:
    path = _get_state_path()
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(state, f, indent=2)
    except Exception as e:
        print(f"Error saving state: {e}", file=sys.stderr)


# ---------- Config manager ----------

class SparseBoundConfigManager:
    """Loads a profile and the session state."""

    def __init__(self, config_name: Optional[str] = None):
        self.state = _load_state()
        self.config_name = config_name or self.state.get("active_config", "default")
        self.config_file = os.path.join(_get_config_dir(), f"{self.config_name}.json")
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        try:
            if os.path.exists(self.config_file):
                with open(self.config_file, "r", encoding="utf-8") as f:
                    config = json.load(f)
                unknown = set(config) - set(CONFIG_DEFAULTS)
                if unknown:
                    print(f"Config warning: ignoring unknown keys {sorted(unknown)}", file=sys.stderr)
                return {k: v for k, v in config.items() if k in CONFIG_DEFAULTS}
        except Exception as e:
            print(f"Error loading config: {e}", file=sys.stderr)
        return {}

    def get(self, key: str, default: Any = None) -> Any:
        """Get value from state or profile, falling back to the built-in default."""
        if key in STATE_KEYS:
            return self.state.get(key, default)
        if default is None:
            default = CONFIG_DEFAULTS.get(key)
        return self.config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set a session value and persist it to state.json. Profiles are edited by hand."""
        if key not in STATE_KEYS:
            raise KeyError(f"{key!r} is a profile key; edit config/{self.config_name}.json instead")
        self.state[key] = value
        _save_state(self.state)

    def activate(self) -> None:
        """Remember this profile as the active one for later runs."""
        if self.state.get("active_config") != self.config_name:
            self.set("active_config", self.config_name)


# ---------- Resolved run configuration ----------

@dataclass
class RunConfig:
    command: str
    matrix_path: Optional[str] = None
    mode: str = "i"
    cap_group: int = CONFIG_DEFAULTS["cap_group"]
    cap_minors: int = CONFIG_DEFAULTS["cap_minors"]
    cap_box: int = CONFIG_DEFAULTS["cap_box"]
    cap_oracle_points: int = CONFIG_DEFAULTS["cap_oracle_points"]
    cap_oracle_columns: int = CONFIG_DEFAULTS["cap_oracle_columns"]
    factor_ceiling: int = CONFIG_DEFAULTS["factor_ceiling"]
    sample_size: int = CONFIG_DEFAULTS["sample_size"]
    epsilon: Fraction = Fraction(1, 100)
    seed: int = 0
    t_schedule: List[int] = field(default_factory=lambda: list(CONFIG_DEFAULTS["t_schedule"]))
    k_list: List[int] = field(default_factory=list)
    threads: Optional[int] = None
    plan_cache_dir: str = CONFIG_DEFAULTS["plan_cache_dir"]
    out: Optional[str] = None
    fmt: str = "csv"

    def validate(self) -> "RunConfig":
        caps = self.caps()
        bad = [k for k, v in caps.items() if not isinstance(v, int) or v <= 0]
        if bad:
            raise ValueError(f"caps must be positive integers: {bad}")
        if self.mode not in ("i", "ii"):
            raise ValueError(f"mode must be i or ii, got {self.mode!r}")
        if not self.t_schedule or any(t < 0 for t in self.t_schedule):
            raise ValueError(f"t schedule must be nonempty and nonnegative, got {self.t_schedule}")
        if any(b <= a for a, b in zip(self.t_schedule, self.t_schedule[1:])):
            raise ValueError(f"t schedule must be strictly increasing, got {self.t_schedule}")
        if any(k < 0 for k in self.k_list):
            raise ValueError(f"k list entries must be nonnegative, got {self.k_list}")
        if not 0 <= self.epsilon < 1:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.sample_size <= 0:
            raise ValueError(f"sample size must be positive, got {self.sample_size}")
        if self.seed is None:
            raise ValueError("a seed is required whenever sampling is possible")
        return self

    def caps(self) -> Dict[str, int]:
        return {
            "group": self.cap_group,
            "minors": self.cap_minors,
            "box": self.cap_box,
            "oracle": self.cap_oracle_points,
            "oracle_columns": self.cap_oracle_columns,
        }

    def as_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["epsilon"] = str(self.epsilon)
        return d


def _threads_from_env() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return value if value > 0 else None


def resolve_run_config(args, manager: SparseBoundConfigManager) -> RunConfig:
    """Merge parsed arguments over the profile into a validated RunConfig."""

    def pick(flag: str, key: str):
        value = getattr(args, flag, None)
        return manager.get(key) if value is None else value

    threads = getattr(args, "threads", None)
    if threads is None:
        threads = _threads_from_env()
    if threads is None:
        threads = int(manager.get("threads")) or None

    cfg = RunConfig(
        command=args.command,
        matrix_path=getattr(args, "matrix", None),
        mode=getattr(args, "mode", None) or "i",
        cap_group=int(pick("cap_group", "cap_group")),
        cap_minors=int(pick("cap_minors", "cap_minors")),
        cap_box=int(pick("cap_box", "cap_box")),
        cap_oracle_points=int(pick("cap_oracle", "cap_oracle_points")),
        cap_oracle_columns=int(manager.get("cap_oracle_columns")),
        factor_ceiling=int(manager.get("factor_ceiling")),
        sample_size=int(pick("sample_size", "sample_size")),
        epsilon=parse_fraction(pick("epsilon", "epsilon")),
        seed=int(pick("seed", "seed")),
        t_schedule=parse_int_list(pick("t_schedule", "t_schedule"), name="t schedule"),
        k_list=parse_int_list(pick("k_list", "k_list"), name="k list"),
        threads=threads,
        plan_cache_dir=str(manager.get("plan_cache_dir")),
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", None) or "csv",
    )
    return cfg.validate()
