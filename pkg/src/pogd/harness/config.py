"""Experiment config parsing: `key = value` lines under [section] headers.

Full-line comments start with '#' or ';'. Every parse error is anchored to
the offending line. See the README for the documented key set.

A config runs in one of two modes:
  dataset mode   [dataset] + optional [model]: train a reference CNN
  testfn  mode   [testfn]: drive an optimizer (or PSO) over an analytic
                 benchmark function

parse_config and serialize_config round-trip losslessly: parsing fills in
every default, and serialization writes every field back out.
"""

from dataclasses import dataclass, field, replace

from ..core import RAND_MODES, PogdHyper
from ..baselines import AdagradHyper, AdamHyper, MomentumHyper, SgdHyper
from ..errors import ConfigError
from ..pso import PsoHyper
from ..testfns import FUNCTION_NAMES, get_function
from .schedule import Constant, InverseDecay, LrSchedule, StepDecay

MODEL_NAMES = ("mnist-cnn", "cifar-cnn")
DATASET_NAMES = ("mnist", "cifar10")
OPTIMIZER_NAMES = ("sgd", "momentum", "adagrad", "adam", "pogd", "pso")

# key -> (type tag, default); order here is the serialization order
_OPT_KEYS: dict[str, dict] = {
    "sgd": {"eta": ("float", 0.01)},
    "momentum": {"eta": ("float", 0.01), "p": ("float", 0.9)},
    "adagrad": {"eta": ("float", 0.01), "epsilon": ("float", 1e-8)},
    "adam": {
        "eta": ("float", 0.01),
        "beta1": ("float", 0.9),
        "beta2": ("float", 0.999),
        "epsilon": ("float", 1e-8),
        "bias_correction": ("bool", False),
    },
    "pogd": {
        "eta": ("float", 0.01),
        "omega": ("float", 0.9),
        "c1": ("float", 2.0),
        "c2": ("float", 1.0),
        "epsilon": ("float", 1e-8),
        "rand_mode": ("str", "per_step"),
        "alg_update": ("bool", False),
    },
    "pso": {
        "w": ("float", 0.7),
        "c1": ("float", 2.0),
        "c2": ("float", 2.0),
        "particles": ("int", 30),
    },
}


@dataclass
class DatasetConfig:
    name: str
    images: str | None = None
    labels: str | None = None
    val_images: str | None = None
    val_labels: str | None = None
    batches: tuple[str, ...] | None = None
    val_batch: str | None = None
    subset: int | None = None
    standardize: bool = False


@dataclass
class TestfnConfig:
    name: str
    dim: int
    x0: tuple[float, ...] | None
    iters: int


@dataclass
class OptimizerConfig:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    run_id: str
    seed: int
    optimizer: OptimizerConfig
    schedule: LrSchedule
    dataset: DatasetConfig | None = None
    model: str | None = None
    testfn: TestfnConfig | None = None
    epochs: int = 5
    batch_size: int = 64
    eval_every: int = 1
    out: str | None = None
    iter_log: bool = False
    timing: bool = False

    @property
    def mode(self) -> str:
        return "testfn" if self.testfn is not None else "dataset"


class _Section:
    """Raw parsed keys of one section with their line numbers."""

    def __init__(self, name: str, line: int):
        self.name = name
        self.line = line
        self.items: dict[str, tuple[str, int]] = {}
        self.consumed: set[str] = set()

    def get(self, key: str):
        self.consumed.add(key)
        return self.items.get(key)

    def unknown_keys(self):
        return [(k, line) for k, (_, line) in self.items.items() if k not in self.consumed]


def _split_sections(text: str) -> dict[str, _Section]:
    known = ("run", "dataset", "model", "testfn", "optimizer", "schedule")
    sections: dict[str, _Section] = {}
    current: _Section | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in known:
                raise ConfigError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno)
            current = _Section(name, lineno)
            sections[name] = current
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError("empty key", lineno)
        if key in current.items:
            raise ConfigError(f"duplicate key {key!r} in [{current.name}]", lineno)
        current.items[key] = (value, lineno)
    return sections


def _convert(kind: str, value: str, key: str, line: int):
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if value not in ("true", "false"):
                raise ValueError
            return value == "true"
        return value
    except ValueError:
        raise ConfigError(f"{key} expects a {kind}, got {value!r}", line) from None


def _take(section: _Section | None, key: str, kind: str, default=None, required=False):
    entry = section.get(key) if section else None
    if entry is None:
        if required:
            line = section.line if section else None
            name = section.name if section else "?"
            raise ConfigError(f"[{name}] is missing required key {key!r}", line)
        return default
    value, line = entry
    return _convert(kind, value, key, line)


def _finish_section(section: _Section | None):
    if section is None:
        return
    for key, line in section.unknown_keys():
        raise ConfigError(f"unknown key {key!r} in [{section.name}]", line)


def _parse_optimizer(section: _Section | None) -> OptimizerConfig:
    if section is None:
        raise ConfigError("config needs an [optimizer] section")
    entry = section.get("name")
    if entry is None:
        raise ConfigError("[optimizer] is missing required key 'name'", section.line)
    name, line = entry
    if name not in OPTIMIZER_NAMES:
        raise ConfigError(
            f"unknown optimizer {name!r}; know {OPTIMIZER_NAMES}", line
        )
    params = {}
    for key, (kind, default) in _OPT_KEYS[name].items():
        params[key] = _take(section, key, kind, default)
    if name == "pso" and params["particles"] < 1:
        raise ConfigError(f"particles must be >= 1, got {params['particles']}",
                          section.line)
    _finish_section(section)
    _validate_hyper(name, params, section.line)
    return OptimizerConfig(name=name, params=params)


def _validate_hyper(name: str, params: dict, line: int):
    """Build the hyper object once at parse time so range errors are anchored."""
    try:
        build_hyper(OptimizerConfig(name, dict(params)))
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None


def build_hyper(opt: OptimizerConfig):
    """Construct the optimizer's hyperparameter object from an OptimizerConfig."""
    p = opt.params
    if opt.name == "sgd":
        return SgdHyper(eta=p["eta"])
    if opt.name == "momentum":
        return MomentumHyper(eta=p["eta"], p=p["p"])
    if opt.name == "adagrad":
        return AdagradHyper(eta=p["eta"], epsilon=p["epsilon"])
    if opt.name == "adam":
        return AdamHyper(
            eta=p["eta"], beta1=p["beta1"], beta2=p["beta2"],
            epsilon=p["epsilon"], bias_correction=p["bias_correction"],
        )
    if opt.name == "pogd":
        return PogdHyper(
            eta=p["eta"], omega=p["omega"], c1=p["c1"], c2=p["c2"],
            epsilon=p["epsilon"], rand_mode=p["rand_mode"],
        )
    if opt.name == "pso":
        return PsoHyper(w=p["w"], c1=p["c1"], c2=p["c2"])
    raise ValueError(f"unknown optimizer {opt.name!r}")


def _parse_dataset(section: _Section) -> DatasetConfig:
    entry = section.get("name")
    if entry is None:
        raise ConfigError("[dataset] is missing required key 'name'", section.line)
    name, line = entry
    if name not in DATASET_NAMES:
        raise ConfigError(f"unknown dataset {name!r}; know {DATASET_NAMES}", line)
    subset = _take(section, "subset", "int")
    if subset is not None and subset < 1:
        raise ConfigError(f"subset must be >= 1, got {subset}", section.line)
    if name == "mnist":
        cfg = DatasetConfig(
            name=name,
            images=_take(section, "images", "str", required=True),
            labels=_take(section, "labels", "str", required=True),
            val_images=_take(section, "val_images", "str", required=True),
            val_labels=_take(section, "val_labels", "str", required=True),
            subset=subset,
            standardize=_take(section, "standardize", "bool", False),
        )
    else:
        batches = _take(section, "batches", "str", required=True)
        cfg = DatasetConfig(
            name=name,
            batches=tuple(s.strip() for s in batches.split(",") if s.strip()),
            val_batch=_take(section, "val_batch", "str", required=True),
            subset=subset,
            standardize=_take(section, "standardize", "bool", True),
        )
    _finish_section(section)
    return cfg


def _parse_testfn(section: _Section, optimizer_name: str) -> TestfnConfig:
    entry = section.get("name")
    if entry is None:
        raise ConfigError("[testfn] is missing required key 'name'", section.line)
    name, line = entry
    if name not in FUNCTION_NAMES:
        raise ConfigError(f"unknown test function {name!r}; know {FUNCTION_NAMES}", line)
    dim = _take(section, "dim", "int", 1 if name == "double-well" else 2)
    try:
        get_function(name, dim)
    except ValueError as exc:
        raise ConfigError(str(exc), section.line) from None
    x0_raw = section.get("x0")
    x0 = None
    if x0_raw is not None:
        value, x0_line = x0_raw
        try:
            x0 = tuple(float(s) for s in value.split(","))
        except ValueError:
            raise ConfigError(f"x0 expects comma-separated floats, got {value!r}", x0_line) from None
        if len(x0) != dim:
            raise ConfigError(f"x0 has {len(x0)} components for dim {dim}", x0_line)
    elif optimizer_name != "pso":
        raise ConfigError(
            "[testfn] needs x0 for gradient-based optimizers", section.line
        )
    iters = _take(section, "iters", "int", 1000)
    if iters < 1:
        raise ConfigError(f"iters must be >= 1, got {iters}", section.line)
    _finish_section(section)
    return TestfnConfig(name=name, dim=dim, x0=x0, iters=iters)


def _parse_schedule(section: _Section | None, default_eta0: float) -> LrSchedule:
    kind = _take(section, "kind", "str", "constant")
    if kind not in ("constant", "step", "inverse"):
        line = section.items["kind"][1] if section and "kind" in section.items else None
        raise ConfigError(f"unknown schedule kind {kind!r}", line)
    eta0 = _take(section, "eta0", "float", default_eta0)
    try:
        if kind == "constant":
            sched = Constant(eta0=eta0)
        elif kind == "step":
            sched = StepDecay(
                eta0=eta0,
                factor=_take(section, "factor", "float", 0.5),
                every=_take(section, "every", "int", 2),
            )
        else:
            sched = InverseDecay(eta0=eta0, k=_take(section, "k", "float", 0.1))
    except ValueError as exc:
        raise ConfigError(str(exc), section.line if section else None) from None
    _finish_section(section)
    return sched


def parse_config(text: str) -> ExperimentConfig:
    sections = _split_sections(text)

    run = sections.get("run")
    if run is None:
        raise ConfigError("config needs a [run] section")
    run_id = _take(run, "id", "str", required=True)
    if not run_id or any(ch in run_id for ch in ", \t"):
        raise ConfigError(f"run id {run_id!r} must be nonempty without commas/spaces",
                          run.items["id"][1])
    seed = _take(run, "seed", "int", 0)
    epochs = _take(run, "epochs", "int", 5)
    if epochs < 0:
        raise ConfigError(f"epochs must be >= 0, got {epochs}", run.line)
    batch_size = _take(run, "batch_size", "int", 64)
    if batch_size < 1:
        raise ConfigError(f"batch_size must be >= 1, got {batch_size}", run.line)
    eval_every = _take(run, "eval_every", "int", 1)
    if eval_every < 1:
        raise ConfigError(f"eval_every must be >= 1, got {eval_every}", run.line)
    out = _take(run, "out", "str")
    iter_log = _take(run, "iter_log", "bool", False)
    timing = _take(run, "timing", "bool", False)
    _finish_section(run)

    optimizer = _parse_optimizer(sections.get("optimizer"))

    has_dataset = "dataset" in sections
    has_testfn = "testfn" in sections
    if has_dataset == has_testfn:
        raise ConfigError("config needs exactly one of [dataset] or [testfn]")

    dataset = model = testfn = None
    if has_dataset:
        if optimizer.name == "pso":
            raise ConfigError("pso runs only in testfn mode",
                              sections["optimizer"].line)
        dataset = _parse_dataset(sections["dataset"])
        model_section = sections.get("model")
        default_model = "mnist-cnn" if dataset.name == "mnist" else "cifar-cnn"
        model = _take(model_section, "name", "str", default_model)
        if model not in MODEL_NAMES:
            line = model_section.items["name"][1] if model_section else None
            raise ConfigError(f"unknown model {model!r}; know {MODEL_NAMES}", line)
        _finish_section(model_section)
    else:
        if "model" in sections:
            raise ConfigError("[model] is only valid in dataset mode",
                              sections["model"].line)
        testfn = _parse_testfn(sections["testfn"], optimizer.name)

    schedule = _parse_schedule(
        sections.get("schedule"), optimizer.params.get("eta", 0.01)
    )

    return ExperimentConfig(
        run_id=run_id, seed=seed, optimizer=optimizer, schedule=schedule,
        dataset=dataset, model=model, testfn=testfn, epochs=epochs,
        batch_size=batch_size, eval_every=eval_every, out=out,
        iter_log=iter_log, timing=timing,
    )


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse_config(serialize_config(c)) == c."""
    lines = ["[run]"]
    lines.append(f"id = {cfg.run_id}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"epochs = {cfg.epochs}")
    lines.append(f"batch_size = {cfg.batch_size}")
    lines.append(f"eval_every = {cfg.eval_every}")
    lines.append(f"iter_log = {_fmt(cfg.iter_log)}")
    lines.append(f"timing = {_fmt(cfg.timing)}")
    if cfg.out is not None:
        lines.append(f"out = {cfg.out}")

    if cfg.dataset is not None:
        d = cfg.dataset
        lines += ["", "[dataset]", f"name = {d.name}"]
        if d.name == "mnist":
            lines.append(f"images = {d.images}")
            lines.append(f"labels = {d.labels}")
            lines.append(f"val_images = {d.val_images}")
            lines.append(f"val_labels = {d.val_labels}")
        else:
            lines.append(f"batches = {', '.join(d.batches)}")
            lines.append(f"val_batch = {d.val_batch}")
        if d.subset is not None:
            lines.append(f"subset = {d.subset}")
        lines.append(f"standardize = {_fmt(d.standardize)}")
        lines += ["", "[model]", f"name = {cfg.model}"]

    if cfg.testfn is not None:
        t = cfg.testfn
        lines += ["", "[testfn]", f"name = {t.name}", f"dim = {t.dim}"]
        if t.x0 is not None:
            lines.append(f"x0 = {', '.join(_fmt(v) for v in t.x0)}")
        lines.append(f"iters = {t.iters}")

    lines += ["", "[optimizer]", f"name = {cfg.optimizer.name}"]
    for key in _OPT_KEYS[cfg.optimizer.name]:
        lines.append(f"{key} = {_fmt(cfg.optimizer.params[key])}")

    s = cfg.schedule
    lines += ["", "[schedule]"]
    if isinstance(s, Constant):
        lines += ["kind = constant", f"eta0 = {_fmt(s.eta0)}"]
    elif isinstance(s, StepDecay):
        lines += ["kind = step", f"eta0 = {_fmt(s.eta0)}",
                  f"factor = {_fmt(s.factor)}", f"every = {s.every}"]
    else:
        lines += ["kind = inverse", f"eta0 = {_fmt(s.eta0)}", f"k = {_fmt(s.k)}"]
    return "\n".join(lines) + "\n"


def override(cfg: ExperimentConfig, seed: int | None = None, out: str | None = None,
             iter_log: bool | None = None) -> ExperimentConfig:
    """Apply CLI-level overrides without touching the rest of the config."""
    updates = {}
    if seed is not None:
        updates["seed"] = seed
    if out is not None:
        updates["out"] = out
    if iter_log is not None:
        updates["iter_log"] = iter_log
    return replace(cfg, **updates) if updates else cfg
