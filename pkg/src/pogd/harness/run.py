"""Seeded training loops for dataset experiments and test-function runs.

All randomness flows from config.seed through named substreams ("init",
"shuffle", "dropout", "pogd", "subset", "pso"), so one consumer drawing
more or less never perturbs the others. Two invocations of the same config
produce byte-identical CSV output (enable `timing` to trade that away for
real wall-clock numbers).

A non-finite loss or gradient stops the run: the partial metrics plus one
failure record (train_loss = nan) are written out and RunAborted is raised.
"""

import os
import time
from dataclasses import replace

import numpy as np

from .. import baselines, core, data
from .. import pso as swarm_opt
from ..errors import DimensionError, NonFiniteError, RunAborted
from ..nn import init_params, reference_model
from ..rng import substream
from ..testfns import get_function
from .config import ExperimentConfig, OptimizerConfig, build_hyper
from .metrics import MetricsRecord, write_metrics


class OptimizerDriver:
    """Stateful adapter giving every optimizer the same step(theta, grad) call."""

    def __init__(self, opt: OptimizerConfig, dim: int, rng=None):
        self.name = opt.name
        self.hyper = build_hyper(opt)
        self.alg_update = bool(opt.params.get("alg_update", False))
        self.rng = rng
        if self.name == "momentum":
            self.state = baselines.momentum_init(dim)
        elif self.name == "adagrad":
            self.state = baselines.adagrad_init(dim)
        elif self.name == "adam":
            self.state = baselines.adam_init(dim)
        elif self.name == "pogd":
            self.state = core.pogd_init(dim)
        elif self.name == "sgd":
            self.state = None
        else:
            raise ValueError(f"{self.name} cannot drive a gradient loop")

    def set_eta(self, eta: float):
        self.hyper = replace(self.hyper, eta=eta)

    def step(self, theta, grad):
        if self.name == "sgd":
            return baselines.sgd_step(theta, grad, self.hyper)
        if self.name == "momentum":
            self.state, theta = baselines.momentum_step(self.state, theta, grad, self.hyper)
        elif self.name == "adagrad":
            self.state, theta = baselines.adagrad_step(self.state, theta, grad, self.hyper)
        elif self.name == "adam":
            self.state, theta = baselines.adam_step(self.state, theta, grad, self.hyper)
        else:
            step_fn = core.pogd_step_algvariant if self.alg_update else core.pogd_step
            self.state, theta = step_fn(self.state, theta, grad, self.hyper, self.rng)
        return theta


def _load_datasets(cfg: ExperimentConfig):
    d = cfg.dataset
    if d.name == "mnist":
        train = data.load_mnist_idx(d.images, d.labels)
        val = data.load_mnist_idx(d.val_images, d.val_labels)
    else:
        train = data.load_cifar10(list(d.batches))
        val = data.load_cifar10([d.val_batch])
    if d.subset is not None:
        train = data.subset(train, d.subset, substream(cfg.seed, "subset"))
    if d.standardize:
        train = data.standardize(train)
        val = data.standardize(val, train.channel_mean, train.channel_std)
    return train, val


def _write_out(cfg: ExperimentConfig, records):
    if cfg.out is None:
        return
    parent = os.path.dirname(cfg.out)
    if parent:
        os.makedirs(parent, exist_ok=True)
    write_metrics(records, cfg.out)


def _failure_record(cfg, epoch, step, eta):
    return MetricsRecord(
        run_id=cfg.run_id, epoch=epoch, step=step, train_loss=float("nan"),
        train_acc=None, val_loss=None, val_acc=None, effective_lr=eta, wall_ms=0.0,
    )


def run_experiment(config: ExperimentConfig) -> list[MetricsRecord]:
    """Train the configured model; one MetricsRecord per epoch (plus optional
    per-iteration rows). Writes config.out if set, and returns the records."""
    if config.testfn is not None:
        raise ValueError("testfn configs run via run_testfn")

    train, val = _load_datasets(config)
    model = reference_model(config.model)
    if train.images.shape[1:] != model.input_shape:
        raise DimensionError(
            f"dataset shape {train.images.shape[1:]} does not fit model "
            f"{config.model} input {model.input_shape}"
        )
    params = init_params(model, substream(config.seed, "init"))
    driver = OptimizerDriver(config.optimizer, model.n_params,
                             substream(config.seed, "pogd"))
    batches = data.BatchIterator(train, config.batch_size,
                                 substream(config.seed, "shuffle"))
    dropout_rng = substream(config.seed, "dropout")

    records: list[MetricsRecord] = []
    global_step = 0
    for epoch in range(1, config.epochs + 1):
        eta = config.schedule.eta_at(epoch - 1)
        driver.set_eta(eta)
        started = time.perf_counter()
        loss_sum = acc_sum = 0.0
        seen = 0
        for xb, yb in batches.epoch():
            try:
                loss, acc, grad = model.forward_backward(
                    params, xb, yb, dropout_rng, train=True
                )
                new_flat = driver.step(params.flat, grad)
            except NonFiniteError as exc:
                records.append(_failure_record(config, epoch, global_step, eta))
                _write_out(config, records)
                raise RunAborted(
                    f"run {config.run_id}: non-finite loss at epoch {epoch}, "
                    f"step {global_step}: {exc}",
                    records,
                ) from exc
            params.flat[:] = new_flat
            n = xb.shape[0]
            loss_sum += loss * n
            acc_sum += acc * n
            seen += n
            if config.iter_log:
                records.append(MetricsRecord(
                    run_id=config.run_id, epoch=epoch, step=global_step,
                    train_loss=loss, train_acc=acc, val_loss=None, val_acc=None,
                    effective_lr=eta, wall_ms=0.0,
                ))
            global_step += 1

        val_loss = val_acc = None
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            val_loss, val_acc = model.evaluate(params, val.images, val.labels)
        wall = (time.perf_counter() - started) * 1000.0 if config.timing else 0.0
        records.append(MetricsRecord(
            run_id=config.run_id, epoch=epoch, step=None,
            train_loss=loss_sum / seen, train_acc=acc_sum / seen,
            val_loss=val_loss, val_acc=val_acc, effective_lr=eta, wall_ms=wall,
        ))

    _write_out(config, records)
    return records


def run_testfn(config: ExperimentConfig) -> list[MetricsRecord]:
    """Drive an optimizer over an analytic benchmark, logging f(x) per
    iteration in the loss column (record 0 holds the starting value).

    The schedule is evaluated per iteration. PSO ignores learning rates, so
    its rows carry effective_lr = 0.
    """
    if config.testfn is None:
        raise ValueError("dataset configs run via run_experiment")
    t = config.testfn
    fn = get_function(t.name, t.dim)

    def rec(i, value, eta):
        return MetricsRecord(
            run_id=config.run_id, epoch=i, step=None, train_loss=value,
            train_acc=None, val_loss=None, val_acc=None,
            effective_lr=eta, wall_ms=0.0,
        )

    records: list[MetricsRecord] = []
    if config.optimizer.name == "pso":
        rng = substream(config.seed, "pso")
        swarm = swarm_opt.pso_init(
            fn.value, t.dim, config.optimizer.params["particles"], fn.domain,
            rng, build_hyper(config.optimizer),
        )
        records.append(rec(0, swarm.gbest_f, 0.0))
        for i in range(1, t.iters + 1):
            swarm = swarm_opt.pso_step(swarm, fn.value, rng)
            records.append(rec(i, swarm.gbest_f, 0.0))
    else:
        theta = np.asarray(t.x0, dtype=np.float64)
        driver = OptimizerDriver(config.optimizer, t.dim, substream(config.seed, "pogd"))
        records.append(rec(0, fn.value(theta), config.schedule.eta_at(0)))
        for i in range(1, t.iters + 1):
            eta = config.schedule.eta_at(i - 1)
            driver.set_eta(eta)
            try:
                grad = fn.gradient(theta)
                theta = driver.step(theta, grad)
            except NonFiniteError as exc:
                records.append(_failure_record(config, i, None, eta))
                _write_out(config, records)
                raise RunAborted(
                    f"run {config.run_id}: non-finite gradient at iteration {i}: {exc}",
                    records,
                ) from exc
            value = fn.value(theta)
            if not np.isfinite(value):
                records.append(_failure_record(config, i, None, eta))
                _write_out(config, records)
                raise RunAborted(
                    f"run {config.run_id}: objective diverged to {value} at iteration {i}",
                    records,
                )
            records.append(rec(i, value, eta))

    _write_out(config, records)
    return records
