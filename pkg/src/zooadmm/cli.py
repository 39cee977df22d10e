"""Experiment harness: configure instances, run seeded sweeps, write CSV traces and summaries.

Usage::

    zooadmm run --config experiments.ini --out results/ [--seeds N] [--baseline] [--iterates]
    zooadmm validate --config experiments.ini
    zooadmm blend|sensors|cox|synthetic [--config FILE] [--set key=value ...]

Config files are INI: one section per experiment, the section name becomes
the experiment name. A comma separated value sweeps that key; the sweep is
the Cartesian product of all such keys, values in ascending order.

Exit codes: 0 success, 2 invalid configuration, 3 solver or reference failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import itertools
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .applications import (
    blending_problem, blending_stream, center_problem, cox_problem, cox_stream, gene_selection,
    initial_point, linear_problem, load_cox_csv, make_blending_instance, make_center_stream,
    make_cox_dataset, make_linear_stream, make_sensor_instance, make_validation_draws,
    random_constraints, rmse, round_selection, sensor_mse, sensor_problem,
)
from .core import (
    Distribution, InvalidConfigError, InvalidInputError, ReferenceFailureError, Schedule,
    ScheduleKind, SolverError, ZooAdmmError, build_config, check_constraint_support, eta_at,
    lambda_max_gram, minimal_alpha,
)
from .metrics import DEFAULT_CHECKPOINTS, loglog_slope, offline_optimum, regret_report, seed_mean
from .solver import Minibatch, run_oadmm, run_zoo_admm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

APPLICATIONS = ("blend", "sensors", "cox", "synthetic")
TRACE_COLUMNS = ("t", "loss", "residual", "update_error", "queries", "eta", "beta")
THREADS_ENV = "ZOO_ADMM_THREADS"
METRIC_NAMES = {"blend": "rmse", "sensors": "mse", "cox": "selected", "synthetic": "x_error"}


class ConfigError(InvalidConfigError):
    """Invalid configuration, already formatted with its file location."""


# ---------------------------------------------------------------------------
# value parsers


def _int(lo):
    def parse(s):
        try:
            v = int(s)
        except ValueError:
            raise ValueError(f"expected an integer, got {s!r}") from None
        if v < lo:
            raise ValueError(f"must be >= {lo}, got {v}")
        return v
    return parse


def _float(lo=None, strict=False):
    def parse(s):
        try:
            v = float(s)
        except ValueError:
            raise ValueError(f"expected a number, got {s!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"must be finite, got {s!r}")
        if lo is not None and (v < lo or (strict and v == lo)):
            raise ValueError(f"must be {'>' if strict else '>='} {lo:g}, got {s}")
        return v
    return parse


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return parse


def _auto_or(inner):
    return lambda s: "auto" if s == "auto" else inner(s)


def _bool(s):
    low = s.lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"expected yes/no, got {s!r}")


def _int_list(s):
    try:
        vals = [int(v) for v in s.replace(",", " ").split()]
    except ValueError:
        raise ValueError(f"expected integers, got {s!r}") from None
    if not vals or min(vals) < 1:
        raise ValueError("checkpoints must be positive integers")
    return tuple(sorted(set(vals)))


@dataclass(frozen=True)
class Key:
    parse: object
    default: object
    sweep: bool = True


COMMON_KEYS = {
    "application": Key(_choice(*APPLICATIONS), None, sweep=False),
    "T": Key(_int(1), 1000, sweep=False),
    "seeds": Key(_int(1), "auto", sweep=False),
    "data_seed": Key(_int(0), 0),
    "rho": Key(_float(0.0, strict=True), 10.0),
    "schedule": Key(_choice("general", "strongly_convex", "minibatch"), "general"),
    "C1": Key(_auto_or(_float(0.0, strict=True)), "auto"),
    "C2": Key(_float(0.0), 1.0),
    "sigma": Key(_float(0.0), 0.0),
    "q1": Key(_int(1), 30),
    "q2": Key(_int(1), 1),
    "distribution": Key(_choice("sphere", "gaussian"), "sphere"),
    "alpha": Key(_auto_or(_float(0.0, strict=True)), "auto"),
    "baseline": Key(_bool, False, sweep=False),
    "regret": Key(_auto_or(_bool), "auto", sweep=False),
    "checkpoints": Key(_int_list, DEFAULT_CHECKPOINTS, sweep=False),
}

APP_KEYS = {
    "blend": {
        "m": Key(_int(1), 20), "n": Key(_int(1), 1000),
        "noise": Key(_float(0.0), 0.1), "sparsity": Key(_float(0.0, strict=True), 1.0),
    },
    "sensors": {
        "m": Key(_int(1), 20), "n": Key(_int(1), 3), "m0": Key(_int(1), 5),
        "snapshots": Key(_int(1), 10), "draws": Key(_int(1), 20),
        "validation_seed": Key(_int(0), 10_000),
    },
    "cox": {
        "n": Key(_int(2), 100), "m": Key(_int(1), 50), "n_nonzero": Key(_int(0), 10),
        "censoring": Key(_float(0.0), 0.3), "gamma": Key(_float(0.0, strict=True), 0.1),
        "data": Key(str, "", sweep=False),
    },
    "synthetic": {
        "problem": Key(_choice("lasso", "center"), "lasso"),
        "m": Key(_int(1), 20), "n": Key(_auto_or(_int(1)), "auto"),
        "noise": Key(_float(0.0), 0.5), "n_nonzero": Key(_auto_or(_int(0)), "auto"),
        "gamma": Key(_float(0.0), 0.1), "box": Key(_auto_or(_float(0.0, strict=True)), "auto"),
        "constraints": Key(_choice("consensus", "random"), "consensus"),
    },
}

ALIASES = {"q": "q1"}
# keys that only change the solver, not the instance or its offline optimum
SOLVER_ONLY = {"rho", "schedule", "C1", "C2", "sigma", "q1", "q2", "distribution", "alpha"}
# keys that do not affect the first-order baseline
ZO_ONLY = {"q1", "q2", "C2", "distribution"}
SWEEP_ORDER = ("q1", "q2")


# ---------------------------------------------------------------------------
# config files


@dataclass
class Experiment:
    name: str
    app: str
    values: dict  # key -> list of parsed values (length > 1 for sweeps)
    locations: dict = field(default_factory=dict)  # key -> "file:line"
    where: str = ""

    def location(self, key=None):
        return self.locations.get(key, self.where)

    def variants(self):
        swept = [k for k, v in self.values.items() if len(v) > 1]
        swept.sort(key=lambda k: (SWEEP_ORDER.index(k) if k in SWEEP_ORDER else len(SWEEP_ORDER), k))
        base = {k: v[0] for k, v in self.values.items()}
        for combo in itertools.product(*(self.values[k] for k in swept)):
            params = dict(base)
            params.update(zip(swept, combo))
            yield Variant(self, params, tuple(zip(swept, combo)))


@dataclass
class Variant:
    exp: Experiment
    params: dict
    swept: tuple  # ((key, value), ...)

    def label_for(self, method="zoo"):
        # the first-order baseline ignores the zeroth-order keys, so they stay out of its label
        parts = [f"{k}-{_fmt(v)}" for k, v in self.swept if method == "zoo" or k not in ZO_ONLY]
        return re.sub(r"[^A-Za-z0-9.\-_]", "_", "_".join(parts))

    @property
    def label(self):
        return self.label_for("zoo")

    def stem(self, method="zoo"):
        parts = [self.exp.name]
        if method != "zoo":
            parts.append(method)
        if self.label_for(method):
            parts.append(self.label_for(method))
        return "_".join(parts)

    def data_key(self):
        return tuple((k, v) for k, v in sorted(self.params.items()) if k not in SOLVER_ONLY)

    def baseline_key(self):
        return tuple((k, v) for k, v in sorted(self.params.items()) if k not in ZO_ONLY)


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


def _line_map(text):
    """(section, key) -> line number, found by a plain scan of the file."""
    lines = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"([^=:\s]+)\s*[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1)), no)
    return lines


def _sort_values(values):
    if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        return sorted(set(values))
    out = []
    for v in values:
        if v not in out:
            out.append(v)
    return out


def _parse_section(name, app, raw, where, overrides=()):
    """raw: key -> (text, location)."""
    if not re.fullmatch(r"[A-Za-z0-9_.\-]+", name):
        raise ConfigError(f"{where}: experiment name {name!r} must use letters, digits, '.', '-', '_'")
    keys = dict(COMMON_KEYS)
    keys.update(APP_KEYS[app])
    entries = dict(raw)
    for key, text in overrides:
        entries[key] = (text, "--set")
    values, locations = {}, {}
    for key, (text, loc) in entries.items():
        key = ALIASES.get(key, key)
        if key not in keys:
            raise ConfigError(f"{loc}: [{name}] unknown key {key!r} for application {app!r}")
        spec = keys[key]
        parts = [p.strip() for p in text.split(",")] if spec.sweep else [text.strip()]
        if any(p == "" for p in parts):
            raise ConfigError(f"{loc}: [{name}] {key}: empty value")
        try:
            parsed = [spec.parse(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"{loc}: [{name}] {key}: {exc}") from None
        values[key] = _sort_values(parsed)
        locations[key] = loc
    for key, spec in keys.items():
        if key not in values:
            values[key] = [spec.default]
    values["application"] = [app]
    return Experiment(name, app, values, locations, where)


def load_config(path, overrides=(), only_app=None):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    lines = _line_map(text)
    exps = []
    for name in parser.sections():
        sec = parser[name]
        where = f"{path}:{lines.get((name, None), 0)}"
        app = sec.get("application", name if name in APPLICATIONS else None)
        if app not in APPLICATIONS:
            loc = f"{path}:{lines.get((name, 'application'), lines.get((name, None), 0))}"
            raise ConfigError(
                f"{loc}: [{name}] application: expected one of {', '.join(APPLICATIONS)}, got {app!r}"
            )
        if only_app is not None and app != only_app:
            continue
        raw = {}
        for key in sec:
            line = lines.get((name, key), lines.get(("DEFAULT", key), 0))
            raw[key] = (sec[key], f"{path}:{line}")
        raw.pop("application", None)
        exps.append(_parse_section(name, app, raw, where, overrides))
    if not exps:
        what = f"no [{only_app}] experiments" if only_app else "no experiment sections"
        raise ConfigError(f"{path}: {what}")
    return exps


def _parse_overrides(items):
    out = []
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set: expected key=value, got {item!r}")
        out.append((key.strip(), value.strip()))
    return out


# ---------------------------------------------------------------------------
# instances


@dataclass
class Instance:
    spec: object
    stream: list
    x1: np.ndarray
    y1: np.ndarray
    metric_name: str
    metric: object  # (state) -> float
    regret: bool


def build_instance(p, app, T):
    seed = p["data_seed"]
    if app == "blend":
        inst = make_blending_instance(seed, p["n"], p["m"], p["noise"], p["sparsity"])
        spec = blending_problem(inst)
        return Instance(spec, blending_stream(inst, T, seed=seed), None, None, "rmse",
                        lambda st: rmse(inst.C_test, inst.r_test, st.x_feas), True)
    if app == "sensors":
        inst = make_sensor_instance(seed, p["m"], p["n"], T, p["m0"])
        draws = make_validation_draws(inst, p["draws"], p["validation_seed"], p["snapshots"])
        x1 = initial_point(inst)
        return Instance(sensor_problem(inst), list(range(T)), x1, x1.copy(), "mse",
                        lambda st: sensor_mse(round_selection(st.x_bar, inst.m0), draws), False)
    if app == "cox":
        if p["data"]:
            ds = load_cox_csv(p["data"])
        else:
            ds = make_cox_dataset(seed, p["n"], p["m"], p["n_nonzero"], p["censoring"])
        return Instance(cox_problem(ds, p["gamma"]), cox_stream(ds, T, seed), None, None,
                        "selected", lambda st: float(len(gene_selection(st.y))), True)
    # synthetic
    n = T if p["n"] == "auto" else p["n"]
    stream = [k % n for k in range(T)]
    if p["problem"] == "center":
        data = make_center_stream(seed, p["m"], n, p["noise"])
        target = data.center
        spec = center_problem(data)
    else:
        nnz = None if p["n_nonzero"] == "auto" else p["n_nonzero"]
        data = make_linear_stream(seed, p["m"], n, p["noise"], nnz)
        target = data.x_true
        cons = random_constraints(seed, p["m"]) if p["constraints"] == "random" else None
        box = None if p["box"] == "auto" else p["box"]
        spec = linear_problem(data, p["gamma"], box=box, constraints=cons)
    return Instance(spec, stream, None, None, "x_error",
                    lambda st: float(np.linalg.norm(st.x_feas - target)), True)


def build_schedule(p, m):
    kind = {"general": ScheduleKind.GENERAL, "strongly_convex": ScheduleKind.STRONGLY_CONVEX,
            "minibatch": ScheduleKind.MINIBATCH}[p["schedule"]]
    C1 = p["C1"]
    if C1 == "auto":
        # eta_t = 1/sqrt(m t) for the general schedule
        C1 = math.sqrt(m) if kind is ScheduleKind.GENERAL else 1.0
    return Schedule(kind, m=m, C1=C1, C2=p["C2"], sigma=p["sigma"], q1=p["q1"], q2=p["q2"])


def prepare(variant, inst, seed=0, store_iterates=False):
    p = variant.params
    sched = build_schedule(p, inst.spec.m)
    check_constraint_support(inst.spec.constraints, inst.spec.regularizer)
    alpha = None if p["alpha"] == "auto" else p["alpha"]
    return build_config(
        inst.spec, sched, rho=p["rho"], T=p["T"], x1=inst.x1, y1=inst.y1, seed=seed,
        distribution=Distribution(p["distribution"]), alpha=alpha, store_iterates=store_iterates,
    )


def _located(variant, exc, key=None):
    exp = variant.exp
    tag = f"[{exp.name}]" + (f" ({variant.label})" if variant.label else "")
    return ConfigError(f"{exp.location(key)}: {tag} {exc}")


def _guess_key(msg):
    if "alpha" in msg:
        return "alpha"
    if "sigma" in msg:
        return "sigma"
    if "constraint" in msg:
        return "constraints"
    return None


# ---------------------------------------------------------------------------
# output


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_trace(path, trace):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in trace.rows():
            w.writerow([_num(v) for v in row])


def write_iterates(path, trace):
    m, d = trace.xs.shape[1], trace.ys.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{k + 1}" for k in range(m)] + [f"y{k + 1}" for k in range(d)])
        for k in range(trace.xs.shape[0]):
            w.writerow([str(k + 1)] + [_num(v) for v in trace.xs[k]] + [_num(v) for v in trace.ys[k]])


def read_trace(path):
    """Parse a trace CSV back into a dict of numpy columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {}
    for j, name in enumerate(header):
        conv = int if name in ("t", "queries") else float
        cols[name] = np.array([conv(r[j]) for r in body])
    return cols


# ---------------------------------------------------------------------------
# running


@dataclass
class Outcome:
    trace: object
    state: object
    metric: float
    regret: dict  # checkpoint -> regret, plus "total"


def _worker_count(n_tasks):
    cap = os.environ.get(THREADS_ENV)
    if cap is None:
        limit = os.cpu_count() or 1
    else:
        try:
            limit = int(cap)
            if limit < 1:
                raise ValueError
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}: expected a positive integer, got {cap!r}") from None
    return max(1, min(limit, n_tasks))


def _seed_count(exp, seeds_flag):
    if seeds_flag is not None:
        return seeds_flag
    n = exp.values["seeds"][0]
    if n == "auto":
        return 50 if exp.app == "sensors" else 10
    return n


def _checkpoints(variant):
    T = variant.params["T"]
    cps = [t for t in variant.params["checkpoints"] if t <= T]
    return sorted(set(cps) | {T})


def _regret_enabled(variant):
    flag = variant.params["regret"]
    return (variant.exp.app != "sensors") if flag == "auto" else flag


def run_experiments(exps, out, seeds_flag=None, iterates=False, baseline_flag=False, log=print):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)

    instances, optima, plans = {}, {}, []
    for exp in exps:
        n_seeds = _seed_count(exp, seeds_flag)
        baseline = baseline_flag or exp.values["baseline"][0]
        for var in exp.variants():
            T = var.params["T"]
            key = var.data_key()
            try:
                if key not in instances:
                    instances[key] = build_instance(var.params, exp.app, T)
                inst = instances[key]
                prepare(var, inst)
            except (InvalidConfigError, InvalidInputError) as exc:
                raise _located(var, exc, _guess_key(str(exc))) from None
            if _regret_enabled(var) and key not in optima:
                optima[key] = {}
                try:
                    for t in _checkpoints(var):
                        optima[key][t] = offline_optimum(inst.spec, inst.stream[:t])
                except (ReferenceFailureError, np.linalg.LinAlgError) as exc:
                    raise ReferenceFailureError(f"[{exp.name}] offline reference failed: {exc}") from None
            plans.append((var, n_seeds, baseline))

    tasks = []
    seen_baseline = set()
    for var, n_seeds, baseline in plans:
        for seed in range(n_seeds):
            tasks.append((var, seed, "zoo"))
        bkey = (var.exp.name, var.baseline_key())
        if baseline and bkey not in seen_baseline:
            seen_baseline.add(bkey)
            for seed in range(n_seeds):
                tasks.append((var, seed, "oadmm"))

    def execute(task):
        var, seed, method = task
        inst = instances[var.data_key()]
        cfg, sched = prepare(var, inst, seed=seed, store_iterates=iterates)
        if method == "zoo":
            batch = Minibatch(var.params["q1"], var.params["q2"])
            state, trace = run_zoo_admm(inst.spec, cfg, sched, inst.stream, batch)
        else:
            state, trace = run_oadmm(inst.spec, cfg, sched, inst.stream)
        regret = {}
        if _regret_enabled(var):
            rep = regret_report(trace, inst.spec, inst.stream, _checkpoints(var), optima[var.data_key()])
            regret = dict(rep.checkpoints)
            regret["total"] = rep.average_regret
        return Outcome(trace, state, float(inst.metric(state)), regret)

    with ThreadPoolExecutor(max_workers=_worker_count(len(tasks))) as pool:
        results = list(pool.map(execute, tasks))

    # single writer, deterministic order
    written = 0
    groups = {}
    for (var, seed, method), res in zip(tasks, results):
        stem = var.stem(method)
        write_trace(out / f"trace_{stem}_{seed}.csv", res.trace)
        if iterates:
            write_iterates(out / f"iterates_{stem}_{seed}.csv", res.trace)
        written += 1
        groups.setdefault((var.exp.name, stem), (var, method, []))[2].append(res)

    by_exp = {}
    for (name, _), (var, method, outs) in groups.items():
        by_exp.setdefault(name, []).append((var, method, outs))
    for name, rows in by_exp.items():
        path = out / f"summary_{name}.csv"
        write_summary(path, rows)
        log(f"{path}")
    log(f"wrote {written} trace files to {out}")
    return EXIT_OK


def write_summary(path, rows):
    cps = sorted({t for var, _, _ in rows for t in _checkpoints(var)})
    header = ["variant", "method", "q1", "q2", "T", "seeds", "regret_mean", "regret_se", "slope"]
    header += [f"regret_t{t}" for t in cps]
    header += ["metric", "metric_mean", "metric_se", "queries"]
    # zeroth-order rows keep sweep order (q ascending first), baselines follow
    rows = [r for r in rows if r[1] == "zoo"] + [r for r in rows if r[1] != "zoo"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for var, method, outs in rows:
            nan = float("nan")
            if outs[0].regret:
                total = seed_mean([o.regret["total"] for o in outs])
                means = {t: float(np.mean([o.regret[t] for o in outs])) for t in _checkpoints(var)}
                try:
                    slope = loglog_slope(sorted((t, r) for t, r in means.items()))
                except ZooAdmmError:
                    slope = nan
            else:
                total, means, slope = (nan, nan), {}, nan
            metric = seed_mean([o.metric for o in outs])
            zo = method == "zoo"
            w.writerow([
                var.label_for(method) or "-", method,
                var.params["q1"] if zo else "", var.params["q2"] if zo else "",
                var.params["T"], len(outs), _num(total[0]), _num(total[1]), _num(slope),
            ] + [_num(means.get(t, nan)) for t in cps] + [
                METRIC_NAMES[var.exp.app], _num(metric[0]), _num(metric[1]), _num(int(outs[0].trace.queries[-1])),
            ])


def validate_experiments(exps, log=print):
    instances = {}
    for exp in exps:
        for var in exp.variants():
            key = var.data_key()
            try:
                if key not in instances:
                    instances[key] = build_instance(var.params, exp.app, var.params["T"])
                inst = instances[key]
                sched = build_schedule(var.params, inst.spec.m)
                lam = lambda_max_gram(inst.spec.constraints.A)
                bound = minimal_alpha(var.params["rho"], eta_at(sched, 1), lam)
                cfg, sched = prepare(var, inst)
            except (InvalidConfigError, InvalidInputError) as exc:
                raise _located(var, exc, _guess_key(str(exc))) from None
            tag = exp.name + (f" ({var.label})" if var.label else "")
            log(f"{tag}: lambda_max(A^T A)={lam!r} alpha={cfg.alpha!r} "
                f"alpha_min={bound!r} eta_1={eta_at(sched, 1)!r} ok")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _parser():
    p = argparse.ArgumentParser(prog="zooadmm", description="Zeroth-order online ADMM experiments")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="INI experiment file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a key in every selected experiment (repeatable)")

    def running(sp):
        sp.add_argument("--seeds", type=int, help="number of solver seeds (0..N-1)")
        sp.add_argument("--out", default="results", help="output directory (default: results)")
        sp.add_argument("--iterates", action="store_true", help="also write the full iterate history")
        sp.add_argument("--baseline", action="store_true", help="also run the first-order O-ADMM")

    sp = sub.add_parser("run", help="run every experiment in a config file")
    common(sp, True)
    running(sp)
    sp = sub.add_parser("validate", help="check configs: alpha condition, schedule, constraint structure")
    common(sp, True)
    for app in APPLICATIONS:
        sp = sub.add_parser(app, help=f"run {app} experiments (defaults when no config is given)")
        common(sp, False)
        running(sp)
    return p


def _select(args):
    overrides = _parse_overrides(args.set)
    only = args.command if args.command in APPLICATIONS else None
    if args.config is not None:
        return load_config(args.config, overrides, only_app=only)
    return [_parse_section(only, only, {}, "<defaults>", overrides)]


def main(argv=None):
    args = _parser().parse_args(argv)
    if getattr(args, "seeds", None) is not None and args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        exps = _select(args)
        if args.command == "validate":
            return validate_experiments(exps)
        return run_experiments(exps, args.out, args.seeds, args.iterates, args.baseline)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error at iteration {exc.iteration}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ZooAdmmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
