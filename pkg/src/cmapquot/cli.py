"""Command line driver.

Verbs
-----
``verify``             run verification suites and write a JSON report
``models list``        print the catalog
``quotient describe``  print the quotient data of a model's recipe
``plot``               turn a report field into a ``.dat`` table and a PNG

Exit status of ``verify`` is 0 iff no check FAILs.
"""

from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CmapError, ConfigError, ModelError, UnknownField
from .geo_verify import FIRST, SECOND, Verdict
from .models import ModelDescriptor, custom_model, get_model, list_models, recipe
from .suites import SUITES, TOLERANCES, SuiteContext, run_suite

__all__ = ["RunConfig", "load_config", "run", "emit_plot_data", "main", "SCHEMA"]

SCHEMA = "cmapquot.report/1"


@dataclass
class RunConfig:
    """Validated run configuration.

    ``model`` is a catalog identifier, or ``None`` when ``custom`` carries
    an inline cubic prepotential.
    """

    model: str | None = "quadratic:n=3"
    custom: dict | None = None
    quotient: dict = field(default_factory=dict)
    suites: tuple = SUITES
    samples: int = 20
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    out: str | None = None
    workers: int = 4

    def __post_init__(self):
        if not self.suites:
            raise ConfigError("suites list is empty")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
        if int(self.samples) < 1:
            raise ConfigError("samples must be at least 1")
        unknown = set(self.tolerances) - set(TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names {sorted(unknown)}")
        if self.model is None and self.custom is None:
            raise ConfigError("no model given")

    def descriptor(self) -> ModelDescriptor:
        if self.custom is not None:
            return custom_model(self.custom["d"], self.custom.get("proposal"), self.custom.get("name", "custom"))
        return get_model(self.model)

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "custom": self.custom,
            "quotient": self.quotient,
            "suites": list(self.suites),
            "samples": int(self.samples),
            "seed": int(self.seed),
            "tolerances": dict(sorted(self.tolerances.items())),
        }


# --- parsing -------------------------------------------------------------------


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(tok.replace(" ", "")) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex list {text!r}") from exc


def _parse_suites(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _parse_tol(items) -> dict:
    out = {}
    for item in items or []:
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"--tol expects name=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    return out


def _parse_cubic(text: str, size: int | None) -> np.ndarray:
    """``"i j k value; ..."`` with 1-based indices over ``z`` into a symmetric tensor."""
    import itertools

    entries = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split()
        if len(parts) != 4:
            raise ConfigError(f"cubic entry {chunk!r} must be 'i j k value'")
        i, j, k = (int(p) - 1 for p in parts[:3])
        entries.append(((i, j, k), float(parts[3])))
    if not entries:
        raise ConfigError("cubic block is empty")
    m = size or 1 + max(max(idx) for idx, _ in entries)
    d = np.zeros((m, m, m))
    for idx, v in entries:
        for perm in set(itertools.permutations(idx)):
            d[perm] = v
    return d


def load_config(path: str | os.PathLike) -> RunConfig:
    """Read an INI file with blocks ``[model]``, ``[quotient]`` and ``[run]``.

    ``[model]`` has ``name = <identifier>`` or an inline cubic prepotential
    ``cubic = i j k value; ...`` (optional ``size``, ``proposal``).
    ``[quotient]`` may set ``z0``, ``D`` (a list or ``sample:<seed>``) and
    ``Ct``.  ``[run]`` takes ``suites``, ``samples``, ``seed``, ``out``,
    ``workers`` and ``tol.<name>`` entries.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if not cp.read(path):
        raise ConfigError(f"cannot read config {path}")
    unknown = set(cp.sections()) - {"model", "quotient", "run"}
    if unknown:
        raise ConfigError(f"unknown config blocks {sorted(unknown)}")
    kw: dict = {}
    if cp.has_section("model"):
        sec = cp["model"]
        if "cubic" in sec:
            size = sec.getint("size", fallback=None)
            custom = {"d": _parse_cubic(sec["cubic"], size), "name": sec.get("name", "custom")}
            if "proposal" in sec:
                custom["proposal"] = [int(x) for x in sec["proposal"].split(",")]
            kw["custom"], kw["model"] = custom, None
        elif "name" in sec:
            kw["model"] = sec["name"].strip()
        else:
            raise ConfigError("[model] needs 'name' or 'cubic'")
    if cp.has_section("quotient"):
        sec = cp["quotient"]
        q: dict = {}
        if "z0" in sec:
            q["z0"] = _complex_list(sec["z0"])
        if "D" in sec:
            val = sec["D"].strip()
            if val.startswith("sample:"):
                q["D_sample_seed"] = int(val.split(":", 1)[1])
            else:
                q["D"] = _complex_list(val)
        if "Ct" in sec:
            q["Ct"] = complex(sec["Ct"].replace(" ", ""))
        kw["quotient"] = q
    if cp.has_section("run"):
        sec = cp["run"]
        try:
            if "suites" in sec:
                kw["suites"] = _parse_suites(sec["suites"])
            if "samples" in sec:
                kw["samples"] = sec.getint("samples")
            if "seed" in sec:
                kw["seed"] = sec.getint("seed")
            if "workers" in sec:
                kw["workers"] = sec.getint("workers")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if "out" in sec:
            kw["out"] = sec["out"]
        tol = {}
        for key in sec:
            if key.startswith("tol."):
                try:
                    tol[key[4:]] = float(sec[key])
                except ValueError as exc:
                    raise ConfigError(f"bad tolerance {key}") from exc
        kw["tolerances"] = tol
    return RunConfig(**kw)


# --- report -------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def determinism_hash(report: dict) -> str:
    """sha256 of the report without its timestamp and hash fields."""
    body = {k: v for k, v in report.items() if k not in ("generated", "determinism_hash")}
    return hashlib.sha256(_canonical(body).encode()).hexdigest()


def _quotient_overrides(cfg: RunConfig, model: ModelDescriptor) -> dict:
    q = dict(cfg.quotient)
    if "D_sample_seed" in q:
        from .quotient import null_vector_sample
        from .special_kahler import lift

        z0 = q.get("z0")
        if z0 is None:
            z0 = recipe(model, seed=cfg.seed).z0
            q["z0"] = list(z0)
        q["D"] = list(null_vector_sample(model.spec, lift(np.asarray(z0, dtype=complex)), seed=q.pop("D_sample_seed"), phase=True))
    return q


def run(cfg: RunConfig) -> dict:
    """Execute the configured suites and return the report document."""
    model = cfg.descriptor()
    ctx = SuiteContext(
        model,
        samples=int(cfg.samples),
        seed=int(cfg.seed),
        tol=dict(cfg.tolerances),
        workers=int(cfg.workers),
        quotient=_quotient_overrides(cfg, model) if model.spec is not None else {},
    )
    suites, fields, derived = {}, {}, {}
    counts = {v.value: 0 for v in Verdict}
    for name in cfg.suites:
        try:
            out = run_suite(name, ctx)
        except CmapError as exc:
            from .suites import SuiteOutput, _fail

            out = SuiteOutput(checks=[_fail(f"{name}_suite", "suite execution", exc)])
        for c in out.checks:
            counts[c.verdict.value] += 1
        suites[name] = {
            "checks": [c.as_dict() for c in out.checks],
            "derived": out.derived,
            "skipped": out.skipped,
        }
        derived.update({k: v for k, v in out.derived.items()})
        for fname, rows in out.fields.items():
            fields[fname] = [[i, *np.atleast_1d(np.asarray(coords, dtype=float)).tolist(), float(val)] for i, (coords, val) in enumerate(rows)]
    report = {
        "schema": SCHEMA,
        "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "environment": {
            "version": __version__,
            "numpy": np.__version__,
            "seed": int(cfg.seed),
            "samples": int(cfg.samples),
            "fd_first": {"rel": FIRST.rel, "floor": FIRST.floor},
            "fd_second": {"rel": SECOND.rel, "floor": SECOND.floor},
            "coordinate_order": "(Re z, Im z, phi, phit, a, b)",
        },
        "config": cfg.as_dict(),
        "model": model.summary(),
        "tolerances": dict(sorted(ctx.tol.items())),
        "suites": suites,
        "derived": derived,
        "fields": fields,
        "summary": {**counts, "ok": counts["FAIL"] == 0},
    }
    report = _jsonable(report)
    report["determinism_hash"] = determinism_hash(report)
    return report


def write_report(report: dict, path: str | os.PathLike | None) -> str:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    return text


# --- plotting -------------------------------------------------------------------


def emit_plot_data(report: dict, field_name: str, out_dir: str | os.PathLike = ".", png: bool = True) -> tuple[Path, Path | None]:
    """Write ``<field>.dat`` (index, coordinates, value) and optionally ``<field>.png``."""
    fields = report.get("fields", {})
    if field_name not in fields:
        raise UnknownField(f"field {field_name!r} not in report; available: {sorted(fields)}")
    rows = fields[field_name]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ncoord = len(rows[0]) - 2 if rows else 0
    header = "# index " + " ".join(f"x{i}" for i in range(ncoord)) + f" {field_name}"
    dat = out / f"{field_name}.dat"
    with dat.open("w") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(f"{int(r[0])} " + " ".join(f"{v:.17g}" for v in r[1:]) + "\n")
    pngp = None
    if png:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 3.5))
        idx = [r[0] for r in rows]
        val = [r[-1] for r in rows]
        ax.plot(idx, val, "o", ms=4)
        ax.set_xlabel("sample point")
        ax.set_ylabel(field_name)
        ax.set_title(f"{report.get('model', {}).get('name', '')}: {field_name}")
        fig.tight_layout()
        pngp = out / f"{field_name}.png"
        fig.savefig(pngp, dpi=120)
        plt.close(fig)
    return dat, pngp


# --- argument handling ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cmapquot", description="Numerical verification of c-map geometry and its Kaehler quotients.")
    ap.add_argument("--version", action="version", version=f"cmapquot {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--model")
    v.add_argument("--config")
    v.add_argument("--suites")
    v.add_argument("--samples", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", action="append", metavar="NAME=VALUE")
    v.add_argument("--workers", type=int)
    v.add_argument("--out")

    m = sub.add_parser("models", help="catalog")
    m.add_argument("action", choices=["list"])

    q = sub.add_parser("quotient", help="quotient data")
    q.add_argument("action", choices=["describe"])
    q.add_argument("--model")
    q.add_argument("--config")
    q.add_argument("--seed", type=int)
    q.add_argument("--out")

    p = sub.add_parser("plot", help="plot a report field")
    p.add_argument("--report", required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--no-png", action="store_true")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    kw = cfg.__dict__.copy()
    if getattr(args, "model", None):
        kw["model"], kw["custom"] = args.model, None
    if getattr(args, "suites", None) is not None:
        kw["suites"] = _parse_suites(args.suites)
    for name in ("samples", "seed", "workers", "out"):
        val = getattr(args, name, None)
        if val is not None:
            kw[name] = val
    kw["tolerances"] = {**cfg.tolerances, **_parse_tol(getattr(args, "tol", None))}
    return RunConfig(**kw)


def _describe(cfg: RunConfig) -> dict:
    model = cfg.descriptor()
    if model.spec is None:
        from .models import h4_moment_check

        return {"model": model.summary(), "h4": h4_moment_check(np.zeros(4))}
    rec = recipe(model, seed=cfg.seed)
    return _jsonable(
        {
            "model": model.summary(),
            "z0": rec.z0,
            "D": rec.D,
            "C": rec.qspec.C,
            "Ct": rec.Ct,
            "singular_values": rec.qspec.singular_values,
            "dims": rec.qspec.dims(),
            "fixed_locus": rec.locus.as_dict(),
        }
    )


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.verb == "models":
            for md in list_models():
                s = md.summary()
                exp = ", ".join(f"{k}={v}" for k, v in s["expected"].items())
                print(f"{s['name']:<22} n={s['n']:<3} {exp}")
            return 0
        if args.verb == "plot":
            report = json.loads(Path(args.report).read_text())
            dat, png = emit_plot_data(report, args.field, args.out, png=not args.no_png)
            print(dat)
            if png:
                print(png)
            return 0
        cfg = _config_from_args(args)
        if args.verb == "quotient":
            write_report(_describe(cfg), cfg.out)
            return 0
        report = run(cfg)
        write_report(report, cfg.out)
        s = report["summary"]
        print(f"PASS={s['PASS']} FAIL={s['FAIL']} INCONCLUSIVE={s['INCONCLUSIVE']} hash={report['determinism_hash'][:16]}", file=sys.stderr)
        return 0 if s["ok"] else 1
    except (ConfigError, ModelError, UnknownField) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
