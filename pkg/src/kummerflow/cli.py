"""Batch front-end: classify | glue | solve-ma | forms | cohomology | sweep | verify-all."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from . import cohomled as cl
from . import pipeline as pl
from .alemodel import ALEModel, log_grid
from .orbifold import LatticeGroupPair, TrivialGroupError

ALL_STAGES = ("classify", "model", "gluing", "masolver", "forms", "bubbling", "ledger")
SWEEP_STAGES = ("gluing", "masolver", "forms", "bubbling")


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def _fractions(text: str) -> list[Fraction]:
    return [Fraction(x.strip()) for x in text.split(",") if x.strip()]


@dataclass
class RunConfig:
    lattice: list[list[str]]  # four vectors (z, w)
    generators: list[list[list[str]]]  # 2x2 matrices
    a: float = 1.0
    nodes: int = 2048
    s_range: tuple[float, float] = (1e-4, 1e4)  # in units of a^2
    eps_list: list[float] = field(default_factory=lambda: [0.05, 0.02, 0.01, 0.005])
    gluing_eps_list: list[float] = field(default_factory=lambda: [0.1, 0.05, 0.02, 0.01])
    deltas: list[float] = field(default_factory=lambda: [-1.0, -0.5])
    tolerances: dict[str, float] = field(
        default_factory=lambda: {
            "ma_tol": 1e-10,
            "ma_residual": 1e-9,
            "ode": 1e-8,
            "ricci": 1e-10,
            "pairing": 1e-6,
            "asd": 1e-8,
        }
    )
    vol: Fraction | None = None
    ledger_eps: list[Fraction] = field(default_factory=lambda: [Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)])
    eta: list[list[Fraction]] | None = None
    stages: list[str] = field(default_factory=lambda: list(ALL_STAGES))
    out: str = "out"
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name, lst in (("eps_list", self.eps_list), ("gluing_eps_list", self.gluing_eps_list)):
            if not lst:
                raise ConfigError(f"{name} must not be empty")
            if any(b >= a for a, b in zip(lst, lst[1:])):
                raise ConfigError(f"{name} must be sorted decreasing")
            if any(e <= 0 for e in lst):
                raise ConfigError(f"{name} entries must be positive")
        if not self.ledger_eps:
            raise ConfigError("ledger eps must not be empty")
        for k, v in self.tolerances.items():
            if not v > 0:
                raise ConfigError(f"tolerance {k} must be positive")
        unknown = [s for s in self.stages if s not in ALL_STAGES]
        if unknown:
            raise ConfigError(f"unknown stages {unknown}")
        if len(self.lattice) != 4:
            raise ConfigError("lattice needs four vectors")
        if not self.generators:
            raise ConfigError("group needs at least one generator")

    # -- (de)serialization -------------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(str(exc)) from exc
        if not cp.has_section("lattice") or not cp.has_section("group"):
            raise ConfigError("config needs [lattice] and [group] sections")
        lattice = [[c.strip() for c in v.split(",")] for v in cp["lattice"].values()]
        gens = [[[c.strip() for c in row.split(",")] for row in g.split(";")] for g in cp["group"].values()]
        kw: dict = {}
        if cp.has_section("model"):
            m = cp["model"]
            kw["a"] = m.getfloat("a", 1.0)
            kw["nodes"] = m.getint("nodes", 2048)
            if "s_range" in m:
                lo, hi = _floats(m["s_range"])
                kw["s_range"] = (lo, hi)
        if cp.has_section("sweep"):
            s = cp["sweep"]
            if "eps_list" in s:
                kw["eps_list"] = _floats(s["eps_list"])
            if "gluing_eps_list" in s:
                kw["gluing_eps_list"] = _floats(s["gluing_eps_list"])
            if "deltas" in s:
                kw["deltas"] = _floats(s["deltas"])
        if cp.has_section("tolerances"):
            tol = cls.__dataclass_fields__["tolerances"].default_factory()
            for k, v in cp["tolerances"].items():
                tol[k] = float(v)
            kw["tolerances"] = tol
        if cp.has_section("ledger"):
            led = cp["ledger"]
            if "vol" in led:
                kw["vol"] = Fraction(led["vol"].strip())
            if "eps" in led:
                kw["ledger_eps"] = _fractions(led["eps"])
            if "eta" in led:
                kw["eta"] = [_fractions(p) for p in led["eta"].split(";")]
        if cp.has_section("run"):
            r = cp["run"]
            if "stages" in r:
                kw["stages"] = [x.strip() for x in r["stages"].split(",") if x.strip()]
            kw["out"] = r.get("out", "out")
            kw["seed"] = r.getint("seed", 0)
        return cls(lattice, gens, **kw)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_text(Path(path).read_text())

    def to_text(self) -> str:
        def flist(xs):
            return ", ".join(repr(float(x)) for x in xs)

        lines = ["[lattice]"]
        lines += [f"v{k + 1} = {', '.join(v)}" for k, v in enumerate(self.lattice)]
        lines += ["", "[group]"]
        lines += [f"g{k + 1} = {'; '.join(', '.join(r) for r in g)}" for k, g in enumerate(self.generators)]
        lines += [
            "",
            "[model]",
            f"a = {self.a!r}",
            f"nodes = {self.nodes}",
            f"s_range = {flist(self.s_range)}",
            "",
            "[sweep]",
            f"eps_list = {flist(self.eps_list)}",
            f"gluing_eps_list = {flist(self.gluing_eps_list)}",
            f"deltas = {flist(self.deltas)}",
            "",
            "[tolerances]",
        ]
        lines += [f"{k} = {v!r}" for k, v in self.tolerances.items()]
        lines += ["", "[ledger]"]
        if self.vol is not None:
            lines.append(f"vol = {self.vol}")
        lines.append("eps = " + ", ".join(str(e) for e in self.ledger_eps))
        if self.eta is not None:
            lines.append("eta = " + "; ".join(", ".join(str(x) for x in p) for p in self.eta))
        lines += ["", "[run]", f"stages = {', '.join(self.stages)}", f"out = {self.out}", f"seed = {self.seed}", ""]
        return "\n".join(lines)

    # -- derived objects ---------------------------------------------------

    def pair(self) -> LatticeGroupPair:
        return LatticeGroupPair.from_strings(self.lattice, self.generators)

    def model(self) -> ALEModel:
        a2 = self.a * self.a
        return ALEModel(self.a, grid=log_grid(self.s_range[0] * a2, self.s_range[1] * a2, self.nodes))

    def intersection_data(self) -> cl.IntersectionData:
        return cl.intersection_data_from_pair(self.pair(), vol=self.vol, eta=self.eta)


# ---------------------------------------------------------------------------
# output


def csv_text(rows: list[dict]) -> str:
    """CSV with floats at 12 significant digits and a column order fixed by first appearance."""
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.12g}"
    return x


def stage_rows(result: pl.StageResult) -> list[dict]:
    rows = []
    for rep in result.reports:
        for r in rep.rows:
            rows.append({"report": rep.stage, **r})
    return rows


def write_csv(out: Path, name: str, rows: list[dict]) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.csv"
    path.write_text(csv_text(rows))
    return path


def format_checks(results: list[pl.StageResult]) -> str:
    lines = []
    for res in results:
        lines.append(f"[{res.stage}]")
        for c in res.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}\t{c.name}\t{c.anchor}\t{c.detail}")
        lines.append("")
    total = sum(len(r.checks) for r in results)
    failed = sum(not c.passed for r in results for c in r.checks)
    lines.append(f"summary: {total - failed}/{total} checks passed")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# stage dispatch


def run_stage(stage: str, cfg: RunConfig) -> pl.StageResult:
    if stage == "classify":
        return pl.run_classify(cfg.pair())
    if stage == "model":
        t = cfg.tolerances
        return pl.run_model(cfg.model(), cfg.seed, t["ode"], t["ricci"], t["pairing"], t["asd"])
    if stage == "gluing":
        return pl.run_gluing(cfg.model(), cfg.gluing_eps_list)
    if stage == "masolver":
        return pl.run_masolver(cfg.model(), cfg.eps_list, cfg.deltas, cfg.tolerances["ma_tol"], cfg.tolerances["ma_residual"])
    if stage == "forms":
        return pl.run_forms(cfg.model(), cfg.eps_list)
    if stage == "bubbling":
        return pl.run_bubbling(cfg.model(), cfg.eps_list)
    if stage == "ledger":
        return pl.run_ledger(cfg.intersection_data(), cfg.ledger_eps)
    raise ConfigError(f"unknown stage {stage}")


def _guarded(stage: str, cfg: RunConfig) -> pl.StageResult:
    try:
        return run_stage(stage, cfg)
    except (ConfigError, TrivialGroupError):
        raise
    except Exception as exc:  # surfaced as a failed row, never swallowed silently
        res = pl.StageResult(stage)
        res.add("error", "stage completed", False, f"{type(exc).__name__}: {exc}")
        return res


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kummerflow", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="path to a run configuration")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--stages", help="comma-separated stage list (overrides the config)")
        sp.add_argument("--eps", help="comma-separated epsilon list (overrides every sweep list)")
        sp.add_argument("--seed", type=int, help="seed for randomized sampling")

    for name in ("classify", "glue", "solve-ma", "forms", "cohomology", "verify-all"):
        common(sub.add_parser(name))
    sw = sub.add_parser("sweep")
    common(sw)
    sw.add_argument("--stage", required=True, choices=SWEEP_STAGES)
    return p


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    kw = {}
    if args.out:
        kw["out"] = args.out
    if args.stages:
        kw["stages"] = [s.strip() for s in args.stages.split(",") if s.strip()]
    if args.eps is not None:
        eps = _floats(args.eps)
        kw["eps_list"] = eps
        kw["gluing_eps_list"] = eps
    if args.seed is not None:
        kw["seed"] = args.seed
    return replace(cfg, **kw) if kw else cfg


COMMAND_STAGE = {"glue": "gluing", "solve-ma": "masolver", "forms": "forms"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(RunConfig.from_file(args.config), args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    try:
        if args.command == "classify":
            res = pl.run_classify(cfg.pair())
            out.mkdir(parents=True, exist_ok=True)
            (out / "classification.txt").write_text(res.text)
            sys.stdout.write(res.text + format_checks([res]))
            return 0 if res.passed else 1
        if args.command == "cohomology":
            res = run_stage("ledger", cfg)
            out.mkdir(parents=True, exist_ok=True)
            (out / "ledger.txt").write_text(res.text)
            sys.stdout.write(format_checks([res]))
            return 0 if res.passed else 1
        if args.command in COMMAND_STAGE or args.command == "sweep":
            stage = COMMAND_STAGE.get(args.command, getattr(args, "stage", None))
            res = _guarded(stage, cfg)
            path = write_csv(out, stage, stage_rows(res))
            if args.command != "sweep":
                sys.stdout.write(format_checks([res]))
            print(f"wrote {path}")
            return 0 if res.passed else 1
        # verify-all
        out.mkdir(parents=True, exist_ok=True)
        results = []
        for stage in cfg.stages:
            res = _guarded(stage, cfg)
            results.append(res)
            if stage in SWEEP_STAGES:
                write_csv(out, stage, stage_rows(res))
            if stage == "ledger":
                (out / "ledger.txt").write_text(res.text)
            if stage == "classify":
                (out / "classification.txt").write_text(res.text)
        text = format_checks(results)
        (out / "report.txt").write_text(text)
        sys.stdout.write(text)
        return 0 if all(r.passed for r in results) else 1
    except TrivialGroupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
