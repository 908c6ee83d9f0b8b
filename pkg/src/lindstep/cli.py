"""Configuration-driven benchmark runner.

Builds the preset experiments, computes one reference trajectory per
dimension, sweeps every requested scheme over the dt grid, and writes a
CSV plus a metadata file per run. Wall-clock columns aside, reruns with
the same config are bit-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_curve, log_spaced_dts, plan_sample_grid
from .errors import BadConfig, LindstepError
from .fock import annihilation, cat_state_plus, truncated_power_loss
from .lindblad import LindbladModel, build_model, density_from_vector, maximally_mixed
from .reference import AdaptiveConfig, solve_reference
from .schemes import Scheme

EXPERIMENTS = ("cat_prep", "z_gate", "photon_loss_cfl")
CSV_HEADER = ("experiment", "scheme", "dim", "dt", "n_steps", "sup_error", "wall_time_s", "blowup")


@dataclass
class BenchmarkConfig:
    experiment: str = "cat_prep"
    dims: list[int] = field(default_factory=lambda: [32, 64, 128])
    schemes: list[str] = field(default_factory=lambda: [s.value for s in Scheme])
    dt_max: float | None = None
    dt_min: float | None = None
    dt_count: int = 40
    dt_list: list[float] | None = None
    T: float | None = None
    alpha: float = 2.0
    epsilon_z: float = 0.2
    kappa1: float = 0.01
    kappa2: float = 1.0
    l: int = 2
    rtol: float = 1e-12
    atol: float = 1e-12
    output_dir: str = "bench_out"
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchmarkConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise BadConfig(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise BadConfig(f"unknown experiment {self.experiment!r}, pick one of {EXPERIMENTS}")
        if not self.dims:
            raise BadConfig("dims is empty")
        if any(int(d) < 2 for d in self.dims):
            raise BadConfig("every dim must be >= 2")
        if not self.schemes:
            raise BadConfig("schemes is empty")
        for s in self.schemes:
            try:
                Scheme(s)
            except ValueError:
                raise BadConfig(f"unknown scheme {s!r}") from None
        if self.dt_list is not None:
            if not self.dt_list or any(dt <= 0 for dt in self.dt_list):
                raise BadConfig("dt_list must contain positive steps")
        elif self.dt_max is not None or self.dt_min is not None:
            if self.dt_max is None or self.dt_min is None:
                raise BadConfig("dt_max and dt_min must be given together")
            if not self.dt_max > self.dt_min > 0:
                raise BadConfig("need dt_max > dt_min > 0")
            if self.dt_count < 2:
                raise BadConfig("dt_count must be >= 2")
        if self.rtol <= 0 or self.atol <= 0:
            raise BadConfig("reference tolerances must be positive")
        if self.l < 1:
            raise BadConfig("l must be >= 1")

    def resolve_dts(self, T: float) -> np.ndarray:
        if self.dt_list is not None:
            return np.asarray(sorted(self.dt_list, reverse=True), dtype=float)
        dt_max = self.dt_max if self.dt_max is not None else T / 5
        dt_min = self.dt_min if self.dt_min is not None else T / 100_000
        return log_spaced_dts(dt_max, dt_min, self.dt_count)


def build_experiment(cfg: BenchmarkConfig, dim: int) -> tuple[LindbladModel, np.ndarray, float]:
    """Model, initial state, and final time for one experiment at one dim."""
    cfg.validate()
    dim = int(dim)
    a = annihilation(dim)
    zero = np.zeros((dim, dim), dtype=np.complex128)
    if cfg.experiment == "cat_prep":
        jump = truncated_power_loss(dim, 2, cfg.alpha**2)
        model = build_model(zero, [jump])
        rho0 = zero.copy()
        rho0[0, 0] = 1.0
        return model, rho0, cfg.T if cfg.T is not None else 1.0
    if cfg.experiment == "z_gate":
        h = cfg.epsilon_z * (a + a.conj().T)
        jumps = [
            np.sqrt(cfg.kappa2) * truncated_power_loss(dim, 2, cfg.alpha**2),
            np.sqrt(cfg.kappa1) * a,
        ]
        model = build_model(h, jumps)
        cat = cat_state_plus(dim, cfg.alpha)
        rho0 = density_from_vector(cat.amplitudes)
        T = cfg.T if cfg.T is not None else np.pi / (4 * cfg.alpha * cfg.epsilon_z)
        return model, rho0, T
    # photon_loss_cfl: bare l-photon loss from the maximally mixed state,
    # which excites the top Fock mode that drives the instability
    model = build_model(zero, [truncated_power_loss(dim, cfg.l, 0.0)])
    return model, maximally_mixed(dim), cfg.T if cfg.T is not None else 1.0


def _worker_count(n_cells: int) -> int:
    raw = os.environ.get("BENCH_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_cells))


def run_benchmark(cfg: BenchmarkConfig) -> int:
    """Run the configured sweep; returns a process exit code."""
    try:
        cfg.validate()
    except BadConfig as exc:
        print(f"bench: bad config: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    rows: list[dict] = []
    failures: list[str] = []

    for dim in cfg.dims:
        try:
            model, rho0, T = build_experiment(cfg, dim)
            dts = cfg.resolve_dts(T)
            grid = plan_sample_grid(T, dts)
            print(f"bench: {cfg.experiment} dim={dim}: reference on {grid.size} sample times")
            reference = solve_reference(
                model, rho0, grid, AdaptiveConfig(rtol=cfg.rtol, atol=cfg.atol)
            )

            def one_scheme(scheme: str):
                return error_curve(
                    model, scheme, rho0, T, dts, reference,
                    model_id=f"{cfg.experiment}/dim{dim}",
                )

            with ThreadPoolExecutor(max_workers=_worker_count(len(cfg.schemes))) as pool:
                curves = list(pool.map(one_scheme, cfg.schemes))
        except LindstepError as exc:
            failures.append(f"{cfg.experiment} dim={dim}: {type(exc).__name__}: {exc}")
            continue

        for scheme, curve in zip(cfg.schemes, curves):
            for p in curve.points:
                rows.append(
                    {
                        "experiment": cfg.experiment,
                        "scheme": scheme,
                        "dim": dim,
                        "dt": p.dt,
                        "n_steps": p.n_steps,
                        "sup_error": p.sup_error,
                        "wall_time_s": p.wall_time,
                        "blowup": p.blowup,
                    }
                )

    rows.sort(key=lambda r: (r["dim"], r["scheme"], -r["dt"]))
    csv_path = out_dir / f"{cfg.experiment}_{stamp}.csv"
    _write_csv(csv_path, rows)
    meta_path = out_dir / f"{cfg.experiment}_{stamp}.meta.json"
    _write_meta(meta_path, cfg)
    print(f"bench: wrote {csv_path} ({len(rows)} rows) and {meta_path}")
    if failures:
        for msg in failures:
            print(f"bench: FAILED cell: {msg}", file=sys.stderr)
        return 1
    return 0


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in CSV_HEADER])


def _write_meta(path: Path, cfg: BenchmarkConfig) -> None:
    meta = {
        "config": asdict(cfg),
        "version": __version__,
        "reference": {"method": "dormand-prince-5(4)", "rtol": cfg.rtol, "atol": cfg.atol},
        "sample_grid": (
            "sup-error evaluated on the recorded step grid: every step for runs of "
            "at most 200 steps, otherwise about 200 evenly strided steps plus the "
            "final one; the reference is solved once per dim on the union grid"
        ),
        "generated": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Lindblad time-stepper benchmark: error sweeps against an "
        "adaptive reference, written as CSV.",
    )
    parser.add_argument("--config", type=Path, help="JSON file with BenchmarkConfig fields")
    parser.add_argument("--experiment", choices=EXPERIMENTS, help="preset experiment")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--dims", help="comma-separated dimensions, e.g. 32,64")
    parser.add_argument("--schemes", help="comma-separated scheme tags, e.g. qc1,qc2,euler1")
    args = parser.parse_args(argv)

    raw: dict = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"bench: cannot read config: {exc}", file=sys.stderr)
            return 2
    if args.experiment:
        raw["experiment"] = args.experiment
    if args.out:
        raw["output_dir"] = args.out
    if args.dims:
        raw["dims"] = [int(d) for d in args.dims.split(",") if d]
    if args.schemes:
        raw["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]

    try:
        cfg = BenchmarkConfig.from_dict(raw)
        return run_benchmark(cfg)
    except LindstepError as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
