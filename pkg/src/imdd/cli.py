"""Command-line front end: sweep orchestration and CSV/JSON emission.

Every artifact file starts with a version line, uses a fixed column
schema, and is byte-identical across reruns of the same configuration.
Exit codes: 0 success (possibly with per-row warnings), 2 invalid usage
or configuration, 3 numerical divergence.  Per-row sweep failures go to a
``<output stem>.errors.csv`` sidecar instead of poisoning good rows.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__, bias, gains, link, pulses, waveform
from .errors import DomainError, NumericalDivergenceError, UnsupportedError

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

_SER_HEADER = ("pulse", "alpha", "M", "receiver", "A", "N0",
               "p_analytic", "p_hat", "ci95", "n")
_GAIN_HEADER = ("scenario", "receiver", "pulse", "alpha", "m", "b_tb",
                "gain_db", "mu", "q_bar", "q_zero")
_BIAS_HEADER = ("pulse", "alpha", "m", "ts", "mu", "mu_norm",
                "argmax_t", "k_trunc")


@dataclass
class RunConfig:
    """Validated arguments of one CLI invocation."""

    command: str
    pulse_set: tuple[str, ...] = ()
    alphas: tuple[float, ...] = ()
    m_values: tuple[int, ...] = (2,)
    scenario: str | None = None
    receiver: str | None = None
    p_err: float = 1e-6
    seed: int = 0
    output: str = ""
    fmt: str = "csv"
    ts: float = 1.0
    a: float = 1.0
    n0: float = 1.0
    n_symbols: int = 100_000
    target: int | None = None
    rate: int = 32
    n_traces: int = 64
    grid_n: int = bias.DEFAULT_GRID_N
    tail_tol: float = bias.DEFAULT_TAIL_TOL
    allow_isi: bool = False


def _parse_pulse_list(text: str) -> tuple[str, ...]:
    if text.strip().lower() == "all":
        return tuple(pulses.FAMILIES)
    out = []
    for name in text.split(","):
        name = name.strip().lower()
        if name not in pulses.FAMILIES:
            raise DomainError(
                f"unknown pulse {name!r}; choose from "
                f"{', '.join(pulses.FAMILIES)} or 'all'")
        out.append(name)
    if not out:
        raise DomainError("empty pulse list")
    return tuple(dict.fromkeys(out))


def _parse_alpha_grid(text: str) -> tuple[float, ...]:
    """'0.6' or 'start:stop:step' (inclusive endpoints)."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError("alpha grid must be value or start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise DomainError("alpha grid step must be > 0")
        if stop < start:
            raise DomainError("alpha grid needs stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(n))
    return (float(text),)


def _parse_m_list(text: str) -> tuple[int, ...]:
    try:
        out = tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise DomainError(f"bad modulation order list {text!r}") from exc
    if not out or any(m < 2 for m in out):
        raise DomainError("modulation orders must be integers >= 2")
    return tuple(dict.fromkeys(out))


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _check_writable(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(parent, exist_ok=True)
        with open(path, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise DomainError(f"output path {path!r} is not writable: {exc}")


def _write_rows(cfg: RunConfig, header, rows, comments=()):
    if cfg.fmt == "json":
        payload = {"version": __version__, "command": cfg.command}
        if comments:
            payload["params"] = dict(comments)
        payload["rows"] = [dict(zip(header, row)) for row in rows]
        with open(cfg.output, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# imdd {__version__}\n")
        for key, value in comments:
            fh.write(f"# {key}={_fmt(value)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _sidecar_path(output: str) -> str:
    stem, _ = os.path.splitext(output)
    return stem + ".errors.csv"


def _write_failures(cfg: RunConfig, header, rows) -> str:
    path = _sidecar_path(cfg.output)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# imdd {__version__}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _finish(cfg: RunConfig, header, rows, failures, failure_header,
            t0: float, extra: str = "") -> int:
    """Write artifacts, print the summary line, map failures to the exit
    code contract."""
    _write_rows(cfg, header, rows)
    diverged = any(isinstance(exc, NumericalDivergenceError)
                   for _, exc in failures)
    if failures:
        path = _write_failures(
            cfg, failure_header,
            [key + (str(exc),) for key, exc in failures])
        print(f"warning: {len(failures)} grid point(s) failed -> {path}",
              file=sys.stderr)
    elapsed = time.perf_counter() - t0
    print(f"{cfg.command}: wrote {len(rows)} rows -> {cfg.output}"
          f"{extra} [{elapsed:.2f} s]")
    if rows:
        return 0
    return 3 if diverged else 2


def _run_bias(cfg: RunConfig, t0: float) -> int:
    rows, failures = [], []
    for family in sorted(cfg.pulse_set):
        for alpha in cfg.alphas:
            for m in cfg.m_values:
                try:
                    sol = bias.required_bias(
                        pulses.PulseSpec(family, alpha, cfg.ts),
                        bias.Constellation.pam(m),
                        grid_n=cfg.grid_n, tail_tol=cfg.tail_tol)
                    a_hat = float(m - 1)
                    rows.append((family, alpha, m, cfg.ts, sol.mu,
                                 sol.mu / a_hat, sol.argmax_t, sol.k_trunc))
                except (DomainError, NumericalDivergenceError) as exc:
                    failures.append(((family, alpha, m), exc))
    return _finish(cfg, _BIAS_HEADER, rows, failures,
                   ("pulse", "alpha", "m", "error"), t0)


def _run_ser(cfg: RunConfig, t0: float) -> int:
    rows, failures = [], []
    for family in sorted(cfg.pulse_set):
        for alpha in cfg.alphas:
            for m in cfg.m_values:
                try:
                    lc = link.LinkConfig(
                        pulse=pulses.PulseSpec(family, alpha, cfg.ts),
                        constellation=bias.Constellation.pam(m),
                        receiver=cfg.receiver or "sampling",
                        a=cfg.a, n0=cfg.n0, rate=cfg.rate, seed=cfg.seed,
                        allow_isi=cfg.allow_isi)
                    est = link.monte_carlo_ser(lc, cfg.n_symbols, cfg.target)
                    rows.append((family, alpha, m, lc.receiver, cfg.a,
                                 cfg.n0, est.p_analytic, est.p_hat,
                                 est.ci95, est.n_symbols))
                except (DomainError, UnsupportedError,
                        NumericalDivergenceError) as exc:
                    failures.append(((family, alpha, m,
                                      cfg.receiver or "sampling"), exc))
    return _finish(cfg, _SER_HEADER, rows, failures,
                   ("pulse", "alpha", "M", "receiver", "error"), t0)


def _run_gain(cfg: RunConfig, t0: float) -> int:
    rows, failures = [], []
    for family in sorted(cfg.pulse_set):
        receivers = ((cfg.receiver,) if cfg.receiver
                     else gains.valid_receivers(family, cfg.scenario))
        if not receivers:
            failures.append(((cfg.scenario, "", family, "", ""),
                             UnsupportedError(
                                 f"no receiver supports {family} in "
                                 f"{cfg.scenario}")))
            continue
        for alpha in cfg.alphas:
            for m in cfg.m_values:
                for receiver in receivers:
                    try:
                        pt = gains.gain_point(
                            cfg.scenario, receiver,
                            pulses.PulseSpec(family, alpha, cfg.ts),
                            bias.Constellation.pam(m), cfg.p_err)
                        rows.append((pt.scenario, pt.receiver, pt.pulse,
                                     pt.alpha, pt.m, pt.b_tb, pt.gain_db,
                                     pt.mu, pt.q_bar, pt.q_zero))
                    except (DomainError, UnsupportedError,
                            NumericalDivergenceError) as exc:
                        failures.append(
                            ((cfg.scenario, receiver, family, alpha, m), exc))
    extra = ""
    if rows:
        gains_db = [row[6] for row in rows]
        extra = (f" (gain min {min(gains_db):.3f} dB,"
                 f" max {max(gains_db):.3f} dB)")
    return _finish(cfg, _GAIN_HEADER, rows, failures,
                   ("scenario", "receiver", "pulse", "alpha", "m", "error"),
                   t0, extra)


def _run_waveform(cfg: RunConfig, t0: float) -> int:
    family, alpha, m = cfg.pulse_set[0], cfg.alphas[0], cfg.m_values[0]
    pulse = pulses.PulseSpec(family, alpha, cfg.ts)
    constellation = bias.Constellation.pam(m)
    mu = bias.required_bias(pulse, constellation).mu
    rng = np.random.default_rng(cfg.seed)
    symbols = rng.choice(np.asarray(constellation.levels),
                         size=cfg.n_symbols)
    grid = waveform.synthesize(pulse, constellation, symbols, mu=mu,
                               a=cfg.a, rate=cfg.rate, seed=cfg.seed)
    t = grid.t
    keep = (t >= 0.0) & (t < cfg.n_symbols * cfg.ts)
    rows = list(zip(t[keep].tolist(), grid.samples[keep].tolist()))
    comments = (("pulse", family), ("alpha", alpha), ("m", m),
                ("ts", cfg.ts), ("a", cfg.a), ("rate", cfg.rate),
                ("seed", cfg.seed), ("n", cfg.n_symbols), ("mu", mu))
    _write_rows(cfg, ("t", "value"), rows, comments)
    elapsed = time.perf_counter() - t0
    print(f"waveform: wrote {len(rows)} rows -> {cfg.output}"
          f" [{elapsed:.2f} s]")
    return 0


def _run_eye(cfg: RunConfig, t0: float) -> int:
    family, alpha, m = cfg.pulse_set[0], cfg.alphas[0], cfg.m_values[0]
    pulse = pulses.PulseSpec(family, alpha, cfg.ts)
    constellation = bias.Constellation.pam(m)
    receiver = cfg.receiver or "sampling"
    eye = waveform.eye_diagram(pulse, constellation, receiver,
                               n_traces=cfg.n_traces, rate=cfg.rate,
                               seed=cfg.seed, a=cfg.a)
    rows = []
    for i in range(eye.traces.shape[0]):
        for t_val, v in zip(eye.t.tolist(), eye.traces[i].tolist()):
            rows.append((i, t_val, v))
    comments = (("pulse", family), ("alpha", alpha), ("m", m),
                ("ts", cfg.ts), ("a", cfg.a), ("rate", cfg.rate),
                ("seed", cfg.seed), ("receiver", receiver),
                ("traces", cfg.n_traces))
    _write_rows(cfg, ("trace", "t", "value"), rows, comments)
    elapsed = time.perf_counter() - t0
    print(f"eye: wrote {len(rows)} rows -> {cfg.output} [{elapsed:.2f} s]")
    return 0


_RUNNERS = {
    "bias": _run_bias,
    "waveform": _run_waveform,
    "eye": _run_eye,
    "ser": _run_ser,
    "gain": _run_gain,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration; returns the process exit code."""
    if cfg.command not in _RUNNERS:
        raise DomainError(f"unknown command {cfg.command!r}")
    if not cfg.pulse_set or not cfg.alphas or not cfg.m_values:
        raise DomainError("pulse, alpha, and m grids must be nonempty")
    if cfg.command in ("waveform", "eye"):
        if len(cfg.pulse_set) != 1 or len(cfg.alphas) != 1 \
                or len(cfg.m_values) != 1:
            raise DomainError(
                f"{cfg.command} takes exactly one pulse, alpha, and m")
    if cfg.command == "gain" and cfg.scenario not in gains.SCENARIOS:
        raise DomainError(f"scenario must be one of {gains.SCENARIOS}")
    _check_writable(cfg.output)
    t0 = time.perf_counter()
    return _RUNNERS[cfg.command](cfg, t0)


def reproduce_configs(figure: str, out_dir: str = ".",
                      fmt: str = "csv") -> list[RunConfig]:
    """The sweep configurations behind each shipped dataset."""
    if figure not in FIGURES:
        raise DomainError(f"figure must be one of {FIGURES}")

    def out(name: str) -> str:
        return os.path.join(out_dir, f"{name}.{fmt}")

    dense = _parse_alpha_grid("0.01:1.0:0.005")
    nyquist = tuple(f for f in pulses.FAMILIES if f != "rrc")
    if figure == "fig2":
        return [RunConfig(command="waveform", pulse_set=(fam,),
                          alphas=(0.6,), m_values=(2,), n_symbols=16,
                          seed=0, fmt=fmt, output=out(f"fig2_{fam}"))
                for fam in ("rc", "src")]
    if figure == "fig3":
        return [RunConfig(command="eye", pulse_set=(fam,), alphas=(0.6,),
                          m_values=(2,), receiver="sampling", seed=0,
                          fmt=fmt, output=out(f"fig3_{fam}"))
                for fam in ("rc", "pl", "btn", "xia")]
    if figure == "fig4":
        return [RunConfig(command="bias", pulse_set=tuple(pulses.FAMILIES),
                          alphas=dense, m_values=(2,), fmt=fmt,
                          output=out("fig4"))]
    if figure == "fig5":
        return [RunConfig(command="gain", scenario="equal-eye",
                          pulse_set=nyquist, alphas=dense, m_values=(2, 4),
                          fmt=fmt, output=out("fig5"))]
    return [RunConfig(command="gain", scenario="equal-ser",
                      pulse_set=tuple(pulses.FAMILIES), alphas=dense,
                      m_values=(2, 4), p_err=1e-6, fmt=fmt,
                      output=out("fig6"))]


def reproduce(figure: str, out_dir: str = ".", fmt: str = "csv") -> int:
    """Emit the full dataset behind one shipped figure."""
    status = 0
    for cfg in reproduce_configs(figure, out_dir, fmt):
        status = max(status, run(cfg))
    return status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imdd",
        description="Bandlimited pulse shaping for IM/DD links with a "
                    "constant DC bias: bias tables, waveforms, eye "
                    "diagrams, SER and optical power gain sweeps.")
    parser.add_argument("--version", action="version",
                        version=f"imdd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output",
                        help="output file (default <out-dir>/<command>.<format>)")
    common.add_argument("--out-dir",
                        default=os.environ.get("IMDD_OUT_DIR", "."),
                        help="default output directory (env IMDD_OUT_DIR)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--ts", type=float, default=1.0,
                        help="symbol period (default 1.0)")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bias", parents=[common],
                       help="minimum DC bias over a pulse/alpha/M grid")
    p.add_argument("--pulse", required=True, help="comma list or 'all'")
    p.add_argument("--alpha", required=True, help="value or start:stop:step")
    p.add_argument("--m", default="2", help="comma list of PAM orders")
    p.add_argument("--grid-n", type=int, default=bias.DEFAULT_GRID_N)
    p.add_argument("--tail-tol", type=float, default=bias.DEFAULT_TAIL_TOL)

    p = sub.add_parser("waveform", parents=[common],
                       help="sampled transmit intensity for random symbols")
    p.add_argument("--pulse", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--m", default="2")
    p.add_argument("--n", type=int, default=16, dest="n_symbols",
                   help="number of interior symbols")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--rate", type=int, default=32)

    p = sub.add_parser("eye", parents=[common],
                       help="noise-free receiver eye traces")
    p.add_argument("--pulse", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--m", default="2")
    p.add_argument("--receiver", choices=link.RECEIVERS, default="sampling")
    p.add_argument("--traces", type=int, default=64, dest="n_traces")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--rate", type=int, default=32)

    p = sub.add_parser("ser", parents=[common],
                       help="Monte Carlo symbol error rate")
    p.add_argument("--pulse", required=True)
    p.add_argument("--alpha", default="0.5")
    p.add_argument("--m", default="2")
    p.add_argument("--receiver", choices=link.RECEIVERS, default="sampling")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--n0", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100_000, dest="n_symbols")
    p.add_argument("--target", type=int, default=None,
                   help="stop once this many symbol errors are seen")
    p.add_argument("--rate", type=int, default=32)
    p.add_argument("--allow-isi", action="store_true")

    p = sub.add_parser("gain", parents=[common],
                       help="optical power gain curves")
    p.add_argument("--scenario", required=True, choices=gains.SCENARIOS)
    p.add_argument("--pulse", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--m", default="2")
    p.add_argument("--receiver", choices=link.RECEIVERS, default=None,
                   help="default: every receiver valid for the pulse")
    p.add_argument("--perr", type=float, default=1e-6, dest="p_err")

    p = sub.add_parser("reproduce", help="emit a shipped dataset")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out-dir",
                   default=os.environ.get("IMDD_OUT_DIR", "."))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    cfg.pulse_set = _parse_pulse_list(args.pulse)
    cfg.alphas = _parse_alpha_grid(args.alpha)
    cfg.m_values = _parse_m_list(args.m)
    cfg.fmt = args.format
    cfg.ts = args.ts
    cfg.seed = args.seed
    cfg.output = args.output or os.path.join(
        args.out_dir, f"{args.command}.{args.format}")
    for name in ("scenario", "receiver", "p_err", "a", "n0", "n_symbols",
                 "target", "rate", "n_traces", "grid_n", "tail_tol",
                 "allow_isi"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if cfg.ts <= 0:
        raise DomainError("ts must be positive")
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reproduce":
            return reproduce(args.figure, args.out_dir, args.format)
        return run(_config_from_args(args))
    except (DomainError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalDivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
