"""Command-line interface.

Subcommands map one-to-one onto service operations (and onto the HTTP
endpoints when --server is given): derive, spectrum, sweep, ridge,
discriminator, compare-detectors. Results go to stdout or --output as JSON
or CSV with 9 significant digits by default; exit status is 0 on success,
1 on error, 2 when a scan completed but more than 20% of its points failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import httpx

from . import service
from .config import ConfigError, RunConfig, apply_overrides, load_config
from .hilbert import CapacityError
from .params import ParameterError
from .steadystate import SolverError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_WARNING = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="YAML or JSON configuration file")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides",
                        help="override any config scalar by dotted path "
                             "(e.g. --set cavity.finesse=1e5); repeatable")
    common.add_argument("--format", choices=("json", "csv"),
                        help="output format (default: csv for spectrum, else json)")
    common.add_argument("--output", metavar="PATH",
                        help="write results to a file instead of stdout")
    common.add_argument("--workers", type=int, metavar="N",
                        help="parallel workers for sweeps "
                             "(default: CAVISNR_WORKERS, else all cores)")
    common.add_argument("--server", metavar="URL",
                        help="send the request to a running service instead of "
                             "computing in-process")

    parser = argparse.ArgumentParser(
        prog="cavisnr",
        description="Single-atom detection SNR for driven optical cavities",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common],
                   help="derived rates and coupling-regime numbers")
    sub.add_parser("spectrum", parents=[common],
                   help="transmission spectrum over a probe scan")
    sub.add_parser("sweep", parents=[common],
                   help="SNR over a 1- or 2-axis parameter grid")
    sub.add_parser("ridge", parents=[common],
                   help="sweep plus the per-row optimum-flux trace")
    sub.add_parser("discriminator", parents=[common],
                   help="QE/false-count curves and p-sigma threshold")
    sub.add_parser("compare-detectors", parents=[common],
                   help="ideal / APD / heterodyne SNR versus flux")
    return parser


_COMMANDS: dict[str, tuple[Callable[[RunConfig], dict], str, str]] = {
    # name -> (service function, endpoint path, default format)
    "derive": (service.run_derive, "/derive", "json"),
    "spectrum": (service.run_spectrum, "/spectrum", "csv"),
    "sweep": (service.run_sweep, "/sweep", "json"),
    "ridge": (service.run_ridge, "/ridge", "json"),
    "discriminator": (service.run_discriminator, "/discriminator", "json"),
    "compare-detectors": (service.run_compare_detectors, "/compare-detectors", "json"),
}


def _make_client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=600.0)


def _fmt(value, precision: int) -> str:
    if value is None:
        return "nan"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int, str)):
        return str(value)
    return f"{value:.{precision}g}"


def _csv_rows(header: list[str], rows: list[list], precision: int) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v, precision) for v in row))
    return "\n".join(lines) + "\n"


def _sweep_csv(payload: dict, precision: int) -> str:
    axes = payload["axes"]
    snr = payload["tensors"]["snr"]
    valid = payload["valid"]
    names = [ax["name"] for ax in axes]
    if len(axes) == 1:
        header = [names[0], "snr", "valid"]
        values = axes[0]["values"]
        rows = [[values[i], snr[i], valid[i]] for i in range(len(values))]
    else:
        header = [names[0], names[1], "snr", "valid"]
        outer, inner = axes[0]["values"], axes[1]["values"]
        rows = []
        for i, x in enumerate(outer):
            for j, y in enumerate(inner):
                k = i * len(inner) + j
                rows.append([x, y, snr[k], valid[k]])
    return _csv_rows(header, rows, precision)


def _ridge_csv(payload: dict, precision: int) -> str:
    ridge = payload["ridge"]
    header = [ridge["outer_name"], f"{ridge['inner_name']}_at_max",
              f"{ridge['inner_name']}_refined", "max_objective", "gap"]
    rows = [
        [ridge["outer_values"][i], ridge["argmax_inner"][i],
         ridge["refined_inner"][i], ridge["max_objective"][i], ridge["gap"][i]]
        for i in range(len(ridge["outer_values"]))
    ]
    return _csv_rows(header, rows, precision)


def _discriminator_csv(payload: dict, precision: int) -> str:
    header = ["threshold", "quantum_efficiency", "false_rate"]
    rows = [
        [payload["thresholds"][i], payload["qe"][i], payload["false_rate"][i]]
        for i in range(len(payload["thresholds"]))
    ]
    return _csv_rows(header, rows, precision)


def _to_csv(command: str, payload: dict, precision: int) -> str:
    if command == "spectrum":
        return _csv_rows(payload["columns"], payload["rows"], precision)
    if command == "compare-detectors":
        return _csv_rows(payload["columns"], payload["rows"], precision)
    if command == "sweep":
        return _sweep_csv(payload, precision)
    if command == "ridge":
        return _ridge_csv(payload, precision)
    if command == "discriminator":
        return _discriminator_csv(payload, precision)
    if command == "derive":
        rows = [[k, v] for k, v in payload.items() if isinstance(v, (int, float))]
        return _csv_rows(["quantity", "value"], rows, precision)
    raise ValueError(f"no CSV projection for {command!r}")


def _derive_text(payload: dict) -> str:
    lines = [
        "cavity rates and coupling regime",
        f"  kappa        = {payload['kappa_rad_s']:.6g} rad/s "
        f"({payload['kappa_over_2pi_mhz']:.6g} MHz / 2pi; FWHM linewidth 2*kappa)",
        f"  FSR          = {payload['fsr_rad_s']:.6g} rad/s",
        f"  mode volume  = {payload['mode_volume_m3']:.6g} m^3",
        f"  g0           = {payload['g0_rad_s']:.6g} rad/s "
        f"({payload['g0_over_2pi_mhz']:.6g} MHz / 2pi)",
        f"  m0           = {payload['m0']:.6g}",
        f"  N0           = {payload['N0']:.6g}",
        f"  cooperativity= {payload['cooperativity']:.6g}",
    ]
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run_fn, endpoint, default_format = _COMMANDS[args.command]

    try:
        cfg = load_config(args.config)
        cfg = apply_overrides(cfg, args.overrides)
        if args.workers is not None:
            cfg = apply_overrides(cfg, [f"solver.workers={args.workers}"])
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    try:
        if args.server:
            with _make_client(args.server) as client:
                resp = client.post(endpoint, json=cfg.model_dump(mode="json"))
                if resp.status_code >= 400:
                    detail = resp.json().get("detail", resp.text) if resp.text else resp.reason_phrase
                    print(f"error: server returned {resp.status_code}: {detail}", file=sys.stderr)
                    return EXIT_ERROR
                payload = resp.json()
        else:
            payload = run_fn(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ParameterError, CapacityError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except httpx.HTTPError as exc:
        print(f"error: cannot reach server: {exc}", file=sys.stderr)
        return EXIT_ERROR

    fmt = args.format or cfg.output.format or default_format
    precision = cfg.output.precision
    if fmt == "csv":
        text = _to_csv(args.command, payload, precision)
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"

    if args.command == "derive":
        print(_derive_text(payload), file=sys.stderr, end="")

    out_path = args.output or cfg.output.path
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if payload.get("warning"):
        return EXIT_WARNING
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
