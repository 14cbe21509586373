"""Command-line client: posts configs to the service, writes result files.

By default the service runs in process over an ASGI transport, so no
server needs to be up; ``--server URL`` points the same client at a
remote instance instead.  Tabular results are written as CSV (or JSON
with ``--format json``), reports as JSON; every file embeds the
provenance of the run and is written atomically.

Exit codes: 0 success, 2 config/validation error, 3 model-range or
runtime error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from . import __version__
from .io import write_csv, write_json
from .service import create_app

COMMANDS = ("characterize", "locking", "calibrate", "rc", "budget")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _seed_u64(value: str) -> int:
    try:
        seed = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from exc
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcselrc",
        description="Laser-array reservoir toolkit: characterize, locking, calibrate, rc, budget.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "characterize": "LI sweep and spontaneous-coupling response curves for one device",
        "locking": "locking boundaries, bias-slope widths and a synthetic detuning map",
        "calibrate": "sample an array, report homogeneity, calibrate to a target, sweep trends",
        "rc": "run a reservoir benchmark task and report NMSE metrics",
        "budget": "per-device and array power/energy accounting",
    }
    for verb in COMMANDS:
        p = sub.add_parser(verb, help=helps[verb])
        p.add_argument("--config", type=Path, default=None, help="JSON config file (defaults apply if omitted)")
        p.add_argument("--seed", type=_seed_u64, default=None, help="override the config seed (u64)")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv", dest="fmt",
                       help="tabular output format")
        p.add_argument("--server", default=None,
                       help="base URL of a running service; default executes in process")
    return parser


def _error(kind: str, message: str) -> None:
    print(json.dumps({"error": {"kind": kind, "message": message}}), file=sys.stderr)


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        payload = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")
    return payload


class ConfigError(ValueError):
    pass


def _post(server: str | None, command: str, config: dict) -> httpx.Response:
    """POST the config to the service, remote or in process."""
    if server:
        with httpx.Client(base_url=server.rstrip("/"), timeout=300.0) as client:
            return client.post(f"/v1/{command}", json=config)

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://vcselrc.local", timeout=300.0
        ) as client:
            return await client.post(f"/v1/{command}", json=config)

    return asyncio.run(go())


def _write_table(out: Path, stem: str, columns, rows, prov: dict, fmt: str) -> Path:
    """columns: (csv_column_name, response_key) pairs; units live in the names."""
    named = [{name: row[key] for name, key in columns} for row in rows]
    if fmt == "json":
        return write_json(out / f"{stem}.json", {"rows": named}, prov)
    return write_csv(
        out / f"{stem}.csv",
        [name for name, _ in columns],
        ([r[name] for name, _ in columns] for r in named),
        prov,
    )


def _write_characterize(payload: dict, out: Path, fmt: str) -> tuple[list[Path], str]:
    prov = payload["provenance"]
    files = [
        _write_table(out, "li_curve",
                     [("current_mA", "current_ma"), ("power_mW", "power_mw")],
                     payload["li_table"], prov, fmt),
        _write_table(out, "beta_scurve",
                     [("beta", "beta"), ("pump", "pump"), ("output", "output")],
                     payload["scurve_table"], prov, fmt),
        write_json(out / "characterize_summary.json", {"fit": payload["fit"]}, prov),
    ]
    fit = payload["fit"]
    note = (f"fitted threshold {fit['i_th_ma']:.4f} mA, "
            f"slope {fit['slope_eff_w_per_a']:.4f} W/A")
    return files, note


def _write_locking(payload: dict, out: Path, fmt: str) -> tuple[list[Path], str]:
    prov = payload["provenance"]
    files = [
        _write_table(out, "locking_boundaries",
                     [("sqrt_ratio", "sqrt_ratio"), ("lower_GHz", "lower_ghz"),
                      ("upper_GHz", "upper_ghz")],
                     payload["boundary_table"], prov, fmt),
        _write_table(out, "locking_widths",
                     [("bias_mA", "bias_ma"),
                      ("slope_GHz_per_sqrt_ratio", "slope_ghz_per_sqrt_ratio"),
                      ("slave_power_mW", "slave_power_mw"),
                      ("injected_mW", "injected_mw"),
                      ("width_GHz", "width_ghz")],
                     payload["width_table"], prov, fmt),
        _write_table(out, "locking_map",
                     [("detuning_GHz", "detuning_ghz"), ("freq_GHz", "freq_ghz"),
                      ("intensity", "intensity")],
                     payload["map_table"], prov, fmt),
        write_json(out / "locking_summary.json",
                   {"boundary_fit": payload["boundary_fit"],
                    "power_ratio": payload["power_ratio"],
                    "width_at_ratio_ghz": payload["width_at_ratio_ghz"]},
                   prov),
    ]
    note = (f"power ratio {payload['power_ratio']:.3f}, "
            f"width {payload['width_at_ratio_ghz']:.2f} GHz")
    return files, note


def _write_calibrate(payload: dict, out: Path, fmt: str) -> tuple[list[Path], str]:
    prov = payload["provenance"]
    summary = payload["calibration_summary"]
    hom = payload["homogeneity"]
    files = [
        _write_table(out, "homogeneity",
                     [("row", "row"), ("col", "col"), ("lambda_nm", "lambda_nm")],
                     hom["table"], prov, fmt),
        _write_table(out, "calibration",
                     [("row", "row"), ("col", "col"), ("current_uA", "current_ua"),
                      ("power_mW", "power_mw"), ("lambda_nm", "lambda_nm")],
                     payload["calibration_table"], prov, fmt),
        _write_table(out, "sweep",
                     [("target_nm", "target_nm"),
                      ("mean_current_uA", "mean_current_ua"),
                      ("sd_current_uA", "sd_current_ua"),
                      ("span_current_uA", "span_current_ua"),
                      ("mean_power_uW", "mean_power_uw"),
                      ("sd_power_uW", "sd_power_uw"),
                      ("span_power_uW", "span_power_uw"),
                      ("rel_power_dev", "rel_power_dev"),
                      ("n_converged", "n_converged"),
                      ("n_failed", "n_failed")],
                     payload["sweep_table"], prov, fmt),
        write_json(out / "calibrate_summary.json",
                   {"homogeneity": {k: v for k, v in hom.items() if k != "table"},
                    "calibration": summary,
                    "array": payload["array"]},
                   prov),
    ]
    note = (f"mean current {summary['mean_current_ma']:.3f} mA at "
            f"{summary['target_nm']} nm, {summary['n_converged']} devices converged")
    return files, note


def _write_rc(payload: dict, out: Path, fmt: str) -> tuple[list[Path], str]:
    prov = payload["provenance"]
    metrics = payload["metrics"]
    trace = payload["states_trace"]
    n = metrics["n_nodes"]
    columns = [("t", "t")] + [(f"x{k:02d}", f"x{k:02d}") for k in range(n)]
    rows = [
        {"t": t, **{f"x{k:02d}": x for k, x in enumerate(state)}}
        for t, state in enumerate(trace)
    ]
    files = [
        write_json(out / "rc_metrics.json",
                   {"metrics": metrics, "active": payload["active"]}, prov),
        _write_table(out, "rc_states", columns, rows, prov, fmt),
    ]
    note = (f"{metrics['task']}: test NMSE {metrics['nmse_test']:.4f} "
            f"({metrics['n_active']}/{n} nodes active)")
    return files, note


def _write_budget(payload: dict, out: Path, fmt: str) -> tuple[list[Path], str]:
    prov = payload["provenance"]
    report = payload["report"]
    files = [write_json(out / "budget.json", {"report": report}, prov)]
    note = (f"array {report['array_total_mw']:.3f} mW, "
            f"{report['array_energy_pj']:.4f} pJ per transform")
    return files, note


_WRITERS = {
    "characterize": _write_characterize,
    "locking": _write_locking,
    "calibrate": _write_calibrate,
    "rc": _write_rc,
    "budget": _write_budget,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
    except ConfigError as exc:
        _error("ConfigError", str(exc))
        return EXIT_CONFIG
    if args.seed is not None:
        config["seed"] = args.seed
    try:
        resp = _post(args.server, args.command, config)
    except httpx.HTTPError as exc:
        _error("TransportError", str(exc))
        return EXIT_RUNTIME
    if resp.status_code == 422:
        _error("ValidationError", json.dumps(resp.json().get("detail", resp.text)))
        return EXIT_CONFIG
    if resp.status_code != 200:
        try:
            body = resp.json()
        except json.JSONDecodeError:
            body = {"error": {"kind": "HTTPError", "message": resp.text}}
        print(json.dumps(body), file=sys.stderr)
        return EXIT_RUNTIME
    files, note = _WRITERS[args.command](resp.json(), args.out, args.fmt)
    for f in files:
        print(f)
    print(note)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
