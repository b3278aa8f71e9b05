"""resonator-q: batch command-line front end.

Every command reads one JSON config, computes, and only then writes its
outputs (a report.json plus CSV curves) into the --out directory, so a
failing run leaves no partial files.  Reports contain no timestamps; reruns
with the same config and seed are byte-identical.  Wall time goes to stdout
only.

Exit codes: 0 ok, 2 input/data error, 3 numerical or convergence failure,
4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import clamping_loss, coupled_modes, intrinsic_loss, noise_spectra, quantum_budget
from .core import TWO_PI
from .errors import DataError, NumericalError, ResonatorQError

EXIT_OK = 0
EXIT_DATA = 2
EXIT_NUMERICAL = 3
EXIT_INTERNAL = 4


def _check_keys(cfg: dict, allowed: set[str], required: set[str], where: str):
    unknown = set(cfg) - allowed
    if unknown:
        raise DataError(f"unknown config key(s) in {where}: {sorted(unknown)}")
    missing = required - set(cfg)
    if missing:
        raise DataError(f"missing config key(s) in {where}: {sorted(missing)}")


def _require_file(path_str: str) -> Path:
    path = Path(path_str)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    return path


def _canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _report(command: str, config: dict, results: dict, warnings_list=None) -> dict:
    config_blob = _canonical_json(config)
    return {
        "command": command,
        "config": config,
        "config_sha256": hashlib.sha256(config_blob.encode()).hexdigest(),
        "results": results,
        "warnings": warnings_list or [],
    }


def _write_report(out_dir: Path, report: dict) -> None:
    blob = _canonical_json(report)
    report["report_sha256"] = hashlib.sha256(blob.encode()).hexdigest()
    (out_dir / "report.json").write_text(_canonical_json(report) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([x if isinstance(x, str) else repr(x) for x in row])


# ---------------------------------------------------------------- commands

def cmd_fit_crossing(config: dict, out_dir: Path, seed: int, validate: bool):
    _check_keys(config, {"data_csv", "windows", "polish", "curve_points"},
                {"data_csv", "windows"}, "fit-crossing")
    data_path = _require_file(config["data_csv"])
    windows = [(float(lo), float(hi)) for lo, hi in config["windows"]]
    if validate:
        coupled_modes.read_dispersion_csv(data_path)
        return None
    points = coupled_modes.read_dispersion_csv(data_path)
    fit = coupled_modes.fit_avoided_crossing(points, windows,
                                             polish=config.get("polish", True))
    u_grid = np.linspace(min(p.u for p in points), max(p.u for p in points),
                         int(config.get("curve_points", 200)))
    curves = coupled_modes.branch_curves(fit.model, u_grid)

    results = {
        "model": fit.model.to_dict(),
        "g_hz": fit.model.g / TWO_PI,
        "residual_norm": fit.residual_norm,
        "stage1_model": fit.stage1_model.to_dict(),
        "stage2_g_hz": fit.stage2_g / TWO_PI,
        "n_points": len(points),
    }
    files = {
        "model.json": lambda p: coupled_modes.write_model_json(p, fit.model),
        "residuals.csv": lambda p: _write_csv(
            p, ["u", "branch_assigned", "rel_residual_f", "rel_residual_q"],
            [(pt.u, asg, fit.per_point_residuals[2 * i],
              fit.per_point_residuals[2 * i + 1])
             for i, (pt, asg) in enumerate(zip(points, fit.assignments))]),
        "curves.csv": lambda p: _write_csv(
            p, ["u", "f_plus_hz", "q_plus", "f_minus_hz", "q_minus"],
            [(u, op / TWO_PI, qp, om / TWO_PI, qm)
             for u, op, qp, om, qm in curves]),
    }
    return results, files


def cmd_clamping(config: dict, out_dir: Path, seed: int, validate: bool):
    allowed = {"geometry", "undercuts", "refinement", "n_modes",
               "crossing_gap_rel"}
    _check_keys(config, allowed, {"geometry", "undercuts"}, "clamping")
    from .fem_axisym import ResonatorGeometry

    geometry = ResonatorGeometry.from_dict(config["geometry"])
    sweep_cfg = config["undercuts"]
    if isinstance(sweep_cfg, dict):
        _check_keys(sweep_cfg, {"start", "stop", "points"},
                    {"start", "stop", "points"}, "clamping.undercuts")
        undercuts = np.linspace(sweep_cfg["start"], sweep_cfg["stop"],
                                int(sweep_cfg["points"]))
    else:
        undercuts = np.asarray([float(u) for u in sweep_cfg])
    if validate:
        return None
    points = clamping_loss.undercut_sweep(
        geometry, undercuts,
        refinement=int(config.get("refinement", 2)),
        n_modes=int(config.get("n_modes", 5)),
        crossing_gap_rel=float(config.get("crossing_gap_rel", 0.08)))
    track = clamping_loss.breathing_mode_track(points)

    n_modes = len(points[0].frequencies_hz)
    header = ["u"] + [f"f{i}_hz" for i in range(n_modes)] \
        + [f"d{i}" for i in range(n_modes)] + ["near_crossing"]
    rows = []
    for p in points:
        d_cols = [d if d is not None else "unbounded" for d in p.d_values]
        rows.append([p.undercut, *p.frequencies_hz, *d_cols,
                     int(p.near_crossing)])
    results = {
        "n_sweep_points": len(points),
        "flagged_undercuts": [p.undercut for p in points if p.near_crossing],
        "breathing_mode": [
            {"u": u, "f_hz": f, "d": d} for (u, f, d) in track],
    }
    files = {
        "sweep.csv": lambda path: _write_csv(path, header, rows),
    }
    return results, files


def cmd_intrinsic_fit(config: dict, out_dir: Path, seed: int, validate: bool):
    allowed = {"data_csv", "f_hz", "priors", "tables_csv", "density",
               "curve_points"}
    _check_keys(config, allowed, {"data_csv", "f_hz"}, "intrinsic-fit")
    data_path = _require_file(config["data_csv"])
    if config.get("tables_csv") is not None:
        tables = intrinsic_loss.MaterialTables.from_csv(
            _require_file(config["tables_csv"]),
            density=float(config.get("density", 2203.0)))
    else:
        tables = intrinsic_loss.MaterialTables.fused_silica()
    priors = intrinsic_loss.tls_params_from_dict(config["priors"]) \
        if "priors" in config else intrinsic_loss.TlsParams.fused_silica()
    if validate:
        intrinsic_loss.read_temperature_csv(data_path)
        return None
    data = intrinsic_loss.read_temperature_csv(data_path)
    omega = TWO_PI * float(config["f_hz"])
    fit = intrinsic_loss.fit_temperature(data, omega, tables, priors)

    temps = np.geomspace(min(t for t, _ in data), max(t for t, _ in data),
                         int(config.get("curve_points", 120)))
    curve_rows = []
    for t in temps:
        budget = intrinsic_loss.total_damping(t, omega, fit.tls, tables,
                                              fit.q_cl_inverse)
        curve_rows.append((t, budget.total, budget.tls, budget.anharmonic,
                           budget.clamping))
    results = {
        "tls": intrinsic_loss.tls_params_to_dict(fit.tls),
        "q_cl_inverse": fit.q_cl_inverse,
        "cost": fit.cost,
        "n_points": len(data),
    }
    files = {
        "fit_curve.csv": lambda p: _write_csv(
            p, ["t_k", "q_inv_total", "q_inv_tls", "q_inv_anh", "q_inv_cl"],
            curve_rows),
        "residuals.csv": lambda p: _write_csv(
            p, ["t_k", "rel_residual"],
            [(t, r) for (t, _), r in zip(data, fit.residuals)]),
    }
    return results, files


def cmd_budget(config: dict, out_dir: Path, seed: int, validate: bool):
    allowed = {"design", "power_w", "gamma_c_hz", "sweep"}
    _check_keys(config, allowed, {"design", "power_w"}, "budget")
    design = quantum_budget.OptomechanicalDesign.from_dict(config["design"])
    if validate:
        return None
    power = float(config["power_w"])
    kappa = quantum_budget.cavity_linewidth(design)
    results = {
        "kappa_hz": kappa / TWO_PI,
        "backaction_ratio": quantum_budget.backaction_ratio(design, power),
        "power_for_unity_w": quantum_budget.power_for_unity(design),
        "resolved_sideband": quantum_budget.resolved_sideband(design),
    }
    if "gamma_c_hz" in config:
        gamma_c = TWO_PI * float(config["gamma_c_hz"])
        results["cooling_occupancy"] = quantum_budget.cooling_occupancy(
            design.bath_temperature, design.mechanical_q, gamma_c)

    files = {}
    if "sweep" in config:
        sweep = config["sweep"]
        _check_keys(sweep, {"variable", "start", "stop", "points"},
                    {"variable", "start", "stop", "points"}, "budget.sweep")
        var = sweep["variable"]
        if var not in ("power_w", "bath_temperature_k"):
            raise DataError(f"budget sweep variable must be power_w or "
                            f"bath_temperature_k, got {var!r}")
        grid = np.linspace(float(sweep["start"]), float(sweep["stop"]),
                           int(sweep["points"]))
        rows = []
        for val in grid:
            if var == "power_w":
                ratio = quantum_budget.backaction_ratio(design, float(val))
            else:
                d = quantum_budget.OptomechanicalDesign.from_dict(
                    {**design.to_dict(), "bath_temperature_k": float(val)})
                ratio = quantum_budget.backaction_ratio(d, power)
            rows.append((val, ratio))
        files["sweep.csv"] = lambda p: _write_csv(
            p, [var, "backaction_ratio"], rows)
    return results, files


def cmd_spectrum_fit(config: dict, out_dir: Path, seed: int, validate: bool):
    _check_keys(config, {"data_csv", "window_hz"}, {"data_csv"}, "spectrum-fit")
    data_path = _require_file(config["data_csv"])
    if validate:
        noise_spectra.read_spectrum_csv(data_path)
        return None
    trace = noise_spectra.read_spectrum_csv(data_path)
    window = tuple(config["window_hz"]) if "window_hz" in config else None
    fit = noise_spectra.fit_lorentzian(trace, window=window)
    results = {
        "f_m_hz": fit.frequency_hz,
        "gamma_m_hz": fit.gamma_m / TWO_PI,
        "q": fit.q,
        "background_m2_per_hz": fit.background,
        "residual_norm": fit.residual_norm,
    }
    om = TWO_PI * trace.frequencies
    model = fit.amplitude / ((fit.omega_m**2 - om**2) ** 2
                             + fit.gamma_m**2 * om**2) + fit.background
    files = {
        "fit_curve.csv": lambda p: _write_csv(
            p, ["f_hz", "psd_model_m2_per_hz"],
            list(zip(trace.frequencies, model))),
    }
    return results, files


def cmd_gas_fit(config: dict, out_dir: Path, seed: int, validate: bool):
    _check_keys(config, {"data_csv", "crossover_guess_mbar"}, {"data_csv"},
                "gas-fit")
    data_path = _require_file(config["data_csv"])

    def read_points(path):
        pts = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) != {"p_mbar", "q"}:
                raise DataError(f"expected CSV header p_mbar,q got {reader.fieldnames}")
            for row in reader:
                pts.append((float(row["p_mbar"]), float(row["q"])))
        if not pts:
            raise DataError(f"CSV {path} contains no data rows")
        return pts

    if validate:
        read_points(data_path)
        return None
    points = read_points(data_path)
    fit = noise_spectra.fit_gas_damping(
        points, crossover_guess=float(config.get("crossover_guess_mbar", 1.0)))
    results = {
        "q_intrinsic": fit.q_intrinsic,
        "c_molecular_per_mbar": fit.c_molecular,
        "c_viscous_per_sqrt_mbar": fit.c_viscous,
        "crossover_mbar": fit.crossover_mbar,
        "gas_fraction_at_1mbar": fit.gas_fraction_at_1mbar,
        "negligible_below_1mbar": fit.negligible_below_1mbar,
    }
    grid = np.geomspace(min(p for p, _ in points), max(p for p, _ in points), 200)
    files = {
        "fit_curve.csv": lambda path: _write_csv(
            path, ["p_mbar", "q_model"],
            [(p, 1.0 / q_inv) for p, q_inv in zip(grid, fit.q_inverse(grid))]),
    }
    return results, files


def cmd_solve_modes(config: dict, out_dir: Path, seed: int, validate: bool):
    allowed = {"geometry", "refinement", "n_modes", "shift_f_hz",
               "export_fields"}
    _check_keys(config, allowed, {"geometry"}, "solve-modes")
    from . import fem_axisym

    geometry = fem_axisym.ResonatorGeometry.from_dict(config["geometry"])
    if validate:
        return None
    shift = (TWO_PI * float(config["shift_f_hz"])) ** 2 \
        if "shift_f_hz" in config else 0.0
    mesh, modes = fem_axisym.modal_analysis(
        geometry, refinement=int(config.get("refinement", 2)),
        n_modes=int(config.get("n_modes", 6)), shift=shift)
    silica = fem_axisym.load_default_materials()["silica"]
    summaries = []
    for m in modes:
        entry = fem_axisym.mode_summary(m)
        est = clamping_loss.compute_d(m, silica)
        entry["d"] = est.d_value
        entry["d_unbounded"] = est.unbounded
        summaries.append(entry)
    results = {
        "n_nodes": mesh.n_nodes,
        "n_elements": mesh.n_elements,
        "modes": summaries,
    }
    files = {
        "mesh.txt": lambda p: fem_axisym.write_mesh_text(p, mesh),
        "modes.json": lambda p: fem_axisym.write_mode_summary_json(p, modes),
    }
    if config.get("export_fields", False):
        for i, mode in enumerate(modes):
            files[f"mode_{i:02d}.csv"] = \
                (lambda mm: lambda p: fem_axisym.write_mode_csv(p, mesh, mm))(mode)
    return results, files


COMMANDS = {
    "fit-crossing": cmd_fit_crossing,
    "clamping": cmd_clamping,
    "intrinsic-fit": cmd_intrinsic_fit,
    "budget": cmd_budget,
    "spectrum-fit": cmd_spectrum_fit,
    "gas-fit": cmd_gas_fit,
    "solve-modes": cmd_solve_modes,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="resonator-q",
        description="Mechanical dissipation modeling for on-chip resonators")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed")
    parser.add_argument("--validate-only", action="store_true",
                        help="check inputs and exit without computing")
    args = parser.parse_args(argv)

    t_start = time.perf_counter()
    try:
        config_path = Path(args.config)
        if not config_path.is_file():
            raise DataError(f"config file not found: {config_path}")
        try:
            config = json.loads(config_path.read_text())
        except json.JSONDecodeError as exc:
            raise DataError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise DataError("config must be a JSON object")

        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)

        outcome = COMMANDS[args.command](config, out_dir, args.seed,
                                         args.validate_only)
        if args.validate_only:
            print(f"{args.command}: config and inputs valid")
            return EXIT_OK
        results, files = outcome
        results["seed"] = args.seed
        for name, writer in files.items():
            writer(out_dir / name)
        report = _report(args.command, config, results)
        _write_report(out_dir, report)
        elapsed = time.perf_counter() - t_start
        print(f"{args.command}: ok in {elapsed:.2f}s -> "
              f"{out_dir / 'report.json'}")
        return EXIT_OK
    except DataError as exc:
        _emit_error(exc, EXIT_DATA)
        return EXIT_DATA
    except NumericalError as exc:
        _emit_error(exc, EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except ResonatorQError as exc:
        _emit_error(exc, EXIT_INTERNAL)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        _emit_error(exc, EXIT_INTERNAL)
        return EXIT_INTERNAL


def _emit_error(exc: Exception, code: int) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc),
                         "exit_code": code}}
    print(json.dumps(payload, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
