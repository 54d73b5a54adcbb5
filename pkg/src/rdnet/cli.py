"""Subcommand CLI: simulate, dsp, deinterleave, train, eval, flops, ablate.

Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numerical failure.
Failures print exactly one machine-parsable line to stderr:

    error: kind=<ExceptionName> msg=<text>

Heavy imports happen inside the command handlers so --threads can pin the
BLAS thread count through the environment before numpy loads.
"""

from __future__ import annotations

import argparse
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")


def _load_validated(args):
    from .config import load_config, preset, validate

    if getattr(args, "config", None) and getattr(args, "preset", None):
        from .errors import InvalidConfig
        raise InvalidConfig("give either --config or --preset, not both")
    if getattr(args, "config", None):
        return validate(load_config(args.config))
    if getattr(args, "preset", None):
        return validate(preset(args.preset))
    from .errors import InvalidConfig
    raise InvalidConfig("a radar config is required: --config PATH or --preset NAME")


def _add_config_args(p):
    p.add_argument("--config", help="radar config JSON")
    p.add_argument("--preset", help="built-in radar config (paper or toy)")


def cmd_simulate(args):
    import numpy as np

    from .simulate import load_scene, synthesize_adc
    from .tensorfile import write_tensor

    cfg = _load_validated(args)
    scene = load_scene(args.scene)
    env_seed = os.environ.get("RDNET_SEED")
    if env_seed is not None:
        import dataclasses

        from .errors import InvalidConfig
        try:
            seed = int(env_seed)
        except ValueError:
            raise InvalidConfig(f"RDNET_SEED={env_seed!r} is not an integer")
        scene = dataclasses.replace(scene, seed=seed)
    frame = synthesize_adc(scene, cfg)
    write_tensor(args.out, frame.samples.astype(np.complex64))
    return 0


def _read_frame(path, cfg):
    import numpy as np

    from .errors import FormatError, NumericalFailure
    from .simulate import AdcFrame
    from .tensorfile import read_tensor

    samples = read_tensor(path)
    expected = (cfg.n_rx, cfg.b_d, cfg.b_r)
    if samples.shape != expected:
        raise FormatError(f"{path}: shape {samples.shape} != {expected}")
    if not np.isfinite(samples).all():
        raise NumericalFailure(f"{path}: non-finite samples")
    return AdcFrame(samples=samples.astype(np.complex128), config=cfg)


def cmd_dsp(args):
    import numpy as np

    from .dsp import (build_ra_map, extract_point_cloud, point_cloud_to_csv,
                      range_doppler_transform)
    from .simulate import calibration_matrix
    from .tensorfile import atomic_write_text, write_tensor

    cfg = _load_validated(args)
    frame = _read_frame(args.infile, cfg)
    rd = range_doppler_transform(frame, window=args.window)
    write_tensor(args.out, rd.data.astype(np.complex64))
    if args.pointcloud or args.ra:
        calib = calibration_matrix(cfg)
        if args.pointcloud:
            points = extract_point_cloud(rd, calib, guard=args.cfar_guard,
                                         train=args.cfar_train,
                                         scale=args.cfar_scale)
            atomic_write_text(args.pointcloud, point_cloud_to_csv(points))
        if args.ra:
            write_tensor(args.ra, build_ra_map(rd, calib))
    return 0


def cmd_deinterleave(args):
    import numpy as np

    from .dsp import RdTensor
    from .errors import FormatError, NumericalFailure
    from .mimo import deinterleave
    from .tensorfile import read_tensor, write_tensor

    cfg = _load_validated(args)
    data = read_tensor(args.infile)
    expected = (cfg.b_r, cfg.b_d, cfg.n_rx)
    if data.shape != expected:
        raise FormatError(f"{args.infile}: shape {data.shape} != {expected}")
    rd = RdTensor(data=data.astype(np.complex128), config=cfg)
    out = deinterleave(rd)
    write_tensor(args.out, out.data.astype(np.float32))

    if args.check_conv:
        from .mimo import atrous_equivalence_weights, stack_real_imag
        from .nn.layers import Conv2d

        conv = Conv2d(2 * cfg.n_rx, 2 * cfg.n_tx * cfg.n_rx, (1, cfg.n_tx),
                      dilation=(1, cfg.dilation),
                      padding=((0, 0), (0, (cfg.n_tx - 1) * cfg.dilation)),
                      pad_mode="circular", bias=False, dtype=np.float64)
        conv.w.value[...] = atrous_equivalence_weights(cfg)
        stacked = stack_real_imag(rd.data)[None]
        via_conv = conv.forward(stacked)[0]
        diff = float(np.max(np.abs(via_conv - out.data)))
        if diff != 0.0:
            raise NumericalFailure(
                f"gather/convolution equivalence failed, max|diff|={diff}")
        print("check-conv: gather == one-hot dilated convolution (exact)")
    return 0


def cmd_train(args):
    import numpy as np

    from .checkpoint import save_checkpoint
    from .data import arrays_from_pairs, load_dataset
    from .nn.model import ModelSpec, build_fftradnet, load_spec
    from .nn.train import TrainConfig, fit, load_train_config, log_to_csv
    from .tensorfile import atomic_write_text

    cfg, pairs = load_dataset(args.dataset)
    spec = load_spec(args.spec) if args.spec else ModelSpec.toy()
    tc = load_train_config(args.train_config) if args.train_config \
        else TrainConfig(epochs=args.epochs or 30)
    if args.epochs:
        import dataclasses
        tc = dataclasses.replace(tc, epochs=args.epochs)

    dataset = arrays_from_pairs(pairs, cfg)
    model = build_fftradnet(spec, cfg, rng=np.random.default_rng(tc.seed))
    log_rows = []

    def progress(epoch, summary):
        print(f"epoch {epoch}: l_det={summary['l_det']:.4f} "
              f"l_free={summary['l_free']:.4f} l_mtl={summary['l_mtl']:.4f}")

    fit(model, dataset, tc, log_rows=log_rows, progress=progress)
    save_checkpoint(args.out, model)
    atomic_write_text(os.path.join(args.out, "train_log.csv"),
                      log_to_csv(log_rows))
    return 0


def cmd_eval(args):
    from .checkpoint import load_checkpoint
    from .data import arrays_from_pairs, load_dataset
    from .evaluate import evaluate_model
    from .metrics import detections_to_csv
    from .tensorfile import atomic_write_text

    model = load_checkpoint(args.model)
    cfg, pairs = load_dataset(args.dataset)
    if (cfg.b_r, cfg.b_a, cfg.b_d, cfg.n_rx) != (
            model.config.b_r, model.config.b_a, model.config.b_d,
            model.config.n_rx):
        from .errors import ConfigMismatch
        raise ConfigMismatch("dataset config incompatible with checkpoint")
    x, clas, reg, seg = arrays_from_pairs(pairs, cfg)
    truths = [[(t.range, t.azimuth) for t in scene.targets]
              for _, scene in pairs]
    report, detections = evaluate_model(model, x, clas, reg, seg, truths,
                                        threshold=args.threshold)
    atomic_write_text(args.report, report.to_json())
    if args.detections:
        atomic_write_text(args.detections, detections_to_csv(detections))
    print(f"ap={report.ap:.2f} ar={report.ar:.2f} f1={report.f1:.2f} "
          f"range_mae={report.range_mae:.3f} angle_mae={report.angle_mae:.3f} "
          f"miou={report.miou:.2f}")
    return 0


def cmd_flops(args):
    import json

    from .profiler import (flops_aoa, format_table, report_to_dict,
                           tensor_bytes)
    from .tensorfile import atomic_write_text

    cfg = _load_validated(args)
    n_cells = cfg.b_r * cfg.b_d
    b_a = args.b_a or cfg.b_a
    b_e = args.b_e or cfg.b_e

    full = flops_aoa(cfg, n_cells, b_a=b_a, b_e=b_e)
    single = flops_aoa(cfg, n_cells, b_a=b_a, b_e=1)
    reports = [
        {"method": "rd-tensor",
         "input_mb": tensor_bytes((cfg.b_r, cfg.b_d, 2 * cfg.n_rx), 4) / 2 ** 20,
         "aoa_gflops": 0.0, "report": None},
        {"method": "ra-map",
         "input_mb": tensor_bytes((cfg.b_r, cfg.b_a), 4) / 2 ** 20,
         "aoa_gflops": single.gflops, "report": single},
        {"method": "rd-angle-volume",
         "input_mb": tensor_bytes((cfg.b_r, cfg.b_d, b_a), 4) / 2 ** 20,
         "aoa_gflops": full.gflops, "report": full},
    ]
    model_row = None
    if args.model:
        from .nn.model import build_fftradnet, load_spec
        from .profiler import model_flops_params

        spec = load_spec(args.model)
        model = build_fftradnet(spec, cfg)
        model_report, params = model_flops_params(model)
        model_row = {"gflops": model_report.gflops, "params_m": params / 1e6,
                     "report": model_report}

    rows = []
    for r in reports:
        rows.append({"method": r["method"], "input_mb": r["input_mb"],
                     "params_m": None, "aoa_gflops": r["aoa_gflops"],
                     "model_gflops": None})
    if model_row is not None:
        rows[0]["params_m"] = model_row["params_m"]
        rows[0]["model_gflops"] = model_row["gflops"]
    print(format_table(rows), end="")
    assumptions = []
    candidates = [r["report"] for r in reports if r["report"] is not None]
    if model_row is not None:
        candidates.append(model_row["report"])
    for rep in candidates:
        for a in rep.assumptions:
            if a not in assumptions:
                assumptions.append(a)
    print("assumptions: " + "; ".join(assumptions))
    print("MB = 2^20 bytes")

    payload = {
        "config": {"b_r": cfg.b_r, "b_d": cfg.b_d, "b_a": b_a, "b_e": b_e,
                   "n_tx": cfg.n_tx, "n_rx": cfg.n_rx},
        "stages": [report_to_dict(r["report"])
                   for r in reports if r["report"] is not None],
        "inputs_mb": {r["method"]: r["input_mb"] for r in reports},
        "mb_definition": "MB = 2^20 bytes",
    }
    if model_row is not None:
        payload["model"] = report_to_dict(model_row["report"])
        payload["model"]["params"] = int(model_row["params_m"] * 1e6 + 0.5)
    if args.json:
        atomic_write_text(args.json, json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_ablate(args):
    import dataclasses

    import numpy as np

    from .data import arrays_from_pairs, load_dataset
    from .errors import BothZero, InvalidConfig
    from .evaluate import evaluate_model
    from .nn.model import ModelSpec, build_fftradnet, load_spec
    from .nn.train import TrainConfig, fit, load_train_config
    from .profiler import tensor_bytes
    from .tensorfile import atomic_write_text

    try:
        channels = [int(c) for c in args.channels.split(",") if c]
    except ValueError:
        raise InvalidConfig(f"bad --channels list: {args.channels!r}")
    if not channels:
        raise InvalidConfig("--channels list is empty")

    cfg, pairs = load_dataset(args.dataset)
    dataset = arrays_from_pairs(pairs, cfg)
    truths = [[(t.range, t.azimuth) for t in scene.targets]
              for _, scene in pairs]
    base = load_spec(args.spec) if args.spec else ModelSpec.toy()
    tc = load_train_config(args.train_config) if args.train_config \
        else TrainConfig(epochs=args.epochs, lr=1e-3)
    tc = dataclasses.replace(tc, epochs=args.epochs)

    lines = ["channels,f1,pre_encoder_bytes"]
    for ch in channels:
        spec = dataclasses.replace(base, pre_encoder_out_channels=ch)
        model = build_fftradnet(spec, cfg, rng=np.random.default_rng(tc.seed))
        fit(model, dataset, tc)
        x, clas, reg, seg = dataset
        report, _ = evaluate_model(model, x, clas, reg, seg, truths)
        footprint = tensor_bytes((ch, cfg.b_r, cfg.b_d), 4)
        lines.append(f"{ch},{report.f1:.4f},{footprint}")
        print(f"channels={ch} f1={report.f1:.2f} bytes={footprint}")
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rdnet",
        description="FMCW MIMO radar toolkit: simulation, DSP, and a "
                    "multi-task detection network on raw RD tensors")
    parser.add_argument("--threads", type=int, metavar="N",
                        help="BLAS/OpenMP thread count (set before numpy loads)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scene JSON to a raw ADC frame")
    _add_config_args(p)
    p.add_argument("--scene", required=True, help="scene JSON")
    p.add_argument("--out", required=True, help="output ADC tensor (.rdt)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dsp", help="ADC frame -> RD tensor (+ point cloud, RA map)")
    _add_config_args(p)
    p.add_argument("--in", dest="infile", required=True, help="ADC tensor (.rdt)")
    p.add_argument("--window", default="hann", choices=("rect", "hann"))
    p.add_argument("--out", required=True, help="output RD tensor (.rdt)")
    p.add_argument("--pointcloud", help="also write a point-cloud CSV")
    p.add_argument("--ra", help="also write a range-azimuth map (.rdt)")
    p.add_argument("--cfar-guard", type=int, default=2)
    p.add_argument("--cfar-train", type=int, default=6)
    p.add_argument("--cfar-scale", type=float, default=4.0)
    p.set_defaults(func=cmd_dsp)

    p = sub.add_parser("deinterleave",
                       help="gather Tx replicas into aligned channels")
    _add_config_args(p)
    p.add_argument("--in", dest="infile", required=True, help="RD tensor (.rdt)")
    p.add_argument("--out", required=True, help="output channel tensor (.rdt)")
    p.add_argument("--check-conv", action="store_true",
                   help="verify the dilated-convolution equivalence")
    p.set_defaults(func=cmd_deinterleave)

    p = sub.add_parser("train", help="train the network on a dataset directory")
    p.add_argument("--dataset", required=True,
                   help="directory of NNNNN.rdt/NNNNN.json pairs + config.json")
    p.add_argument("--spec", help="model spec JSON (default: toy spec)")
    p.add_argument("--train-config", help="training config JSON")
    p.add_argument("--epochs", type=int, help="override the epoch count")
    p.add_argument("--out", required=True, help="checkpoint directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--model", required=True, help="checkpoint directory")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--detections", help="optional detections CSV")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("flops", help="analytic complexity report")
    _add_config_args(p)
    p.add_argument("--b-a", type=int, help="azimuth bins for the AoA sweep")
    p.add_argument("--b-e", type=int, help="elevation bins for the AoA sweep")
    p.add_argument("--model", help="model spec JSON to price as well")
    p.add_argument("--json", help="write the JSON report here")
    p.set_defaults(func=cmd_flops)

    p = sub.add_parser("ablate",
                       help="sweep pre-encoder channels, emit f1 + footprint")
    p.add_argument("--channels", required=True, help="comma list, e.g. 24,48,96")
    p.add_argument("--dataset", required=True, help="dataset directory")
    p.add_argument("--spec", help="base model spec JSON (default: toy spec)")
    p.add_argument("--train-config", help="training config JSON")
    p.add_argument("--epochs", type=int, default=2)
    p.add_argument("--out", required=True, help="output CSV")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads:
        if args.threads < 1:
            print("error: kind=InvalidConfig msg=--threads must be >= 1",
                  file=sys.stderr)
            return 2
        for var in _THREAD_VARS:
            os.environ.setdefault(var, str(args.threads))

    from .errors import NumericalFailure, RdnetError
    try:
        return args.func(args)
    except NumericalFailure as exc:
        _print_error(exc)
        return 4
    except RdnetError as exc:
        _print_error(exc)
        return 2
    except OSError as exc:
        _print_error(exc)
        return 3


def _print_error(exc):
    msg = " ".join(str(exc).split())
    print(f"error: kind={type(exc).__name__} msg={msg}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
