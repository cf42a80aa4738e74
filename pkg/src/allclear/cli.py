"""Command-line client for the restoration service.

Every subcommand issues a request against the HTTP API. Without
``--server`` the app runs in-process over an ASGI transport, so paths in
requests resolve on this machine and no server needs to be started;
with ``--server URL`` the same requests go to a remote instance.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric abort.
"""

import argparse
import json
import sys

EXIT_CODES = {"config_error": 2, "data_error": 3, "numeric_abort": 4}


def _client(server):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    # In-process: drive the ASGI app synchronously on this machine.
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DeprecationWarning)
        from starlette.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


def _request(args, path, payload):
    """POST and either return the JSON body or exit with the mapped code."""
    with _client(args.server) as client:
        response = client.post(path, json=payload)
    if response.status_code // 100 == 2:
        return response.json()
    try:
        body = response.json()
        code = EXIT_CODES.get(body.get("error_code"), 1)
        detail = body.get("detail", response.text)
    except ValueError:
        code, detail = 1, response.text
    print(f"error: {detail}", file=sys.stderr)
    raise SystemExit(code)


def _read_config(path):
    try:
        with open(path) as handle:
            return handle.read()
    except OSError as exc:
        print(f"error: cannot read config file {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _print_metrics(metrics):
    print(f"{'weather':<8} {'count':>6} {'psnr':>8} {'ssim':>7} {'base_psnr':>10} {'base_ssim':>10}")
    for tag in sorted(metrics["weathers"]):
        m = metrics["weathers"][tag]
        print(
            f"{tag:<8} {m['count']:>6d} {m['psnr']:>8.2f} {m['ssim']:>7.4f} "
            f"{m['baseline_psnr']:>10.2f} {m['baseline_ssim']:>10.4f}"
        )


def cmd_serve(args):
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_synth(args):
    body = _request(
        args,
        "/synth",
        {
            "out_dir": args.out,
            "n_per_weather": args.n,
            "image_size": args.image_size,
            "seed": args.seed,
        },
    )
    print(f"wrote {body['n_samples']} pairs ({', '.join(body['weathers'])})")
    print(f"manifest: {body['manifest_path']}")
    return 0


def cmd_train(args):
    body = _request(args, "/train", {"config_text": _read_config(args.config)})
    print(f"trained {body['steps']} steps, final loss {body['final_loss']:.4f}")
    print(f"checkpoint: {body['checkpoint_path']}")
    print(f"run log:    {body['log_path']}")
    _print_metrics(body["metrics"])
    return 0


def cmd_eval(args):
    body = _request(
        args,
        "/evaluate",
        {
            "checkpoint_path": args.checkpoint,
            "data_dir": args.data,
            "report_path": args.report,
        },
    )
    _print_metrics(body["metrics"])
    if body.get("report_path"):
        print(f"report: {body['report_path']}")
    return 0


def cmd_infer(args):
    body = _request(
        args,
        "/infer",
        {
            "checkpoint_path": args.checkpoint,
            "input_path": args.input,
            "output_path": args.output,
        },
    )
    print(f"restored {body['width']}x{body['height']} image -> {body['output_path']}")
    return 0


def cmd_ablate(args):
    body = _request(
        args,
        "/ablate",
        {"config_text": _read_config(args.config), "table_path": args.table},
    )
    header = f"{'variant':<30} {'params':>10} {'psnr':>8} {'ssim':>7} {'reference':>10}"
    print(header)
    print("-" * len(header))
    for row in body["rows"]:
        print(
            f"{row['name']:<30} {row['params']:>10d} {row['psnr']:>8.2f} "
            f"{row['ssim']:>7.4f} {row['reference_psnr']:>10.2f}"
        )
    if body.get("table_path"):
        print(f"table: {body['table_path']}")
    return 0


def cmd_amp_stats(args):
    body = _request(
        args,
        "/analyze/amp-stats",
        {
            "data_dir": args.data,
            "n_per_weather": args.n,
            "image_size": args.image_size,
            "seed": args.seed,
            "bins": args.bins,
            "out_path": args.out,
        },
    )
    print(f"profiles over {body['bins']} radial bins for: {', '.join(body['weathers'])}")
    if args.json:
        print(json.dumps({"radii": body["radii"], "mean": body["mean"]}, indent=2))
    if body.get("out_path"):
        print(f"table: {body['out_path']}")
    return 0


def cmd_amp_swap(args):
    body = _request(
        args,
        "/analyze/amp-swap",
        {
            "input_path": args.input,
            "gt_path": args.gt,
            "data_dir": args.data,
            "index": args.index,
            "out_dir": args.out,
        },
    )
    print(f"psnr vs clean: degraded {body['psnr_degraded']:.2f} dB, "
          f"clean-amplitude {body['psnr_clean_amplitude']:.2f} dB, "
          f"degraded-amplitude {body['psnr_degraded_amplitude']:.2f} dB")
    for name, path in body["image_paths"].items():
        print(f"  {name}: {path}")
    return 0


def cmd_features(args):
    body = _request(
        args,
        "/analyze/features",
        {
            "checkpoint_path": args.checkpoint,
            "data_dir": args.data,
            "n_per_weather": args.n,
            "image_size": args.image_size,
            "seed": args.seed,
            "layer": args.layer,
            "bins": args.bins,
            "out_path": args.out,
        },
    )
    print(
        f"dumped {body['n_rows']} rows (features dim {body['feature_dim']}, "
        f"amplitudes dim {body['amplitude_dim']}) -> {body['out_path']}"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="allclear",
        description="All-weather image restoration: training, evaluation and analysis.",
    )
    parser.add_argument(
        "--server",
        default="",
        help="URL of a running service (default: run the app in-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="generate a paired synthetic dataset on disk")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--n", type=int, default=10, help="pairs per weather type")
    p.add_argument("--image-size", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset folder")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="dataset folder (synth layout)")
    p.add_argument("--report", default=None, help="write <report>.json/.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("infer", help="restore a single image file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="input", required=True, help="input image (PNG)")
    p.add_argument("--out", dest="output", required=True, help="output image path")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("ablate", help="train all ablation variants and print the table")
    p.add_argument("--config", required=True)
    p.add_argument("--table", default=None, help="also write the table as CSV")
    p.set_defaults(func=cmd_ablate)

    analyze = sub.add_parser("analyze", help="amplitude statistics and feature dumps")
    asub = analyze.add_subparsers(dest="analysis", required=True)

    p = asub.add_parser("amp-stats", help="per-weather radial log-amplitude profiles")
    p.add_argument("--data", default=None, help="dataset folder (default: synthesize)")
    p.add_argument("--n", type=int, default=100, help="samples per weather when synthesizing")
    p.add_argument("--image-size", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--out", default=None, help="write the profile table as CSV")
    p.add_argument("--json", action="store_true", help="print profiles as JSON")
    p.set_defaults(func=cmd_amp_stats)

    p = asub.add_parser("amp-swap", help="swap Fourier amplitudes of a degraded/clean pair")
    p.add_argument("--in", dest="input", default=None, help="degraded image (PNG)")
    p.add_argument("--gt", default=None, help="clean image (PNG)")
    p.add_argument("--data", default=None, help="dataset folder instead of files")
    p.add_argument("--index", type=int, default=0, help="sample index within --data")
    p.add_argument("--out", required=True, help="directory for the four images")
    p.set_defaults(func=cmd_amp_swap)

    p = asub.add_parser("features", help="dump pooled features and amplitude profiles")
    p.add_argument("--checkpoint", default=None, help="needed for model layers")
    p.add_argument("--data", default=None, help="dataset folder (default: synthesize)")
    p.add_argument("--n", type=int, default=30)
    p.add_argument("--image-size", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layer", default="image",
                   help="image | encoder1..3 | bottleneck | decoder1..3")
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--out", required=True, help="output .npz path")
    p.set_defaults(func=cmd_features)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
