"""Command-line entry point.

``swarmct simulate | train | reconstruct | evaluate | check``

Settings come from a sectioned ``key: value`` file (``--config``), then the
``SWARMCT_OUTPUT_ROOT`` environment variable, then flags; later sources win.
Unknown sections or keys are rejected.  ``--set section.key=value`` overrides
any single setting.  Every random stream is derived from ``run.seed``.

Output layout under the root directory::

    corpus/manifest.tsv
    corpus/{train,test}/item_0000_{image,sino,v030}.raw (+ .hdr), item_0000_mask.pgm
    models/{srm,shd}.ckpt, models/{srm,shd}_metrics.tsv
    recon/<method>/v030/item_0000_{image,sino}.raw, item_0000_image.pgm, trace.txt
    eval/metrics.csv, eval/metrics_items.csv, eval/profile_v030.csv
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import checks, io, masks, metrics, phantoms, recon, score, sde, tomo
from .errors import ArgumentError, ConfigurationError, StorageError, SwarmError

log = logging.getLogger("swarmct")

ENV_ROOT = "SWARMCT_OUTPUT_ROOT"
ENV_THREADS = "SWARMCT_THREADS"

METHODS = ("fbp",) + recon.MODES


def _ints(text):
    return [int(v) for v in str(text).replace(",", " ").split()]


def _words(text):
    return [v for v in str(text).replace(",", " ").split()]


def _bool(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


SCHEMA = {
    "run": {"seed": (int, 0), "root": (str, "swarmct_out")},
    "phantoms": {"kind": (str, "random_ellipses"), "size": (int, 64), "count": (int, 40),
                 "test_count": (int, 8)},
    "geometry": {"n_angles": (int, 90), "detector_spacing": (float, 1.0)},
    "sampling": {"views": (_ints, [30]), "noise_std": (float, 0.0)},
    "masks": {"kind": (str, "random")},
    "schedule": {"sigma_min": (float, 0.01), "sigma_max_factor": (float, 50.0),
                 "n_steps": (int, 200)},
    "langevin": {"snr": (float, 0.16), "n_corrector_steps": (int, 1)},
    "train": {"n_iterations": (int, 500), "batch_size": (int, 8), "learning_rate": (float, 1e-3),
              "ema_decay": (float, 0.999), "channels": (_ints, [16, 32, 64, 96]),
              "emb_dim": (int, 64)},
    "recon": {"mode": (str, "swarm"), "merge_every_step": (_bool, False),
              "denoise_final": (_bool, True),
              "snapshot_every": (int, 0), "filter": (str, "ram-lak"),
              "srm_ckpt": (str, ""), "shd_ckpt": (str, "")},
    "evaluate": {"methods": (_words, ["fbp", "swarm"]), "profile_row": (int, -1)},
}

# fixed ids so adding a component never shifts the others' streams
COMPONENTS = {"phantoms_train": 1, "phantoms_test": 2, "masks": 3, "noise": 4, "srm": 5,
              "shd": 6, "recon": 7}


def derive_seed(root: int, component: str, *index: int) -> int:
    return int(np.random.SeedSequence([int(root), COMPONENTS[component], *index]).generate_state(1)[0])


class RunConfig(dict):
    """``{section: {key: value}}`` with schema defaults filled in."""

    def get(self, section, key):
        return self[section][key]

    @property
    def root(self) -> Path:
        return Path(self["run"]["root"])


def _convert(section, key, value):
    if section not in SCHEMA:
        raise ConfigurationError(f"unknown section [{section}]")
    if key not in SCHEMA[section]:
        raise ConfigurationError(f"unknown key {key!r} in section [{section}]")
    conv = SCHEMA[section][key][0]
    try:
        return conv(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"[{section}] {key}: {exc}") from None


def load_config(path=None, overrides=(), env=None) -> RunConfig:
    cfg = RunConfig({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})
    if path is not None:
        parser = configparser.ConfigParser(delimiters=(":", "="), comment_prefixes=("#", ";"),
                                           interpolation=None)
        parser.optionxform = str
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot read config {path}: {exc}") from exc
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config {path}: {exc}") from None
        for section in parser.sections():
            for key, value in parser.items(section):
                cfg[section][key] = _convert(section, key, value)
    env = os.environ if env is None else env
    if env.get(ENV_ROOT):
        cfg["run"]["root"] = env[ENV_ROOT]
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ArgumentError(f"--set expects section.key=value, got {item!r}")
        name, value = item.split("=", 1)
        section, key = name.split(".", 1)
        cfg[section.strip()][key.strip()] = _convert(section.strip(), key.strip(), value.strip())
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg["phantoms"]["count"] < 0 or cfg["phantoms"]["test_count"] < 0:
        raise ConfigurationError("phantom counts must be >= 0")
    n = cfg["geometry"]["n_angles"]
    views = cfg["sampling"]["views"]
    if not views or any(not 1 <= v <= n for v in views):
        raise ConfigurationError(f"sampling views {views} must lie in [1, {n}]")
    if cfg["recon"]["mode"] not in METHODS:
        raise ConfigurationError(f"recon mode must be one of {METHODS}")
    for m in cfg["evaluate"]["methods"]:
        if m not in METHODS + ("reference",):
            raise ConfigurationError(f"unknown evaluation method {m!r}")
    kind = cfg["masks"]["kind"]
    if kind != "random" and kind not in masks.KINDS:
        raise ConfigurationError(f"mask kind must be 'random' or one of {masks.KINDS}")


# ---------------------------------------------------------------------------
# shared pieces

def geometry(cfg) -> tomo.Geometry:
    return tomo.Geometry.for_image(cfg["phantoms"]["size"], cfg["geometry"]["n_angles"],
                                   detector_spacing=cfg["geometry"]["detector_spacing"])


def schedule(cfg) -> sde.NoiseSchedule:
    s = cfg["schedule"]
    # the samplers work on data normalised to unit max magnitude
    return sde.NoiseSchedule.for_data(1.0, s["sigma_min"], s["n_steps"], s["sigma_max_factor"])


def _item(split, i):
    return Path("corpus") / split / f"item_{i:04d}"


def _with_suffix(prefix: Path, name: str) -> Path:
    return prefix.with_name(f"{prefix.name}_{name}")


def _sparse_name(views):
    return f"v{views:03d}"


def _corpus_items(root: Path, split: str) -> list[Path]:
    folder = root / "corpus" / split
    items = sorted(folder.glob("item_*_sino.raw"))
    return [p.with_name(p.name[: -len("_sino.raw")]) for p in items]


def read_sparse(path):
    """Compact sparse sinogram and its sampling operator from a raw file."""
    rows, header = io.read_raw(path)
    try:
        full = int(header["full_angles"])
        kept = tuple(int(v) for v in header["kept_indices"].split(","))
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"{path} lacks full_angles/kept_indices") from exc
    return rows, tomo.SamplingOperator(full, kept)


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(cfg: RunConfig) -> list[str]:
    """Write phantoms, sinograms, sparse sinograms and masks; returns manifest lines."""
    root, seed = cfg.root, cfg["run"]["seed"]
    geo = geometry(cfg)
    views = cfg["sampling"]["views"]
    mask_kind = None if cfg["masks"]["kind"] == "random" else cfg["masks"]["kind"]
    lines = []
    for split, count in (("train", cfg["phantoms"]["count"]), ("test", cfg["phantoms"]["test_count"])):
        pseed = derive_seed(seed, f"phantoms_{split}")
        imgs = phantoms.make_phantoms(phantoms.PhantomSpec(
            cfg["phantoms"]["kind"], cfg["phantoms"]["size"], pseed, count)) if count else []
        for i, img in enumerate(imgs):
            prefix = _item(split, i)
            sino = tomo.forward_project(img, geo)
            io.write_raw(root / _with_suffix(prefix, "image.raw"), img, "image",
                         {"seed": pseed, "item": i})
            io.write_raw(root / _with_suffix(prefix, "sino.raw"), sino, "sinogram",
                         {"seed": pseed, "item": i})
            lines.append(f"{_with_suffix(prefix, 'image.raw')}\timage\t{pseed}\t{i}")
            lines.append(f"{_with_suffix(prefix, 'sino.raw')}\tsinogram\t{pseed}\t{i}")
            mseed = derive_seed(seed, "masks", i, split == "test")
            m = masks.generate_mask(masks.MaskSpec(mask_kind, rng_seed=mseed), sino.shape)
            io.write_mask_pgm(root / _with_suffix(prefix, "mask.pgm"), m)
            lines.append(f"{_with_suffix(prefix, 'mask.pgm')}\tmask\t{mseed}\t{i}")
            for v in views:
                op = tomo.SamplingOperator.uniform(geo.n_angles, v)
                nseed = derive_seed(seed, "noise", i, v, split == "test")
                rows = tomo.add_noise(tomo.subsample(sino, op), cfg["sampling"]["noise_std"], nseed)
                name = _with_suffix(prefix, _sparse_name(v) + ".raw")
                io.write_raw(root / name, rows, "sparse_sinogram", {
                    "full_angles": geo.n_angles,
                    "kept_indices": ",".join(map(str, op.kept_indices)),
                    "n_detectors": geo.n_detectors, "seed": nseed, "item": i})
                lines.append(f"{name}\tsparse_sinogram\t{nseed}\t{i}")
    text = "".join(line + "\n" for line in lines)
    io.atomic_write(root / "corpus" / "manifest.tsv", text.encode("utf-8"))
    log.info("simulate: wrote %d artifacts under %s", len(lines), root / "corpus")
    return lines


def _train_config(cfg, model):
    t = cfg["train"]
    return score.TrainConfig(learning_rate=t["learning_rate"], batch_size=t["batch_size"],
                             n_iterations=t["n_iterations"], rng_seed=derive_seed(cfg["run"]["seed"], model),
                             ema_decay=t["ema_decay"],
                             arch={"channels": t["channels"], "emb_dim": t["emb_dim"]})


def cmd_train(cfg: RunConfig, model: str) -> Path:
    """Train the SRM or SHD prior on the training split; returns the checkpoint path."""
    if model not in ("srm", "shd"):
        raise ArgumentError("model must be srm or shd")
    root = cfg.root
    items = _corpus_items(root, "train")
    if not items:
        raise StorageError(f"no training sinograms under {root / 'corpus' / 'train'}; run simulate first")
    data = np.stack([io.read_raw(_with_suffix(p, "sino.raw"))[0] for p in items])
    tcfg = _train_config(cfg, model)
    records = []
    sched = schedule(cfg)
    if model == "srm":
        kind = None if cfg["masks"]["kind"] == "random" else cfg["masks"]["kind"]
        params = score.train_srm(data, masks.MaskSpec(kind), tcfg, sched, log=records)
    else:
        params = score.train_shd(data, tcfg, sched, log=records)
    ckpt = root / "models" / f"{model}.ckpt"
    ckpt.parent.mkdir(parents=True, exist_ok=True)
    score.save_checkpoint(params, ckpt)
    text = "".join(r.line() + "\n" for r in records)
    io.atomic_write(root / "models" / f"{model}_metrics.tsv", text.encode("utf-8"))
    if records:
        log.info("train %s: %d iterations, final loss %.4f, %.1fs", model, len(records),
                 records[-1].loss, records[-1].wall_time)
    return ckpt


def _checkpoint(cfg, model):
    path = cfg["recon"][f"{model}_ckpt"] or str(cfg.root / "models" / f"{model}.ckpt")
    if not Path(path).is_file():
        raise StorageError(f"{model.upper()} checkpoint {path} not found; run train --model {model}")
    return path


def reconstruct_rows(rows, op, cfg, method, geo=None):
    """Run one method on compact measurements (optionally batched)."""
    geo = geo or geometry(cfg)
    size = cfg["phantoms"]["size"]
    if method == "fbp":
        angles = geo.angles[list(op.kept_indices)]
        flat = rows.reshape(-1, *rows.shape[-2:])
        imgs = np.stack([tomo.fbp(r, geo, size, cfg["recon"]["filter"], angles=angles) for r in flat])
        sinos = sde.full_measurement(flat, op, geo.n_detectors)
        return imgs.reshape(*rows.shape[:-2], size, size), sinos.reshape(*rows.shape[:-2], *geo.shape), None
    need_srm = method in ("swarm", "srm_only")
    need_shd = method in ("swarm", "shd_only")
    rc = recon.ReconConfig(
        op, geo, size,
        srm_ckpt=_checkpoint(cfg, "srm") if need_srm else None,
        shd_ckpt=_checkpoint(cfg, "shd") if need_shd else None,
        schedule=schedule(cfg),
        langevin=sde.LangevinConfig(cfg["langevin"]["snr"], cfg["langevin"]["n_corrector_steps"]),
        rng_seed=derive_seed(cfg["run"]["seed"], "recon"),
        snapshot_every=cfg["recon"]["snapshot_every"], mode=method,
        merge_every_step=cfg["recon"]["merge_every_step"], filter=cfg["recon"]["filter"],
        denoise_final=cfg["recon"]["denoise_final"])
    return recon.reconstruct(rows, rc)


def _write_outputs(prefix: Path, image, sino, extra):
    io.write_raw(_with_suffix(prefix, "image.raw"), image, "image", extra)
    io.write_raw(_with_suffix(prefix, "sino.raw"), sino, "sinogram", extra)
    io.write_pgm(_with_suffix(prefix, "image.pgm"), image, bits=16, lo=0.0, hi=1.0)


def _write_trace(path: Path, trace):
    if trace is None:
        return
    io.atomic_write(path, trace.to_text().encode("ascii"))
    for t, snap in trace.snapshots:
        io.write_raw(path.with_name(f"snapshot_t{t:04d}.raw"), snap.reshape(-1, snap.shape[-1]),
                     "sinogram" if snap.ndim == 2 else "array", {"t": t})


def cmd_reconstruct(cfg: RunConfig, method=None, input_path=None, output=None) -> list[Path]:
    """Reconstruct the test split (or a single ``input_path``); returns written prefixes."""
    method = method or cfg["recon"]["mode"]
    if method not in METHODS:
        raise ArgumentError(f"method must be one of {METHODS}")
    geo = geometry(cfg)
    if input_path is not None:
        rows, op = read_sparse(input_path)
        if op.full_angles != geo.n_angles or rows.shape[-1] != geo.n_detectors:
            raise ConfigurationError(
                f"input {input_path} has {op.full_angles}x{rows.shape[-1]} full-view shape, "
                f"configured geometry is {geo.shape}")
        image, sino, trace = reconstruct_rows(rows, op, cfg, method, geo)
        prefix = Path(output) if output else Path(input_path).with_suffix("")
        _write_outputs(prefix, image, sino, {"method": method})
        _write_trace(_with_suffix(prefix, "trace.txt"), trace)
        return [prefix]
    items = _corpus_items(cfg.root, "test")
    if not items:
        raise StorageError(f"no test items under {cfg.root / 'corpus' / 'test'}; run simulate first")
    written = []
    for v in cfg["sampling"]["views"]:
        rows, ops = zip(*(read_sparse(_with_suffix(p, _sparse_name(v) + ".raw")) for p in items))
        op = ops[0]
        if any(o != op for o in ops):
            raise ConfigurationError(f"test items disagree on the {v}-view sampling pattern")
        if op.full_angles != geo.n_angles or rows[0].shape[-1] != geo.n_detectors:
            raise ConfigurationError(
                f"stored sinograms are {op.full_angles}x{rows[0].shape[-1]}, "
                f"configured geometry is {geo.shape}")
        images, sinos, trace = reconstruct_rows(np.stack(rows), op, cfg, method, geo)
        out_dir = cfg.root / "recon" / method / _sparse_name(v)
        for p, img, sino in zip(items, images, sinos):
            prefix = out_dir / p.name
            _write_outputs(prefix, img, sino, {"method": method, "views": v})
            written.append(prefix)
        _write_trace(out_dir / "trace.txt", trace)
        log.info("reconstruct %s at %d views: %d items", method, v, len(items))
    return written


def cmd_evaluate(cfg: RunConfig, check_order=False):
    """Views x methods metric table; returns ``(rows, ordering_violations)``."""
    root = cfg.root
    items = _corpus_items(root, "test")
    if not items:
        raise StorageError(f"no test items under {root / 'corpus' / 'test'}")
    views = cfg["sampling"]["views"]
    methods = cfg["evaluate"]["methods"]
    missing, table, per_item = [], [], []
    results = {}
    for m in methods:
        for v in views:
            reps = []
            for p in items:
                ref_path = _with_suffix(p, "image.raw")
                ref = io.read_raw(ref_path)[0]
                if m == "reference":
                    img = ref
                else:
                    path = root / "recon" / m / _sparse_name(v) / (p.name + "_image.raw")
                    if not path.is_file():
                        missing.append(str(path))
                        continue
                    img = io.read_raw(path)[0]
                rep = metrics.evaluate(img, ref)
                reps.append(rep)
                per_item.append([v, m, p.name, f"{rep.psnr:.6f}", f"{rep.ssim:.6f}", f"{rep.mse_e3:.6f}"])
            if reps:
                psnr = float(np.mean([r.psnr for r in reps]))
                row = [v, m, f"{psnr:.4f}", f"{np.mean([r.ssim for r in reps]):.4f}",
                       f"{np.mean([r.mse_e3 for r in reps]):.4f}", len(reps)]
                table.append(row)
                results[(m, v)] = psnr
    if missing:
        raise StorageError("missing reconstructions:\n  " + "\n  ".join(missing))
    header = ["views", "method", "psnr", "ssim", "mse_e3", "n_items"]
    io.write_csv(root / "eval" / "metrics.csv", header, table)
    io.write_csv(root / "eval" / "metrics_items.csv",
                 ["views", "method", "item", "psnr", "ssim", "mse_e3"], per_item)
    row_idx = cfg["evaluate"]["profile_row"]
    if row_idx >= 0:
        ref = io.read_raw(_with_suffix(items[0], "image.raw"))[0]
        for v in views:
            cols, names = [metrics.profile_line(ref, "row", row_idx)], ["reference"]
            for m in methods:
                if m != "reference":
                    img = io.read_raw(root / "recon" / m / _sparse_name(v) / (items[0].name + "_image.raw"))[0]
                    cols.append(metrics.profile_line(img, "row", row_idx))
                    names.append(m)
            rows = [[x] + [f"{c[x]:.6f}" for c in cols] for x in range(len(cols[0]))]
            io.write_csv(root / "eval" / f"profile_{_sparse_name(v)}.csv", ["x"] + names, rows)
    violations = []
    if check_order:
        for m in methods:
            seq = [(v, results[(m, v)]) for v in sorted(views) if (m, v) in results]
            for (v1, a), (v2, b) in zip(seq, seq[1:]):
                if b < a:
                    violations.append(f"{m}: PSNR drops from {a:.3f} dB at {v1} views to {b:.3f} dB at {v2}")
    return header, table, violations


def cmd_check(only=None, quick=False) -> list[checks.CheckResult]:
    names = only or list(checks.ALL)
    out = []
    for name in names:
        if name not in checks.ALL:
            raise ArgumentError(f"unknown check {name!r}; choose from {sorted(checks.ALL)}")
        fn = checks.ALL[name]
        if quick:
            kwargs = {"wavelet": {"n_inputs": 20},
                      "inflation": {"repetitions": 3, "corpus_size": 50, "trials": 50,
                                    "cross_repetitions": 2, "pool": checks.sinogram_pool(120)},
                      "sampler": {"n_samples": 200, "n_steps": 50}}[name]
            out.append(fn(**kwargs))
        else:
            out.append(fn())
    return out


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="sectioned key: value settings file")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one setting (repeatable)")
    common.add_argument("--root", help="output root directory")
    common.add_argument("--seed", type=int, help="root seed for every random stream")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="swarmct", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="write a phantom/sinogram corpus")
    s.add_argument("--count", type=int, help="number of training items")
    s.add_argument("--test-count", type=int, help="number of test items")
    t = sub.add_parser("train", parents=[common], help="train the SRM or SHD prior")
    t.add_argument("--model", choices=("srm", "shd"), required=True)
    t.add_argument("--iterations", type=int)
    r = sub.add_parser("reconstruct", parents=[common], help="reconstruct sparse-view sinograms")
    r.add_argument("--method", choices=METHODS, help="overrides recon.mode")
    r.add_argument("--views", help="comma-separated view counts (overrides sampling.views)")
    r.add_argument("--input", help="single sparse sinogram (.raw with header) instead of the test split")
    r.add_argument("--output", help="output prefix for --input")
    e = sub.add_parser("evaluate", parents=[common], help="tabulate PSNR/SSIM/MSE")
    e.add_argument("--views", help="comma-separated view counts")
    e.add_argument("--methods", help="comma-separated methods (overrides evaluate.methods)")
    e.add_argument("--check-order", action="store_true",
                   help="exit nonzero unless PSNR is non-decreasing in view count for every method")
    c = sub.add_parser("check", help="run the property harnesses")
    c.add_argument("--only", action="append", choices=sorted(checks.ALL))
    c.add_argument("--quick", action="store_true", help="reduced sizes for a fast smoke run")
    c.add_argument("-v", "--verbose", action="store_true")
    return p


def _flag_overrides(args) -> list[str]:
    out = list(getattr(args, "set", []) or [])
    if getattr(args, "root", None):
        out.append(f"run.root={args.root}")
    if getattr(args, "seed", None) is not None:
        out.append(f"run.seed={args.seed}")
    if getattr(args, "count", None) is not None:
        out.append(f"phantoms.count={args.count}")
    if getattr(args, "test_count", None) is not None:
        out.append(f"phantoms.test_count={args.test_count}")
    if getattr(args, "iterations", None) is not None:
        out.append(f"train.n_iterations={args.iterations}")
    if getattr(args, "views", None):
        out.append(f"sampling.views={args.views}")
    if getattr(args, "methods", None):
        out.append(f"evaluate.methods={args.methods}")
    return out


def _set_threads(env):
    n = env.get(ENV_THREADS)
    if not n:
        return
    try:
        n = int(n)
    except ValueError:
        raise ConfigurationError(f"{ENV_THREADS} must be an integer, got {n!r}") from None
    import torch

    torch.set_num_threads(max(1, n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _set_threads(os.environ)
        if args.command == "check":
            results = cmd_check(args.only, args.quick)
            for res in results:
                print(res.line())
            return 0 if all(r.passed for r in results) else 1
        cfg = load_config(args.config, _flag_overrides(args))
        if args.command == "simulate":
            lines = cmd_simulate(cfg)
            print(f"{len(lines)} artifacts listed in {cfg.root / 'corpus' / 'manifest.tsv'}")
        elif args.command == "train":
            print(cmd_train(cfg, args.model))
        elif args.command == "reconstruct":
            written = cmd_reconstruct(cfg, args.method, args.input, args.output)
            print(f"{len(written)} reconstructions written")
        elif args.command == "evaluate":
            header, table, violations = cmd_evaluate(cfg, args.check_order)
            sys.stdout.write(io.aligned_text(header, table))
            for v in violations:
                print(f"ordering violation: {v}", file=sys.stderr)
            if violations:
                return 1
        return 0
    except SwarmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
