"""Command-line front end.

Subcommands:

    tokenize   manifest -> token file, prints compression statistics
    dpo-loss   batch file -> loss report, optional gradient check
    templates  answer corpus -> template frequency table and coverage
    synth      generate a synthetic scene with known ground truth
    inspect    validate a token file and print its header

Exit codes: 0 success, 1 input error, 2 empty scene, 3 numeric
validation failure. Successful runs write nothing to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .condense import DEFAULT_MAX_TOKENS
from .dpo import (
    SceneDPOConfig,
    accuracy_metrics,
    finite_difference_check,
    grad,
    load_batch_file,
    loss,
)
from .errors import CfgridError, InputError, NumericValidationError
from .manifest import load_manifest
from .pipeline import tokenize_scene
from .positional import DEFAULT_ROPE_BASE
from .synth import generate_scene
from .templates import TemplateRules, top_k_coverage
from .tokenfile import TokenFileData
from .voxels import DEFAULT_VOXEL_SIZE

GRAD_CHECK_TOL = 1e-6


def _cmd_tokenize(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    manifest = manifest.with_overrides(
        voxel_size=args.voxel_size,
        max_tokens=args.max_tokens,
        rope_base=args.rope_base,
        fourier_seed=args.fourier_seed,
        fourier_weights=args.fourier_weights,
    )
    result = tokenize_scene(manifest)
    output = Path(args.output) if args.output else Path(args.manifest).parent / "tokens.cftk"
    result.token_file.write(output)
    stats = result.stats
    print(f"tokens {stats.token_count}")
    print(f"voxels {stats.voxel_count}")
    print(f"compression_rate {stats.compression_rate!r}")
    print(f"preservation_rate {stats.preservation_rate!r}")
    print(f"wrote {output}")
    return 0


def _cmd_dpo_loss(args: argparse.Namespace) -> int:
    batch = load_batch_file(args.batch)
    cfg = SceneDPOConfig(
        w_a=args.w_a,
        w_s=args.w_s,
        beta_a=args.beta_a,
        beta_s=args.beta_s,
        reference_free=not args.referenced,
    )
    total, l_a, l_s, l_nll = loss(batch, cfg)
    answer_acc, scene_acc = accuracy_metrics(batch)
    print(f"total {total!r}")
    print(f"L_a {l_a!r}")
    print(f"L_s {l_s!r}")
    print(f"L_nll {l_nll!r}")
    print(f"answer_acc {answer_acc!r}")
    print(f"scene_acc {scene_acc!r}")
    if args.grad:
        d_pos, d_negans, d_negscene = grad(batch, cfg)
        for n in range(len(batch)):
            print(f"grad {n} {float(d_pos[n])!r} {float(d_negans[n])!r} {float(d_negscene[n])!r}")
    if args.check_grad:
        residual = finite_difference_check(batch, cfg)
        print(f"grad_check_residual {residual!r}")
        if residual >= GRAD_CHECK_TOL:
            raise NumericValidationError(
                f"gradient check residual {residual!r} exceeds {GRAD_CHECK_TOL}"
            )
    return 0


def _cmd_templates(args: argparse.Namespace) -> int:
    try:
        corpus = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read corpus {args.corpus}: {exc}") from exc
    corpus = [line for line in corpus if line.strip()]
    rules = TemplateRules.from_file(args.rules) if args.rules else TemplateRules.default()
    report = top_k_coverage(corpus, rules, k=args.k)
    for template, count in report.frequencies:
        print(f"{count:8d}  {template}")
    print(
        json.dumps(
            {"k": report.top_k, "coverage": report.coverage, "size": report.corpus_size}
        )
    )
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    summary = generate_scene(
        args.output,
        seed=args.seed,
        frames=args.frames,
        cells=args.cells,
        dim=args.dim,
    )
    print(f"manifest {summary.manifest_path}")
    print(
        json.dumps(
            {
                "frames": summary.frames,
                "expected_voxels": summary.expected_voxels,
                "expected_columns": summary.expected_columns,
            }
        )
    )
    return 0


def _cmd_inspect(args: argparse.Namespace) -> int:
    data = TokenFileData.read(args.tokenfile)
    print(f"dim {data.dim}")
    print(f"tokens {data.token_count}")
    print(f"voxel_size {data.voxel_size!r}")
    print(f"origin {float(data.origin[0])!r} {float(data.origin[1])!r} {float(data.origin[2])!r}")
    print(f"voxel_total {data.voxel_total}")
    print(f"retained_voxel_total {data.retained_voxel_total}")
    print(f"compression_rate {data.compression_rate!r}")
    print(f"preservation_rate {data.preservation_rate!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfgrid",
        description="Scene tokenization of posed RGBD captures into condensed feature grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_tok = sub.add_parser("tokenize", help="convert a scene manifest into tokens")
    p_tok.add_argument("manifest", help="path to a scene manifest")
    p_tok.add_argument("--voxel-size", type=float, default=None,
                       help=f"voxel edge in meters (default {DEFAULT_VOXEL_SIZE})")
    p_tok.add_argument("--max-tokens", type=int, default=None,
                       help=f"token budget (default {DEFAULT_MAX_TOKENS})")
    p_tok.add_argument("--rope-base", type=float, default=None,
                       help=f"rotary frequency base (default {DEFAULT_ROPE_BASE})")
    fourier = p_tok.add_mutually_exclusive_group()
    fourier.add_argument("--fourier-seed", type=int, default=None,
                         help="seed for generated horizontal embedding weights")
    fourier.add_argument("--fourier-weights", default=None,
                         help="tensor file with entries W, mlp.w1, mlp.b1, mlp.w2, mlp.b2")
    p_tok.add_argument("--output", default=None, help="token file path (default tokens.cftk)")
    p_tok.set_defaults(func=_cmd_tokenize)

    p_dpo = sub.add_parser("dpo-loss", help="evaluate the preference loss on a batch file")
    p_dpo.add_argument("batch", help="one JSON record per line")
    p_dpo.add_argument("--w-a", type=float, default=0.5, help="answer-contrast weight")
    p_dpo.add_argument("--w-s", type=float, default=0.5, help="scene-contrast weight")
    p_dpo.add_argument("--beta-a", type=float, default=0.2, help="answer-contrast temperature")
    p_dpo.add_argument("--beta-s", type=float, default=0.03, help="scene-contrast temperature")
    p_dpo.add_argument("--referenced", action="store_true",
                       help="use reference log-probabilities instead of the reference-free form")
    p_dpo.add_argument("--grad", action="store_true", help="print per-sample gradients")
    p_dpo.add_argument("--check-grad", action="store_true",
                       help="compare analytic gradients against finite differences")
    p_dpo.set_defaults(func=_cmd_dpo_loss)

    p_tpl = sub.add_parser("templates", help="answer-template frequency and coverage")
    p_tpl.add_argument("corpus", help="text file, one answer per line")
    p_tpl.add_argument("--rules", default=None, help="JSON rules file (default built-in rules)")
    p_tpl.add_argument("--k", type=int, default=15, help="number of top templates (default 15)")
    p_tpl.set_defaults(func=_cmd_templates)

    p_syn = sub.add_parser("synth", help="generate a synthetic scene with known geometry")
    p_syn.add_argument("--output", required=True, help="directory to write the scene into")
    p_syn.add_argument("--seed", type=int, default=0, help="generator seed")
    p_syn.add_argument("--frames", type=int, default=6, help="number of frames")
    p_syn.add_argument("--cells", type=int, default=8, help="feature cells per side")
    p_syn.add_argument("--dim", type=int, default=16, help="feature dim (even)")
    p_syn.set_defaults(func=_cmd_synth)

    p_ins = sub.add_parser("inspect", help="validate a token file and print its header")
    p_ins.add_argument("tokenfile", help="path to a token file")
    p_ins.set_defaults(func=_cmd_inspect)

    return parser


def entrypoint(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CfgridError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(entrypoint())


if __name__ == "__main__":
    main()
