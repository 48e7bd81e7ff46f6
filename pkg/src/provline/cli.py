"""Command-line surface for scriptable corpus work.

Exit codes: 0 success, 1 data/validation failure, 2 usage error. With
--json, reports go to stdout as machine-readable JSON; otherwise a human
table is printed. Output files are written atomically (temp + rename) so a
pipeline never reads a half-written report.
"""

from __future__ import annotations

import csv
import io as _io
import json
import sys
from pathlib import Path

import click

from . import analysis, pipeline
from .analysis import AnalysisError
from .corpus import CorpusError, atomic_write, load_corpus
from .model import DocumentMismatchError, DuplicateEventIdError
from .replay import CONFLICT_MODES, ConflictError, POLICY_PRESETS, parse_policy


class DataError(click.ClickException):
    exit_code = 1


def _load(corpus_root: str):
    try:
        return load_corpus(corpus_root)
    except (CorpusError, OSError) as exc:
        raise DataError(str(exc))


def _emit(payload: dict | list, as_json: bool, human: str) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        click.echo(human)


def _policy(spec: str):
    try:
        return parse_policy(spec)
    except (ValueError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad --policy {spec!r}: {exc}")


corpus_option = click.option(
    "--corpus",
    "corpus_root",
    envvar="PROVLINE_CORPUS",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="Corpus root directory (or set PROVLINE_CORPUS).",
)
json_option = click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON on stdout.")


@click.group()
def main():
    """Provenance-aware OCR correction: validate, reconstruct, diff, sweep."""


@main.command("validate")
@corpus_option
@json_option
def cmd_validate(corpus_root: str, as_json: bool):
    """Check every event against its base document's invariants."""
    corpus = _load(corpus_root)
    try:
        report = pipeline.validate_corpus(corpus)
    except (DuplicateEventIdError, DocumentMismatchError) as exc:
        raise DataError(str(exc))
    lines = [f"checked {report['events_checked']} events"]
    for failure in report["failures"]:
        for item in failure["failures"]:
            lines.append(f"FAIL {failure['event_id']} [{item['check']}]: {item['message']}")
    _emit(report, as_json, "\n".join(lines))
    if not report["ok"]:
        sys.exit(1)


@main.command("reconstruct")
@corpus_option
@click.option("--policy", "policy_spec", required=True, help="Preset name, conf>=X, or inline JSON.")
@click.option("--on-conflict", type=click.Choice(CONFLICT_MODES), default="error", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@json_option
def cmd_reconstruct(corpus_root: str, policy_spec: str, on_conflict: str, out_dir: str, as_json: bool):
    """Replay policy-selected events; write one text and one trace per doc."""
    corpus = _load(corpus_root)
    policy = _policy(policy_spec)
    try:
        variants = pipeline.reconstruct_corpus(corpus, policy, on_conflict)
    except ConflictError as exc:
        raise DataError(str(exc))
    except (DuplicateEventIdError, DocumentMismatchError, ValueError) as exc:
        raise DataError(str(exc))
    out = Path(out_dir)
    summary = []
    for doc_id, variant in variants.items():
        atomic_write(out / f"{doc_id}.txt", variant.text)
        atomic_write(
            out / f"{doc_id}.trace.json",
            json.dumps(
                {"variant_id": variant.variant_id, **variant.trace.to_json()},
                indent=2,
                ensure_ascii=False,
            )
            + "\n",
        )
        summary.append(
            {
                "doc_id": doc_id,
                "variant_id": variant.variant_id,
                "applied": len(variant.trace.applied_ids),
            }
        )
    _emit(
        {"policy": policy.descriptor(), "documents": summary},
        as_json,
        "\n".join(f"{s['doc_id']}: applied {s['applied']} events ({s['variant_id'][:12]})" for s in summary),
    )


@main.command("diff")
@corpus_option
@click.option("--policy-a", "policy_a", required=True)
@click.option("--policy-b", "policy_b", required=True)
@click.option("--on-conflict", type=click.Choice(CONFLICT_MODES), default="resolve", show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Also write report JSON + records CSV here.")
@json_option
def cmd_diff(corpus_root: str, policy_a: str, policy_b: str, on_conflict: str, out_dir: str | None, as_json: bool):
    """Volatility report between two policies' variants (stored mentions)."""
    corpus = _load(corpus_root)
    try:
        report = pipeline.diff_variants(corpus, _policy(policy_a), _policy(policy_b), on_conflict)
    except (CorpusError, AnalysisError, ConflictError) as exc:
        raise DataError(str(exc))
    if out_dir:
        out = Path(out_dir)
        atomic_write(out / "diff.json", json.dumps(report, indent=2, ensure_ascii=False) + "\n")
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["doc_id", "kind", "base_start", "base_end", "surface_a", "surface_b", "attributed_events"])
        for record in report["records"]:
            writer.writerow(
                [
                    record["doc_id"],
                    record["kind"],
                    record["base_anchor"][0],
                    record["base_anchor"][1],
                    (record["mention_a"] or {}).get("surface", ""),
                    (record["mention_b"] or {}).get("surface", ""),
                    " ".join(a["event_id"] for a in record["attributed_events"]),
                ]
            )
        atomic_write(out / "records.csv", buf.getvalue())
    human = (
        f"mentions: {report['mentions_a']} vs {report['mentions_b']}\n"
        f"unique:   {report['unique_a']} vs {report['unique_b']}\n"
        f"jaccard:  {report['jaccard']:.4f}\n"
        f"volatile: {report['volatile']} "
        f"(added {report['kinds']['added']}, removed {report['kinds']['removed']}, "
        f"surface {report['kinds']['surface_changed']}, boundary {report['kinds']['boundary_changed']})\n"
        f"% linked to unreviewed: {report['pct_unreviewed']}"
    )
    _emit(report, as_json, human)


@main.command("sweep")
@corpus_option
@click.argument("phase", type=click.Choice(["emit", "report"]))
@click.option("--policies", default="raw,all,conf50,conf70,conf85,approved", show_default=True)
@click.option("--on-conflict", type=click.Choice(CONFLICT_MODES), default="resolve", show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@json_option
def cmd_sweep(corpus_root: str, phase: str, policies: str, on_conflict: str, out_dir: str, as_json: bool):
    """Two-phase policy sweep: emit variants for external NER, then report."""
    corpus = _load(corpus_root)
    policy_list = [_policy(name.strip()) for name in policies.split(",") if name.strip()]
    out = Path(out_dir)
    if phase == "emit":
        try:
            emitted = pipeline.sweep_emit(corpus, policy_list, out, on_conflict)
        except (ConflictError, ValueError) as exc:
            raise DataError(str(exc))
        summary = {p: sorted(v) for p, v in emitted.items()}
        _emit(
            {"emitted": summary},
            as_json,
            "\n".join(f"{p}: {len(v)} documents" for p, v in summary.items()),
        )
        return
    try:
        rows = pipeline.sweep_report(corpus, policy_list, conflict_mode=on_conflict)
    except (CorpusError, AnalysisError, ConflictError) as exc:
        raise DataError(str(exc))
    payload = [row.to_json() for row in rows]
    atomic_write(out / "sweep.json", json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    buf = _io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["policy", "mentions", "unique", "jaccard_vs_raw", "volatile"])
    for row in rows:
        writer.writerow([row.policy, row.mentions, row.unique, row.jaccard_vs_raw, "" if row.volatile is None else row.volatile])
    atomic_write(out / "sweep.csv", buf.getvalue())
    # (coverage, volatility) curve points for external plotting
    curve = [
        {"policy": r.policy, "coverage": r.mentions, "volatile": r.volatile}
        for r in rows
        if r.volatile is not None
    ]
    atomic_write(out / "tradeoff.json", json.dumps(curve, indent=2, ensure_ascii=False) + "\n")
    human = "\n".join(
        f"{r.policy:<10} mentions={r.mentions:<6} unique={r.unique:<6} "
        f"jaccard={r.jaccard_vs_raw:.4f} volatile={'--' if r.volatile is None else r.volatile}"
        for r in rows
    )
    _emit(payload, as_json, human)


@main.command("attribute")
@corpus_option
@click.option("--policy-a", "policy_a", required=True)
@click.option("--policy-b", "policy_b", required=True)
@click.option("--window", default=analysis.DEFAULT_WINDOW, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@json_option
def cmd_attribute(corpus_root: str, policy_a: str, policy_b: str, window: int, out_path: str, as_json: bool):
    """Attribute volatile entities to likely contributing events (JSONL out)."""
    corpus = _load(corpus_root)
    try:
        report = pipeline.diff_variants(
            corpus, _policy(policy_a), _policy(policy_b), window=window
        )
    except (CorpusError, AnalysisError, ConflictError) as exc:
        raise DataError(str(exc))
    lines = [json.dumps(record, ensure_ascii=False) for record in report["records"]]
    atomic_write(out_path, "".join(line + "\n" for line in lines))
    _emit(
        {"records": len(lines), "out": out_path},
        as_json,
        f"wrote {len(lines)} attributed volatility records to {out_path}",
    )


@main.command("sample")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("-n", "count", required=True, type=int)
@click.option("--seed", required=True, type=int, help="Sampling is deterministic given the seed.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@json_option
def cmd_sample(records_path: str, count: int, seed: int, out_path: str, as_json: bool):
    """Sample attributed (entity, event) pairs into a judgment worksheet."""
    records = _read_record_file(records_path)
    try:
        worksheet = analysis.sample_attribution_pairs(records, count, seed)
    except AnalysisError as exc:
        raise DataError(str(exc))
    atomic_write(out_path, json.dumps(worksheet, indent=2, ensure_ascii=False) + "\n")
    _emit({"rows": len(worksheet), "out": out_path}, as_json, f"wrote {len(worksheet)} worksheet rows to {out_path}")


@main.command("precision")
@click.option("--worksheet", "worksheet_path", required=True, type=click.Path(exists=True, dir_okay=False))
@json_option
def cmd_precision(worksheet_path: str, as_json: bool):
    """Attribution precision from a fully judged worksheet."""
    worksheet = json.loads(Path(worksheet_path).read_text(encoding="utf-8"))
    try:
        value = analysis.attribution_precision(worksheet)
    except AnalysisError as exc:
        raise DataError(str(exc))
    _emit({"precision": value}, as_json, f"{value}")


@main.command("categories")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", "labels_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSON object mapping record index to category label.")
@json_option
def cmd_categories(records_path: str, labels_path: str, as_json: bool):
    """Aggregate externally supplied qualitative categories."""
    records = _read_record_file(records_path)
    raw_labels = json.loads(Path(labels_path).read_text(encoding="utf-8"))
    labels = {int(k): v for k, v in raw_labels.items()}
    summary = analysis.category_summary(records, labels)
    human = "\n".join(
        f"{name:<24} {info['count']:>5}  {info['percent']:.1f}%"
        for name, info in summary["categories"].items()
    )
    if summary["unlabeled"]:
        human += f"\n(unlabeled: {summary['unlabeled']})"
    _emit(summary, as_json, human or "(no labeled records)")


@main.command("serve")
@corpus_option
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
def cmd_serve(corpus_root: str, port: int, host: str):
    """Run the review HTTP API (and the review UI, if built)."""
    import uvicorn

    from .server import create_app

    app = create_app(corpus_root)
    uvicorn.run(app, host=host, port=port, log_level="info")


def _read_record_file(path: str) -> list[analysis.VolatilityRecord]:
    """Rehydrate volatility records from an `attribute` output JSONL file."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)

            def mention(payload):
                if payload is None:
                    return None
                return analysis.EntityMention(
                    doc_id=payload["doc_id"],
                    variant_id=payload["variant_id"],
                    start=payload["start"],
                    end=payload["end"],
                    surface=payload["surface"],
                    label=payload["label"],
                    kb_id=payload.get("kb_id"),
                )

            records.append(
                analysis.VolatilityRecord(
                    kind=data["kind"],
                    mention_a=mention(data["mention_a"]),
                    mention_b=mention(data["mention_b"]),
                    base_anchor=tuple(data["base_anchor"]),
                    attributed_events=tuple(
                        analysis.Attribution(a["event_id"], a["method"], a["distance"])
                        for a in data["attributed_events"]
                    ),
                )
            )
    return records


if __name__ == "__main__":
    main()
