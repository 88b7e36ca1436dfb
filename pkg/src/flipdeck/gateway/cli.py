"""Operator command line: serve the gateway, seed fixtures, run synthetic
classes, and export analytics tables.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from .. import analytics as an
from ..app import App, WallClock
from ..config import Settings, load_settings
from ..errors import FlipdeckError
from ..events import EventLog
from ..fip import DigestProvider, HttpProvider
from .clients import INSTRUCTOR


def _build_provider(settings: Settings):
    if settings.provider_kind == "http":
        return HttpProvider(
            url=settings.provider_url,
            key=settings.provider_key,
            model=settings.provider_model,
        )
    return DigestProvider()


def _open_app(settings: Settings, clock=None) -> App:
    log = EventLog(settings.storage_path, fsync=settings.fsync)
    return App(log=log, clock=clock or WallClock(), snapshot_every=settings.snapshot_every)


@click.group()
def main() -> None:
    """Classroom-flipping orchestration service."""


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
def serve(config_path: Optional[Path]) -> None:
    """Run the HTTP gateway (state rebuilt from the event log on start)."""
    import uvicorn

    from .http import build_api

    try:
        settings = load_settings(config_path)
    except FlipdeckError as exc:
        raise click.ClickException(str(exc))
    app = _open_app(settings)
    api = build_api(
        app,
        provider=_build_provider(settings),
        ui_dir=str(settings.ui_dir) if settings.ui_dir else None,
    )
    click.echo(f"flipdeck serving on {settings.host}:{settings.port} "
               f"(log: {settings.storage_path}, {app.applied_seq} events)")
    uvicorn.run(api, host=settings.host, port=settings.port, log_level="info")


@main.command()
@click.argument("fixture_file", type=click.Path(exists=True, path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--tokens-out", type=click.Path(path_type=Path), default=None,
              help="Write the minted bearer tokens to this JSON file.")
def seed(fixture_file: Path, config_path: Optional[Path], tokens_out: Optional[Path]) -> None:
    """Load a fixture file: register actors, queue its rows for vetting."""
    try:
        settings = load_settings(config_path)
    except FlipdeckError as exc:
        raise click.ClickException(str(exc))
    data = json.loads(fixture_file.read_text(encoding="utf-8"))
    app = _open_app(settings)
    tokens: dict[str, str] = {}
    for actor in data.get("actors", []):
        _, token = app.register_actor(actor["id"], actor["role"])
        tokens[actor["id"]] = token
    students = [a["id"] for a in data.get("actors", []) if a["role"] == "student"]
    author = students[0] if students else INSTRUCTOR
    queued = 0
    for row in data.get("rows", []):
        app.enqueue_seed_entry(
            author_id=author,
            prompts=row["prompts"],
            question_text=row["text"],
            kind=row["kind"],
            topic=data.get("course"),
        )
        queued += 1
    app.log.close()
    click.echo(f"seeded {len(tokens)} actor(s), queued {queued} row(s) for vetting")
    for actor_id, token in tokens.items():
        click.echo(f"  token {actor_id}: {token}")
    if tokens_out:
        tokens_out.write_text(json.dumps(tokens, indent=2), encoding="utf-8")
        click.echo(f"tokens written to {tokens_out}")


@main.command()
@click.option("--students", "-n", default=30, show_default=True)
@click.option("--sessions", "-k", default=2, show_default=True)
@click.option("--seed", "seed_value", default=7, show_default=True)
@click.option("--storage", type=click.Path(path_type=Path), required=True,
              help="Event log path for the simulated class (must not exist).")
@click.option("--transport", type=click.Choice(["http", "direct"]), default="http",
              show_default=True, help="Drive the class over loopback HTTP or in-process.")
def simulate(students: int, sessions: int, seed_value: int, storage: Path,
             transport: str) -> None:
    """Drive a full synthetic class and print pacing plus analytics."""
    from .sim import simulate_direct, simulate_http

    if storage.exists():
        raise click.ClickException(f"{storage} already exists; refusing to mix runs")
    if transport == "http":
        report = simulate_http(storage, seed_value, students, sessions)
    else:
        app, report = simulate_direct(storage, seed_value, students, sessions)
        app.log.close()
    for line in report.lines():
        click.echo(line)


@main.command()
@click.argument("course")
@click.argument("what", type=click.Choice(
    ["time-to-answer", "difficulty", "leaderboard", "comprehension"]))
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None)
@click.option("--out", type=click.Path(path_type=Path), default=None)
def export(course: str, what: str, config_path: Optional[Path], out: Optional[Path]) -> None:
    """Export one analytics table as CSV (stdout by default)."""
    try:
        settings = load_settings(config_path)
    except FlipdeckError as exc:
        raise click.ClickException(str(exc))
    app = _open_app(settings)
    try:
        if what == "time-to-answer":
            csv_text = an.histogram_csv(an.time_to_answer(app.answer_latency_pairs(course)))
        elif what == "difficulty":
            csv_text = an.difficulty_csv(an.difficulty_stats(app.approved_difficulties(course)))
        elif what == "leaderboard":
            csv_text = an.leaderboard_csv(an.leaderboard(app.leaderboard_scores(course)))
        else:
            csv_text = an.comprehension_csv(app.comprehension_observations(course))
    except FlipdeckError as exc:
        raise click.ClickException(f"{exc.code}: {exc}")
    finally:
        app.log.close()
    if out:
        out.write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {out}")
    else:
        sys.stdout.write(csv_text)


if __name__ == "__main__":
    main()
