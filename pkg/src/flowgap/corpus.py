"""Build minable git histories from published releases of real packages.

Full project histories are too heavy for a smoke corpus, so this module
approximates them: it downloads consecutive sdist releases of a few
well-known packages and commits each release onto a fresh git history in
order. Every version bump then behaves like one large commit, and methods
that gained an if-branch between releases become positive mining records.

Downloads are cached; a package whose releases cannot be fetched is skipped
rather than fatal, and CorpusUnavailable is raised only when nothing at all
could be built (e.g. no network access).
"""

from __future__ import annotations

import os
import shutil
import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

from .mining import MinerConfig


@dataclass(frozen=True)
class ReleaseSeries:
    """A package name plus the release versions to chain into a history."""

    name: str
    versions: tuple[str, ...]


# Chronological release chains for packages with lightweight, fast-building
# sdists. Minor and major steps contribute most of the branch-adding changes.
DEFAULT_SERIES: tuple[ReleaseSeries, ...] = (
    ReleaseSeries("click", ("6.7", "7.0", "7.1.2", "8.0.4", "8.1.3", "8.1.7")),
    ReleaseSeries(
        "requests",
        (
            "2.18.4", "2.19.1", "2.20.1", "2.21.0", "2.22.0", "2.23.0",
            "2.24.0", "2.25.1", "2.26.0", "2.27.1", "2.28.2", "2.31.0",
            "2.32.3",
        ),
    ),
    ReleaseSeries(
        "jinja2", ("2.8", "2.9.6", "2.10.3", "2.11.3", "3.0.3", "3.1.2", "3.1.4")
    ),
    ReleaseSeries(
        "werkzeug",
        ("0.14.1", "0.15.6", "0.16.1", "1.0.1", "2.0.3", "2.1.2", "2.2.3"),
    ),
)

# Version-bump commits legitimately touch hundreds of files.
CORPUS_MINER_CONFIG = MinerConfig(max_files=3000)

_GIT_ENV = {
    "GIT_AUTHOR_NAME": "corpus-builder",
    "GIT_AUTHOR_EMAIL": "corpus@example.invalid",
    "GIT_COMMITTER_NAME": "corpus-builder",
    "GIT_COMMITTER_EMAIL": "corpus@example.invalid",
    "GIT_CONFIG_GLOBAL": "/dev/null",
    "GIT_CONFIG_SYSTEM": "/dev/null",
}


class CorpusUnavailable(RuntimeError):
    """No release history could be built (typically: downloads failed)."""


def _git(repo: Path, *args: str, date: str | None = None) -> None:
    env = {**os.environ, **_GIT_ENV}
    if date is not None:
        env["GIT_AUTHOR_DATE"] = date
        env["GIT_COMMITTER_DATE"] = date
    subprocess.run(
        ["git", "-C", str(repo), *args],
        check=True,
        env=env,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )


def fetch_sdist(
    name: str, version: str, cache_dir: Path, timeout: float = 180.0
) -> Path | None:
    """Download one sdist into the cache; return its path, or None on failure."""
    dest = cache_dir / name / version
    if dest.is_dir():
        hits = [p for p in dest.iterdir() if p.suffix in (".gz", ".zip", ".bz2")]
        if hits:
            return hits[0]
    dest.mkdir(parents=True, exist_ok=True)
    # Let pip resolve the package index from its own configuration; index
    # overrides inherited through the environment are frequently stale in
    # sandboxed setups and break downloads.
    env = {
        k: v
        for k, v in os.environ.items()
        if k not in ("PIP_INDEX_URL", "PIP_EXTRA_INDEX_URL")
    }
    try:
        result = subprocess.run(
            [
                sys.executable, "-m", "pip", "download", "--no-deps",
                "--no-binary", ":all:", "--disable-pip-version-check",
                "--quiet", f"{name}=={version}", "-d", str(dest),
            ],
            env=env,
            capture_output=True,
            timeout=timeout,
        )
    except (OSError, subprocess.TimeoutExpired):
        return None
    if result.returncode != 0:
        return None
    hits = [p for p in dest.iterdir() if p.is_file()]
    return hits[0] if hits else None


def _extract_tree(archive: Path, scratch: Path) -> Path | None:
    """Unpack an sdist and return its single top-level directory."""
    if scratch.exists():
        shutil.rmtree(scratch)
    scratch.mkdir(parents=True)
    try:
        shutil.unpack_archive(str(archive), str(scratch))
    except (shutil.ReadError, ValueError, OSError):
        return None
    tops = [p for p in scratch.iterdir() if p.is_dir()]
    return tops[0] if len(tops) == 1 else None


def _replace_worktree(repo: Path, tree: Path) -> None:
    for entry in repo.iterdir():
        if entry.name == ".git":
            continue
        if entry.is_dir():
            shutil.rmtree(entry)
        else:
            entry.unlink()
    for entry in tree.iterdir():
        target = repo / entry.name
        if entry.is_dir():
            shutil.copytree(entry, target)
        else:
            shutil.copy2(entry, target)


def build_release_history(
    series: ReleaseSeries, work_dir: Path, cache_dir: Path
) -> Path | None:
    """Commit each fetchable release of one package onto a fresh history.

    Returns the repository path, or None when fewer than two releases could
    be fetched (a single snapshot has no diffs to mine).
    """
    repo = work_dir / series.name
    if repo.exists():
        shutil.rmtree(repo)
    repo.mkdir(parents=True)
    _git(repo, "init", "-q", "-b", "main")

    committed = 0
    scratch = work_dir / f".extract-{series.name}"
    for idx, version in enumerate(series.versions):
        archive = fetch_sdist(series.name, version, cache_dir)
        if archive is None:
            continue
        tree = _extract_tree(archive, scratch)
        if tree is None:
            continue
        _replace_worktree(repo, tree)
        _git(repo, "add", "-A")
        date = f"2021-06-01T10:{idx:02d}:00 +0000"
        _git(
            repo, "commit", "-q", "--allow-empty",
            "-m", f"{series.name} {version}", date=date,
        )
        committed += 1
    if scratch.exists():
        shutil.rmtree(scratch)
    if committed < 2:
        shutil.rmtree(repo)
        return None
    return repo


def build_corpus(
    work_dir: Path,
    cache_dir: Path,
    series: tuple[ReleaseSeries, ...] = DEFAULT_SERIES,
) -> list[tuple[str, Path]]:
    """Build release histories for every fetchable series.

    Raises CorpusUnavailable if none could be built.
    """
    work_dir = Path(work_dir)
    cache_dir = Path(cache_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    cache_dir.mkdir(parents=True, exist_ok=True)
    repos: list[tuple[str, Path]] = []
    for one in series:
        repo = build_release_history(one, work_dir, cache_dir)
        if repo is not None:
            repos.append((one.name, repo))
    if not repos:
        raise CorpusUnavailable(
            "no release history could be built; package downloads failed "
            "(is the network or package index reachable?)"
        )
    return repos
