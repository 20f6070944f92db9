"""Mine method-level changes from git history.

Walks a repository's commits, extracts Python methods that exist in both the
parent and child version of a file, and records each changed method together
with the lines its commit added. A change is branch-adding when it introduces
a new ``if`` statement; everything else is kept as negative material for the
downstream dataset.
"""

from __future__ import annotations

import ast
import difflib
import subprocess
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class Polarity(Enum):
    PATH_ADDING = "path_adding"
    NON_PATH_ADDING = "non_path_adding"


@dataclass(frozen=True)
class MinerConfig:
    """Knobs for the repository scan.

    max_files: commits touching more files than this are skipped as bulk
    changes (imports, mass renames); raise it for histories built from
    release snapshots.
    """

    max_files: int = 50
    include_merges: bool = False
    max_commits: int | None = None


@dataclass(frozen=True)
class MethodChangeRecord:
    """One method changed by one commit, with its added after-side lines.

    Sources are method-local text sliced from the file (decorators excluded);
    added_spans are 1-based inclusive line ranges into after_source.
    """

    repo: str
    commit: str
    file_path: str
    method: str
    before_source: str
    after_source: str
    added_spans: tuple[tuple[int, int], ...]
    polarity: Polarity


@dataclass
class MiningStats:
    commits_seen: int = 0
    commits_scanned: int = 0
    skipped_merges: int = 0
    skipped_bulk: int = 0
    files_compared: int = 0
    files_unreadable: int = 0
    methods_compared: int = 0
    records: int = 0
    positives: int = 0

    def as_dict(self) -> dict:
        return dict(vars(self))


class _GitError(RuntimeError):
    pass


def _git(repo: Path, *args: str) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise _GitError(f"git {' '.join(args)}: {proc.stderr.strip()}")
    return proc.stdout


class _BlobReader:
    """Streams file contents for many revision:path names over one process."""

    def __init__(self, repo: Path):
        self._proc = subprocess.Popen(
            ["git", "-C", str(repo), "cat-file", "--batch"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )

    def read(self, name: str) -> bytes | None:
        assert self._proc.stdin and self._proc.stdout
        self._proc.stdin.write(name.encode() + b"\n")
        self._proc.stdin.flush()
        header = self._proc.stdout.readline().split()
        if len(header) != 3:  # "<name> missing" or similar
            return None
        size = int(header[2])
        body = self._proc.stdout.read(size)
        self._proc.stdout.read(1)  # trailing newline
        return body

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait()


def collect_methods(module_source: str) -> dict[str, str]:
    """Map qualified method names to their source text.

    Walks module and class bodies only; functions nested inside functions
    belong to their parent's text. Names colliding (property/setter pairs)
    are dropped as ambiguous.
    """
    try:
        # foreign code: its escape-sequence warnings are not actionable here
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SyntaxWarning)
            warnings.simplefilter("ignore", DeprecationWarning)
            module = ast.parse(module_source)
    except (SyntaxError, ValueError):
        return {}
    lines = module_source.splitlines(keepends=True)
    found: dict[str, list[str]] = {}

    def visit(body: list[ast.stmt], prefix: str) -> None:
        for stmt in body:
            if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
                text = "".join(lines[stmt.lineno - 1 : stmt.end_lineno])
                found.setdefault(prefix + stmt.name, []).append(text)
            elif isinstance(stmt, ast.ClassDef):
                visit(stmt.body, prefix + stmt.name + ".")

    visit(module.body, "")
    return {name: texts[0] for name, texts in found.items() if len(texts) == 1}


def added_line_spans(before: str, after: str) -> tuple[tuple[int, int], ...]:
    """Line ranges of `after` not present in `before` (1-based, inclusive)."""
    matcher = difflib.SequenceMatcher(
        a=before.splitlines(), b=after.splitlines(), autojunk=False
    )
    spans = [
        (j1 + 1, j2)
        for op, _i1, _i2, j1, j2 in matcher.get_opcodes()
        if op in ("insert", "replace")
    ]
    return tuple(spans)


def _count_ifs(func: ast.AST) -> int:
    return sum(1 for n in ast.walk(func) if isinstance(n, ast.If))


def diff_method(
    before_source: str, after_source: str
) -> tuple[Polarity, tuple[tuple[int, int], ...]] | None:
    """Classify a method change; None when it is not a code change.

    Branch-adding means the commit grew the number of ``if`` statements and
    at least one ``if`` header sits on an added line; editing an existing
    condition does not qualify.
    """
    from .cfg import MethodParseError, parse_method

    try:
        before = parse_method(before_source)
        after = parse_method(after_source)
    except MethodParseError:
        return None
    if ast.dump(before.func) == ast.dump(after.func):
        return None

    spans = added_line_spans(before_source, after_source)
    polarity = Polarity.NON_PATH_ADDING
    if _count_ifs(after.func) > _count_ifs(before.func):
        headers = [
            n.lineno for n in ast.walk(after.func) if isinstance(n, ast.If)
        ]
        if any(s <= line <= e for line in headers for s, e in spans):
            polarity = Polarity.PATH_ADDING
    return polarity, spans


def _decode(blob: bytes | None) -> str | None:
    if blob is None:
        return None
    try:
        return blob.decode("utf-8")
    except UnicodeDecodeError:
        return None


def _commit_list(repo: Path) -> list[tuple[str, list[str]]]:
    out = _git(repo, "log", "--all", "--format=%H %P")
    commits = []
    for line in out.splitlines():
        parts = line.split()
        commits.append((parts[0], parts[1:]))
    return commits


def scan_repository(
    repo_path: str | Path,
    config: MinerConfig = MinerConfig(),
    repo_name: str | None = None,
) -> tuple[list[MethodChangeRecord], MiningStats]:
    """Mine every non-merge commit of a repository for method changes.

    Commits are visited newest-first as git reports them; within a commit,
    files and methods are processed in sorted order, so the output is stable
    for a fixed history.
    """
    repo = Path(repo_path)
    name = repo_name or repo.name
    stats = MiningStats()
    records: list[MethodChangeRecord] = []
    reader = _BlobReader(repo)
    try:
        for sha, parents in _commit_list(repo):
            stats.commits_seen += 1
            if not parents:
                continue  # nothing pre-existing to modify
            if len(parents) > 1 and not config.include_merges:
                stats.skipped_merges += 1
                continue
            if config.max_commits is not None and stats.commits_scanned >= config.max_commits:
                break
            parent = parents[0]

            name_status = _git(
                repo, "diff-tree", "-r", "--no-renames", "--name-status", sha
            ).splitlines()[1:]
            changed = [line.split("\t", 1) for line in name_status if "\t" in line]
            if len(changed) > config.max_files:
                stats.skipped_bulk += 1
                continue
            stats.commits_scanned += 1

            py_files = sorted(
                path for status, path in changed
                if status == "M" and path.endswith(".py")
            )
            for path in py_files:
                stats.files_compared += 1
                before_mod = _decode(reader.read(f"{parent}:{path}"))
                after_mod = _decode(reader.read(f"{sha}:{path}"))
                if before_mod is None or after_mod is None:
                    stats.files_unreadable += 1
                    continue
                before_methods = collect_methods(before_mod)
                after_methods = collect_methods(after_mod)
                for method in sorted(before_methods.keys() & after_methods.keys()):
                    stats.methods_compared += 1
                    result = diff_method(before_methods[method], after_methods[method])
                    if result is None:
                        continue
                    polarity, spans = result
                    records.append(
                        MethodChangeRecord(
                            repo=name,
                            commit=sha,
                            file_path=path,
                            method=method,
                            before_source=before_methods[method],
                            after_source=after_methods[method],
                            added_spans=spans,
                            polarity=polarity,
                        )
                    )
                    stats.records += 1
                    if polarity is Polarity.PATH_ADDING:
                        stats.positives += 1
    finally:
        reader.close()
    return records, stats


def dedupe_and_balance(
    records: list[MethodChangeRecord],
    seed: int = 0,
    negative_ratio: float = 1.0,
) -> list[MethodChangeRecord]:
    """Drop exact change duplicates, then downsample the negatives.

    Duplicates (same before and after text, e.g. cherry-picks or copied
    files) keep their first occurrence. Negatives are sampled without
    replacement down to negative_ratio x positives; original order is
    preserved either way.
    """
    seen: set[tuple[str, str]] = set()
    unique: list[MethodChangeRecord] = []
    for rec in records:
        key = (rec.before_source, rec.after_source)
        if key not in seen:
            seen.add(key)
            unique.append(rec)

    positives = [r for r in unique if r.polarity is Polarity.PATH_ADDING]
    negatives = [r for r in unique if r.polarity is Polarity.NON_PATH_ADDING]
    target = int(round(len(positives) * negative_ratio))
    if len(negatives) > target:
        rng = np.random.default_rng(seed)
        keep = set(rng.choice(len(negatives), size=target, replace=False).tolist())
        negatives = [r for i, r in enumerate(negatives) if i in keep]

    kept = set(map(id, positives)) | set(map(id, negatives))
    return [r for r in unique if id(r) in kept]
