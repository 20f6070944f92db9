"""Generate small git histories with known branch-adding commits.

Used by tests and demos: builds a repository whose commits are scripted, so
the set of methods that gained an ``if`` block is known exactly and miner
output can be checked against ground truth.
"""

from __future__ import annotations

import os
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_GIT_ENV = {
    "GIT_AUTHOR_NAME": "fixture",
    "GIT_AUTHOR_EMAIL": "fixture@example.invalid",
    "GIT_COMMITTER_NAME": "fixture",
    "GIT_COMMITTER_EMAIL": "fixture@example.invalid",
    # suppress user/system config so histories hash identically everywhere
    "GIT_CONFIG_GLOBAL": "/dev/null",
    "GIT_CONFIG_SYSTEM": "/dev/null",
}


def _run_git(repo: Path, *args: str, when: int = 0) -> None:
    env = {**os.environ, **_GIT_ENV}
    env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = (
        f"2021-06-01T{when // 3600:02d}:{(when // 60) % 60:02d}:{when % 60:02d} +0000"
    )
    subprocess.run(
        ["git", "-C", str(repo), *args],
        env=env,
        check=True,
        capture_output=True,
    )


@dataclass
class PlantedChange:
    """Ground truth for one scripted commit."""

    file_path: str
    method: str
    branch_adding: bool


@dataclass
class PlantedHistory:
    path: Path
    changes: list[PlantedChange] = field(default_factory=list)

    @property
    def branch_adding_count(self) -> int:
        return sum(1 for c in self.changes if c.branch_adding)


class _Module:
    """A class with flat-bodied methods, mutated one commit at a time."""

    def __init__(self, class_name: str, method_names: list[str]):
        self.class_name = class_name
        self.methods: dict[str, list[tuple[int, str]]] = {}
        for i, name in enumerate(method_names):
            self.methods[name] = [
                (0, f"total = a + b + {i}"),
                (0, f"scale_{name} = total * 2"),
                (0, f"self.log(scale_{name})"),
                (0, f"return scale_{name}"),
            ]

    def render(self) -> str:
        out = [f"class {self.class_name}:", "    def log(self, value):", "        pass", ""]
        for name, body in self.methods.items():
            out.append(f"    def {name}(self, a, b):")
            for indent, text in body:
                out.append("        " + "    " * indent + text)
            out.append("")
        return "\n".join(out) + "\n"


def _branch_block(i: int) -> list[tuple[int, str]]:
    variants = [
        [(0, f"if a > {i}:"), (1, f"guard_{i} = a * {i}")],
        [(0, f"if b == {i}:"), (1, f"guard_{i} = b - {i}"), (1, f"self.log(guard_{i})")],
        [(0, f"if a < {i}:"), (1, f"raise ValueError({i})")],
        [
            (0, f"if a >= {i}:"),
            (1, f"if b > {i}:"),
            (2, f"guard_{i} = {i}"),
            (1, f"self.log(a)"),
        ],
    ]
    return variants[i % len(variants)]


def build_history(
    path: str | Path,
    n_branch_adding: int = 34,
    n_other: int = 14,
    seed: int = 7,
    with_noise_commits: bool = True,
) -> PlantedHistory:
    """Create a git repository with a scripted mutation history.

    Each branch-adding commit inserts one fresh ``if`` block at a statement
    boundary of one method; other commits edit or append plain statements.
    With noise enabled the history also gets a merge, a bulk commit, a
    comment-only commit, and a non-Python change, none of which should yield
    records.
    """
    repo = Path(path)
    repo.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    history = PlantedHistory(repo)

    modules = {
        "geometry.py": _Module("Geometry", [f"area_{i}" for i in range(6)]),
        "text_utils.py": _Module("TextOps", [f"fmt_{i}" for i in range(6)]),
        "runtime.py": _Module("Runtime", [f"step_{i}" for i in range(6)]),
    }

    def write_all() -> None:
        for fname, mod in modules.items():
            (repo / fname).write_text(mod.render())

    clock = [0]

    def commit(message: str) -> None:
        clock[0] += 30
        _run_git(repo, "add", "-A", when=clock[0])
        _run_git(repo, "commit", "-q", "-m", message, when=clock[0])

    _run_git(repo, "init", "-q", "-b", "main")
    write_all()
    commit("initial modules")

    files = sorted(modules)
    plan = ["pos"] * n_branch_adding + ["neg"] * n_other
    rng.shuffle(plan)

    for i, action in enumerate(plan):
        fname = files[i % len(files)]
        mod = modules[fname]
        names = sorted(mod.methods)
        method = names[int(rng.integers(len(names)))]
        body = mod.methods[method]
        if action == "pos":
            # top-level boundaries only, never after the trailing return
            top_level = [j for j, (ind, _) in enumerate(body) if ind == 0]
            pos = top_level[int(rng.integers(len(top_level) - 1))]
            mod.methods[method] = body[:pos] + _branch_block(i) + body[pos:]
            history.changes.append(PlantedChange(fname, f"{mod.class_name}.{method}", True))
            label = "guard"
        else:
            mod.methods[method] = body + [(0, f"extra_{i} = {i}")]
            # keep the return last
            mod.methods[method][-2], mod.methods[method][-1] = (
                mod.methods[method][-1],
                mod.methods[method][-2],
            )
            history.changes.append(PlantedChange(fname, f"{mod.class_name}.{method}", False))
            label = "tweak"
        write_all()
        commit(f"{label} {fname}:{method}")

    if with_noise_commits:
        # comment-only change: must produce no record at all
        target = repo / "geometry.py"
        target.write_text(target.read_text().replace(
            "class Geometry:", "class Geometry:\n    # geometry helpers", 1
        ))
        commit("docs comment")

        (repo / "NOTES.txt").write_text("not python\n")
        commit("add notes file")

        bulk = repo / "bulk"
        bulk.mkdir(exist_ok=True)
        for j in range(60):
            (bulk / f"mod_{j}.py").write_text(f"VALUE_{j} = {j}\n")
        commit("vendor bulk files")

        _run_git(repo, "checkout", "-q", "-b", "side")
        mod = modules["runtime.py"]
        mod.methods["step_0"].insert(0, (0, "side_note = a"))
        write_all()
        commit("side branch tweak")
        history.changes.append(PlantedChange("runtime.py", "Runtime.step_0", False))
        _run_git(repo, "checkout", "-q", "main")
        mod.methods["step_0"].pop(0)  # keep the model in sync with main's tree
        # diverge main so the merge cannot fast-forward
        modules["text_utils.py"].methods["fmt_0"].insert(0, (0, "main_note = b"))
        write_all()
        commit("main tweak")
        history.changes.append(PlantedChange("text_utils.py", "TextOps.fmt_0", False))
        clock[0] += 30
        _run_git(repo, "merge", "-q", "side", "-m", "merge side", when=clock[0])

    return history
