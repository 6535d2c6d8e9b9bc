from __future__ import annotations

import os
import pathlib
import subprocess

import pytest

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def _git(repo: pathlib.Path, *args: str, commit_no: int = 0) -> None:
    env = dict(
        os.environ,
        GIT_AUTHOR_NAME="fixture",
        GIT_AUTHOR_EMAIL="fixture@example.invalid",
        GIT_COMMITTER_NAME="fixture",
        GIT_COMMITTER_EMAIL="fixture@example.invalid",
        GIT_AUTHOR_DATE=f"2020-01-01T00:{commit_no:02d}:00 +0000",
        GIT_COMMITTER_DATE=f"2020-01-01T00:{commit_no:02d}:00 +0000",
    )
    subprocess.run(
        ["git", "-C", str(repo), *args],
        check=True,
        env=env,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )


def make_repo(path: pathlib.Path, steps: list[dict[str, str | None]]) -> pathlib.Path:
    """Build a git repository from commit steps.

    Each step maps relative paths to file content (None deletes the
    file); one commit per step with increasing timestamps.
    """
    path.mkdir(parents=True, exist_ok=True)
    subprocess.run(["git", "init", "-q", str(path)], check=True,
                   stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    for i, files in enumerate(steps):
        for rel, content in files.items():
            target = path / rel
            if content is None:
                target.unlink()
            else:
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(content, encoding="utf-8")
        _git(path, "add", "-A", commit_no=i)
        _git(path, "commit", "-q", "--allow-empty", "-m", f"step {i}", commit_no=i)
    return path


@pytest.fixture
def git_repo_factory(tmp_path):
    def factory(steps: list[dict[str, str | None]], name: str = "repo") -> pathlib.Path:
        return make_repo(tmp_path / name, steps)

    return factory


@pytest.fixture
def corpus_dir() -> pathlib.Path:
    return FIXTURES / "corpus"


@pytest.fixture
def truth_dir() -> pathlib.Path:
    return FIXTURES / "truth"
