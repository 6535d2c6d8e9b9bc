"""Candidate file enumeration from a working tree or full git history.

History mode walks every commit reachable from all branch heads and
yields each distinct blob content exactly once, tagged with the earliest
commit (topological order, ties by timestamp then id) that introduced
it. A secret added in one commit and removed in a later one therefore
still surfaces.
"""

from __future__ import annotations

import hashlib
import heapq
import os
import posixpath
from dataclasses import dataclass
from typing import Iterator

from .model import Diagnostic, Severity, SourceLocation

DEFAULT_MAX_BLOB_BYTES = 5 * 1024 * 1024
_BINARY_SNIFF_BYTES = 8192
_SKIP_DIRS = {".git", ".hg", ".svn"}


class NotARepository(Exception):
    pass


class CorruptObject(Exception):
    pass


@dataclass(frozen=True)
class FileVersion:
    path: str
    content_digest: str
    content: str
    commit_id: str | None = None


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _is_binary(data: bytes) -> bool:
    return b"\x00" in data[:_BINARY_SNIFF_BYTES]


def _decode(data: bytes) -> str:
    return data.decode("utf-8", errors="replace")


def _diag_loc(path: str) -> SourceLocation:
    return SourceLocation(file_path=path, line=1)


def enumerate_worktree(
    root: str,
    diagnostics: list[Diagnostic] | None = None,
    max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES,
) -> Iterator[FileVersion]:
    """Yield every regular text file under ``root`` in a deterministic order.

    VCS internals are skipped, as are binaries (NUL byte in the first
    8 KiB) and blobs over the size cap. Unreadable files produce a
    diagnostic, not a failure.
    """
    sink = diagnostics if diagnostics is not None else []
    if not os.path.isdir(root):
        raise NotADirectoryError(root)
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d not in _SKIP_DIRS)
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            rel = posixpath.join(*os.path.relpath(full, root).split(os.sep))
            if os.path.islink(full) or not os.path.isfile(full):
                continue
            try:
                size = os.path.getsize(full)
                if size > max_blob_bytes:
                    sink.append(
                        Diagnostic(
                            Severity.INFO,
                            "oversize-skipped",
                            f"{rel}: {size} bytes exceeds cap of {max_blob_bytes}",
                            _diag_loc(rel),
                        )
                    )
                    continue
                with open(full, "rb") as fh:
                    data = fh.read()
            except OSError as e:
                sink.append(
                    Diagnostic(Severity.WARNING, "io-error", f"{rel}: {e}", _diag_loc(rel))
                )
                continue
            if _is_binary(data):
                continue
            yield FileVersion(path=rel, content_digest=_digest(data), content=_decode(data))


def _open_repo(repo_path: str):
    import git
    from git.exc import InvalidGitRepositoryError, NoSuchPathError

    try:
        return git.Repo(repo_path)
    except (InvalidGitRepositoryError, NoSuchPathError) as e:
        raise NotARepository(str(repo_path)) from e


def _all_head_commits(repo) -> list:
    heads = []
    try:
        heads = [h.commit for h in repo.heads]
        if not heads and repo.head.is_valid():
            heads = [repo.head.commit]
    except Exception as e:  # noqa: BLE001 - any object-store failure is corruption here
        raise CorruptObject(str(e)) from e
    return heads


def _topo_ordered_commits(heads: list) -> list:
    """All reachable commits, parents before children, earliest first.

    Kahn's algorithm over the commit DAG; among ready commits the one
    with the smallest (timestamp, id) is emitted next, which makes the
    "earliest introducing commit" choice deterministic.
    """
    commits: dict[str, object] = {}
    stack = list(heads)
    while stack:
        c = stack.pop()
        if c.hexsha in commits:
            continue
        commits[c.hexsha] = c
        stack.extend(c.parents)

    children: dict[str, list[str]] = {sha: [] for sha in commits}
    pending: dict[str, int] = {}
    for sha, c in commits.items():
        parents = [p.hexsha for p in c.parents if p.hexsha in commits]
        pending[sha] = len(parents)
        for p in parents:
            children[p].append(sha)

    ready = [
        (c.committed_date, sha) for sha, c in commits.items() if pending[sha] == 0
    ]
    heapq.heapify(ready)
    ordered = []
    while ready:
        _, sha = heapq.heappop(ready)
        ordered.append(commits[sha])
        for child in children[sha]:
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(ready, (commits[child].committed_date, child))
    return ordered


def _walk_tree(tree, prefix: str) -> Iterator[tuple[str, object]]:
    for blob in sorted(tree.blobs, key=lambda b: b.name):
        yield posixpath.join(prefix, blob.name) if prefix else blob.name, blob
    for sub in sorted(tree.trees, key=lambda t: t.name):
        subprefix = posixpath.join(prefix, sub.name) if prefix else sub.name
        yield from _walk_tree(sub, subprefix)


def enumerate_history(
    repo_path: str,
    diagnostics: list[Diagnostic] | None = None,
    max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES,
) -> Iterator[FileVersion]:
    """Yield each distinct blob content once across the full commit history.

    Walks all branch heads; raises NotARepository / CorruptObject.
    """
    sink = diagnostics if diagnostics is not None else []
    repo = _open_repo(repo_path)
    heads = _all_head_commits(repo)

    seen_digests: set[str] = set()
    seen_trees: set[bytes] = set()
    try:
        for commit in _topo_ordered_commits(heads):
            stack = [("", commit.tree)]
            while stack:
                prefix, tree = stack.pop()
                if tree.binsha in seen_trees:
                    continue
                seen_trees.add(tree.binsha)
                for path, blob in _walk_tree_shallow(tree, prefix, stack):
                    if blob.size > max_blob_bytes:
                        sink.append(
                            Diagnostic(
                                Severity.INFO,
                                "oversize-skipped",
                                f"{path}@{commit.hexsha[:12]}: {blob.size} bytes exceeds cap",
                                _diag_loc(path),
                            )
                        )
                        continue
                    data = blob.data_stream.read()
                    if _is_binary(data):
                        continue
                    digest = _digest(data)
                    if digest in seen_digests:
                        continue
                    seen_digests.add(digest)
                    yield FileVersion(
                        path=path,
                        content_digest=digest,
                        content=_decode(data),
                        commit_id=commit.hexsha,
                    )
    except (NotARepository, CorruptObject):
        raise
    except Exception as e:  # noqa: BLE001
        raise CorruptObject(str(e)) from e


def _walk_tree_shallow(tree, prefix: str, stack: list) -> Iterator[tuple[str, object]]:
    # Unseen subtrees are pushed for later; identical subtree ids cannot
    # contain new blob contents, so skipping them preserves dedup.
    for sub in sorted(tree.trees, key=lambda t: t.name, reverse=True):
        subprefix = posixpath.join(prefix, sub.name) if prefix else sub.name
        stack.append((subprefix, sub))
    for blob in sorted(tree.blobs, key=lambda b: b.name):
        yield posixpath.join(prefix, blob.name) if prefix else blob.name, blob


def snapshot_files(
    repo_path: str,
    diagnostics: list[Diagnostic] | None = None,
    max_blob_bytes: int = DEFAULT_MAX_BLOB_BYTES,
    commit=None,
) -> tuple[dict[str, str], str | None]:
    """Text files of one commit snapshot (default: HEAD) as {path: content}.

    Returns the mapping and the commit id; an empty repository yields an
    empty mapping and no commit id.
    """
    sink = diagnostics if diagnostics is not None else []
    repo = _open_repo(repo_path)
    if commit is None:
        try:
            if not repo.head.is_valid():
                return {}, None
            commit = repo.head.commit
        except Exception as e:  # noqa: BLE001
            raise CorruptObject(str(e)) from e
    files: dict[str, str] = {}
    try:
        for path, blob in _walk_tree(commit.tree, ""):
            if blob.size > max_blob_bytes:
                continue
            data = blob.data_stream.read()
            if _is_binary(data):
                continue
            files[path] = _decode(data)
    except Exception as e:  # noqa: BLE001
        raise CorruptObject(str(e)) from e
    return files, commit.hexsha


def history_commits(repo_path: str) -> list:
    """All commits reachable from branch heads, earliest-first topo order."""
    repo = _open_repo(repo_path)
    return _topo_ordered_commits(_all_head_commits(repo))
