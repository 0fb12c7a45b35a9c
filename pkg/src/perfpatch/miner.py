"""Walk a git branch's history and pull out before/after pairs of C# files."""
from __future__ import annotations

import json
import logging
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import BranchNotFound, RepositoryUnreadable

log = logging.getLogger(__name__)

DEFAULT_KEYWORDS: tuple[str, ...] = (
    "perf",
    "performance",
    "reduce allocation",
    "optimiz",
    "speed up",
    "faster",
    "memory usage",
    "alloc",
)
DEFAULT_EXTENSION = ".cs"
EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"


@dataclass(frozen=True)
class FileChange:
    path: str
    before_text: str
    after_text: str


@dataclass(frozen=True)
class CommitRecord:
    commit_id: str
    message: str
    is_perf: bool
    parent_id: str
    file_changes: tuple[FileChange, ...] = ()
    repo_id: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["file_changes"] = [asdict(fc) for fc in self.file_changes]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CommitRecord":
        return cls(
            commit_id=d["commit_id"],
            message=d["message"],
            is_perf=bool(d["is_perf"]),
            parent_id=d.get("parent_id", ""),
            file_changes=tuple(FileChange(**fc) for fc in d.get("file_changes", [])),
            repo_id=d.get("repo_id", ""),
        )


def classify_perf_commit(message: str, keywords: Sequence[str] = DEFAULT_KEYWORDS) -> bool:
    """True when any keyword occurs in ``message``, ignoring case."""
    lowered = message.casefold()
    return any(k.casefold() in lowered for k in keywords)


def _git(repo: Path, *args: str, check: bool = True) -> str:
    proc = subprocess.run(
        ["git", "-C", str(repo), *args],
        capture_output=True,
        check=False,
    )
    if check and proc.returncode != 0:
        raise RepositoryUnreadable(f"git {' '.join(args)} failed in {repo}: {proc.stderr.decode(errors='replace').strip()}")
    return proc.stdout.decode("utf-8", errors="replace")


class _BlobReader:
    """Streams file contents out of one ``git cat-file --batch`` process."""

    def __init__(self, repo: Path):
        self._proc = subprocess.Popen(
            ["git", "-C", str(repo), "cat-file", "--batch"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
        )

    def read(self, rev: str, path: str) -> str:
        assert self._proc.stdin and self._proc.stdout
        self._proc.stdin.write(f"{rev}:{path}\n".encode())
        self._proc.stdin.flush()
        header = self._proc.stdout.readline().decode()
        if header.rstrip().endswith("missing"):
            return ""
        size = int(header.split()[2])
        data = self._proc.stdout.read(size)
        self._proc.stdout.read(1)  # trailing newline
        return data.decode("utf-8-sig", errors="replace")

    def close(self) -> None:
        if self._proc.stdin:
            self._proc.stdin.close()
        self._proc.wait()


def _check_repo(repo: Path, branch: str) -> str:
    if not repo.exists():
        raise RepositoryUnreadable(f"{repo} does not exist")
    probe = subprocess.run(["git", "-C", str(repo), "rev-parse", "--git-dir"], capture_output=True)
    if probe.returncode != 0:
        raise RepositoryUnreadable(f"{repo} is not a git repository")
    ref = subprocess.run(
        ["git", "-C", str(repo), "rev-parse", "--verify", "--quiet", f"{branch}^{{commit}}"],
        capture_output=True,
    )
    if ref.returncode != 0:
        raise BranchNotFound(f"branch {branch!r} not found in {repo}")
    return ref.stdout.decode().strip()


def _changed_paths(repo: Path, parent: str, commit: str) -> list[tuple[str, str]]:
    # renames show up as delete + add; they are not paired
    out = _git(repo, "diff-tree", "-r", "--no-renames", "--name-status", "-z", parent or EMPTY_TREE, commit)
    parts = [p for p in out.split("\0") if p]
    return [(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]


def crawl_history(
    repo_path: str | Path,
    branch: str = "main",
    max_commits: int | None = None,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    extension: str = DEFAULT_EXTENSION,
    repo_id: str | None = None,
) -> Iterator[CommitRecord]:
    """Yield commits on ``branch`` newest first, following first parents.

    Only files ending in ``extension`` whose text differs from the first
    parent's version become :class:`FileChange` entries. ``repo_id``
    defaults to the directory name of the repository.
    """
    repo = Path(repo_path)
    tip = _check_repo(repo, branch)
    args = ["rev-list", "--first-parent", "--parents", tip]
    if max_commits is not None:
        args.insert(1, f"--max-count={max_commits}")
    lines = _git(repo, *args).splitlines()
    repo_id = repo_id or repo.resolve().name
    blobs = _BlobReader(repo)
    try:
        for line in lines:
            ids = line.split()
            commit, parent = ids[0], (ids[1] if len(ids) > 1 else "")
            message = _git(repo, "log", "-1", "--format=%B", commit).strip("\n")
            changes = []
            for status, path in _changed_paths(repo, parent, commit):
                if not path.endswith(extension):
                    continue
                before = blobs.read(parent, path) if parent and status != "A" else ""
                after = blobs.read(commit, path) if status != "D" else ""
                if before == after:
                    continue
                changes.append(FileChange(path, before, after))
            yield CommitRecord(
                commit_id=commit,
                message=message,
                is_perf=classify_perf_commit(message, keywords),
                parent_id=parent,
                file_changes=tuple(changes),
                repo_id=repo_id,
            )
    finally:
        blobs.close()


def mine_single_file_perf_commits(repo_path: str | Path, branch: str = "main", **kw) -> list[CommitRecord]:
    """Perf commits that touch exactly one C# file (drops squash merges)."""
    return [r for r in crawl_history(repo_path, branch, **kw) if r.is_perf and len(r.file_changes) == 1]


def crawl_many(repo_paths: Iterable[str | Path], branch: str = "main", workers: int = 4, **kw) -> list[list[CommitRecord]]:
    """Crawl several repositories in parallel, one worker per repository."""
    paths = list(repo_paths)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(lambda p: list(crawl_history(p, branch, **kw)), paths))


def write_jsonl(records: Iterable, path: str | Path) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_dict(), ensure_ascii=False) + "\n")
            n += 1
    return n


def read_commits(path: str | Path) -> list[CommitRecord]:
    with open(path, encoding="utf-8") as fh:
        return [CommitRecord.from_dict(json.loads(line)) for line in fh if line.strip()]
