"""On-disk episode storage with bit-exact round-trips and a windowed loader.

Layout: one directory per dataset holding `manifest.json` plus one binary
file per episode under `episodes/`. Episode files carry a little-endian
header (magic `SWMD`, version, key table with dtype code / shape / offset /
byte count) followed by raw C-order array bytes; see docs/format.md.

Keys are either per-step (leading dimension = episode length, e.g. pixels,
state, action, success) or per-episode (stored once, e.g. goal arrays).
The windowed reader yields `num_steps` frames strided by `frameskip`; an
episode of length T contributes max(0, T - (num_steps - 1) * frameskip)
windows.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"SWMD"
FORMAT_VERSION = 1

_DTYPE_CODES = {
    np.dtype(np.uint8): 0,
    np.dtype(np.float32): 1,
    np.dtype(np.int64): 2,
    np.dtype(np.float64): 3,
    np.dtype(np.int32): 4,
    np.dtype(np.bool_): 5,
}
_CODE_DTYPES = {v: k for k, v in _DTYPE_CODES.items()}


def resolve_root(root=None) -> Path:
    if root is not None:
        return Path(root)
    env = os.environ.get("SWM_HOME")
    if env:
        return Path(env)
    return Path.home() / ".swm"


def dataset_dir(name: str, root=None) -> Path:
    return resolve_root(root) / "datasets" / name


def _write_episode_file(path: Path, arrays: dict):
    names = sorted(arrays)
    blobs = []
    entries = b""
    offset = 0
    for name in names:
        arr = np.ascontiguousarray(arrays[name])
        if arr.dtype not in _DTYPE_CODES:
            raise ValueError(f"unsupported dtype {arr.dtype} for key {name!r}")
        nb = name.encode("utf-8")
        entries += struct.pack("<H", len(nb)) + nb
        entries += struct.pack("<BB", _DTYPE_CODES[arr.dtype], arr.ndim)
        entries += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
        entries += struct.pack("<QQ", offset, arr.nbytes)
        offset += arr.nbytes
        blobs.append(arr)
    header = MAGIC + struct.pack("<II", FORMAT_VERSION, len(names)) + entries
    with open(path, "wb") as f:
        f.write(header)
        for arr in blobs:
            f.write(arr.tobytes())


def _read_episode_header(path: Path):
    with open(path, "rb") as f:
        head = f.read(4 + 8)
        if head[:4] != MAGIC:
            raise ValueError(f"{path}: not an episode file (bad magic)")
        version, nkeys = struct.unpack("<II", head[4:])
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        table = {}
        for _ in range(nkeys):
            (nlen,) = struct.unpack("<H", f.read(2))
            name = f.read(nlen).decode("utf-8")
            code, ndim = struct.unpack("<BB", f.read(2))
            shape = struct.unpack(f"<{ndim}I", f.read(4 * ndim)) if ndim else ()
            off, nbytes = struct.unpack("<QQ", f.read(16))
            table[name] = (_CODE_DTYPES[code], shape, off, nbytes)
        payload_start = f.tell()
    return table, payload_start


class EpisodeStore:
    """Single-writer dataset builder; readers must wait for finalize()."""

    STEP_KEYS = ("action", "pixels", "state", "success")
    EPISODE_KEYS = ("goal_pixels", "goal_state")

    def __init__(self, name: str, env_id: str, root=None, overwrite: bool = False):
        self.name = name
        self.env_id = env_id
        self.path = dataset_dir(name, root)
        manifest = self.path / "manifest.json"
        if manifest.exists():
            if not overwrite:
                raise FileExistsError(
                    f"dataset {name!r} already exists at {self.path}; pass overwrite to replace"
                )
            for old in sorted((self.path / "episodes").glob("*.swmd")):
                old.unlink()
            manifest.unlink()
        (self.path / "episodes").mkdir(parents=True, exist_ok=True)
        self._episodes: list = []
        self._signature: dict | None = None
        self._finalized = False

    def _check_signature(self, step_arrays: dict, episode_arrays: dict):
        sig = {}
        length = None
        for key, arr in step_arrays.items():
            if length is None:
                length = arr.shape[0]
            elif arr.shape[0] != length:
                raise ValueError(
                    f"step key {key!r} has length {arr.shape[0]}, expected {length}"
                )
            sig[key] = ("step", str(arr.dtype), tuple(arr.shape[1:]))
        for key, arr in episode_arrays.items():
            sig[key] = ("episode", str(arr.dtype), tuple(arr.shape))
        if self._signature is None:
            self._signature = sig
        elif sig != self._signature:
            for key in sorted(set(sig) | set(self._signature)):
                if sig.get(key) != self._signature.get(key):
                    raise ValueError(
                        f"episode signature mismatch for key {key!r}: "
                        f"{sig.get(key)} vs {self._signature.get(key)}"
                    )
        return length

    def append(self, step_arrays: dict, episode_arrays: dict, *, seed: int,
               assignment: dict, varied=()):
        if self._finalized:
            raise RuntimeError("store already finalized")
        step_arrays = {k: np.asarray(v) for k, v in step_arrays.items()}
        episode_arrays = {k: np.asarray(v) for k, v in episode_arrays.items()}
        length = self._check_signature(step_arrays, episode_arrays)
        idx = len(self._episodes)
        rel = f"episodes/ep_{idx:05d}.swmd"
        _write_episode_file(self.path / rel, {**step_arrays, **episode_arrays})
        self._episodes.append({
            "file": rel,
            "length": int(length if length is not None else 0),
            "seed": int(seed),
            "assignment": {k: assignment[k] for k in sorted(assignment)},
            "varied": sorted(varied),
        })

    def finalize(self) -> dict:
        keys = {}
        for key, (per, dtype, shape) in (self._signature or {}).items():
            keys[key] = {"per": per, "dtype": dtype, "shape": list(shape)}
        manifest = {
            "format_version": FORMAT_VERSION,
            "dataset": self.name,
            "env_id": self.env_id,
            "episode_count": len(self._episodes),
            "keys": keys,
            "episodes": self._episodes,
        }
        text = json.dumps(manifest, sort_keys=True, indent=2)
        (self.path / "manifest.json").write_text(text + "\n", encoding="utf-8")
        self._finalized = True
        return manifest


def store_create(name: str, env_id: str, root=None, overwrite: bool = False) -> EpisodeStore:
    return EpisodeStore(name, env_id, root=root, overwrite=overwrite)


class EpisodeDataset:
    """Windowed reader over a finalized dataset.

    window(e, start) returns the requested per-step keys sliced to
    [start, start + (num_steps-1)*frameskip] with stride frameskip, plus any
    requested per-episode keys as stored. Integer indexing enumerates all
    windows across episodes in order.
    """

    def __init__(self, name: str, frameskip: int = 1, num_steps: int = 16,
                 keys_to_load=None, root=None):
        if frameskip < 1 or num_steps < 1:
            raise ValueError("frameskip and num_steps must be >= 1")
        self.name = name
        self.frameskip = frameskip
        self.num_steps = num_steps
        self.path = dataset_dir(name, root)
        manifest_path = self.path / "manifest.json"
        if not manifest_path.exists():
            raise FileNotFoundError(
                f"dataset {name!r} not found (or not finalized) at {self.path}"
            )
        self.manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        if self.manifest.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported dataset format version in {manifest_path}")
        self.env_id = self.manifest["env_id"]
        self.keys = self.manifest["keys"]
        self._episodes = self.manifest["episodes"]
        if len(self._episodes) != self.manifest["episode_count"]:
            raise ValueError(f"manifest of {name!r} is inconsistent (episode count)")
        self._verify_payloads()
        step_keys = sorted(k for k, v in self.keys.items() if v["per"] == "step")
        if keys_to_load is None:
            self.keys_to_load = step_keys
        else:
            unknown = sorted(set(keys_to_load) - set(self.keys))
            if unknown:
                raise KeyError(
                    f"unknown key(s) {unknown}; stored keys: {sorted(self.keys)}"
                )
            self.keys_to_load = list(keys_to_load)
        self._index = []
        for e, ep in enumerate(self._episodes):
            for s in range(self.num_windows(e)):
                self._index.append((e, s))
        self._tables: dict = {}

    def _verify_payloads(self):
        for ep in self._episodes:
            path = self.path / ep["file"]
            if not path.exists():
                raise ValueError(f"missing episode payload {path}")
            table, payload_start = _read_episode_header(path)
            expected = payload_start + sum(nb for (_, _, _, nb) in table.values())
            actual = path.stat().st_size
            if actual != expected:
                raise ValueError(
                    f"corrupt episode payload {path}: {actual} bytes, expected {expected}"
                )

    @property
    def episode_count(self) -> int:
        return self.manifest["episode_count"]

    def episode_length(self, e: int) -> int:
        return self._episodes[e]["length"]

    def episode_meta(self, e: int) -> dict:
        return self._episodes[e]

    def num_windows(self, e: int) -> int:
        span = (self.num_steps - 1) * self.frameskip
        return max(0, self.episode_length(e) - span)

    def __len__(self):
        return len(self._index)

    def _table(self, e: int):
        if e not in self._tables:
            self._tables[e] = _read_episode_header(self.path / self._episodes[e]["file"])
        return self._tables[e]

    def _load_key(self, e: int, key: str) -> np.ndarray:
        table, payload_start = self._table(e)
        dtype, shape, off, nbytes = table[key]
        mm = np.memmap(self.path / self._episodes[e]["file"], dtype=np.uint8,
                       mode="r", offset=payload_start + off, shape=(nbytes,))
        return np.frombuffer(mm, dtype=dtype).reshape(shape)

    def load_episode(self, e: int, keys=None) -> dict:
        if keys is None:
            keys = sorted(self.keys)
        out = {}
        for key in keys:
            if key not in self.keys:
                raise KeyError(f"unknown key {key!r}; stored keys: {sorted(self.keys)}")
            out[key] = self._load_key(e, key)
        return out

    def window(self, e: int, start: int) -> dict:
        if not 0 <= start < self.num_windows(e):
            raise IndexError(f"window start {start} out of range for episode {e}")
        stop = start + (self.num_steps - 1) * self.frameskip + 1
        out = {}
        for key in self.keys_to_load:
            arr = self._load_key(e, key)
            if self.keys[key]["per"] == "step":
                out[key] = np.array(arr[start:stop:self.frameskip])
            else:
                out[key] = np.array(arr)
        return out

    def __getitem__(self, i: int) -> dict:
        e, s = self._index[i]
        return self.window(e, s)


def dataset_open(name: str, frameskip: int = 1, num_steps: int = 16,
                 keys_to_load=None, root=None) -> EpisodeDataset:
    return EpisodeDataset(name, frameskip=frameskip, num_steps=num_steps,
                          keys_to_load=keys_to_load, root=root)
