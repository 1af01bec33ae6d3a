"""
Binary field snapshots, trajectories and tensor manifests.

Snapshot layout (little endian)::

    magic    4 bytes   b"NSFS"
    version  uint16
    N        uint32
    data     3 * N**3 complex64, component-major; within a component the
             wavevectors run lexicographically from (-N/2, -N/2, -N/2)
             to (N/2 - 1, N/2 - 1, N/2 - 1)

Each snapshot ``name.nsf`` has a sidecar ``name.json`` with the field flags
and the provenance of the run that produced it. Loading a snapshot and
saving it again reproduces the file byte for byte.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.settings import settings
from models.errors import SnapshotFormatError
from models.field_models import GridSpec, SpectralVectorField
from models.solver_models import Trajectory
from models.tensor_models import LowRankTensorField, RankOneTerm
from utils.logger import setup_logger

logger = setup_logger(__name__)

MAGIC = b"NSFS"
FORMAT_VERSION = 1
HEADER = np.dtype([("magic", "S4"), ("version", "<u2"), ("n", "<u4")])
DATA_TYPE = np.dtype("<c8")
SUFFIX = ".nsf"
_SPATIAL = (1, 2, 3)


def encode_field(u: SpectralVectorField) -> bytes:
    """Header plus coefficients in lexicographic wavevector order."""
    header = np.array([(MAGIC, FORMAT_VERSION, u.grid.N)], dtype=HEADER)
    data = np.fft.fftshift(u.coeffs, axes=_SPATIAL).astype(DATA_TYPE)
    return header.tobytes() + data.tobytes()


def decode_field(blob: bytes, flags: Optional[Dict[str, Any]] = None) -> SpectralVectorField:
    """
    Inverse of encode_field.

    Raises:
        SnapshotFormatError: On a wrong magic, an unknown version or a length mismatch
    """
    if len(blob) < HEADER.itemsize:
        raise SnapshotFormatError("snapshot shorter than its header")
    header = np.frombuffer(blob[:HEADER.itemsize], dtype=HEADER)[0]
    if header["magic"] != MAGIC:
        raise SnapshotFormatError(f"bad magic {header['magic']!r}")
    if int(header["version"]) != FORMAT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {int(header['version'])}")
    N = int(header["n"])
    if N <= 0 or N % 2:
        raise SnapshotFormatError(f"invalid grid size {N}")
    grid = GridSpec(N)
    expected = HEADER.itemsize + 3 * N ** 3 * DATA_TYPE.itemsize
    if len(blob) != expected:
        raise SnapshotFormatError(f"snapshot has {len(blob)} bytes, expected {expected} for N={N}")
    data = np.frombuffer(blob[HEADER.itemsize:], dtype=DATA_TYPE).reshape(grid.vector_shape)
    coeffs = np.fft.ifftshift(data.astype(np.complex128), axes=_SPATIAL)
    flags = flags or {}
    return SpectralVectorField(
        grid,
        coeffs,
        bool(flags.get("divergence_free", False)),
        bool(flags.get("mean_zero", False)),
        dict(flags.get("meta", {})),
    )


def _write_json(path: Path, payload: Dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SnapshotFormatError(f"unreadable sidecar {path}: {exc}") from exc


class SnapshotStore:
    """Reads and writes snapshots below one directory."""

    def __init__(self, root: Optional[Path] = None):
        """
        Initialize the store.

        Args:
            root: Directory for snapshot files (defaults to settings.OUTPUT_DIR / "snapshots")
        """
        self.root = Path(root) if root is not None else settings.get_output_dir() / "snapshots"
        self.root.mkdir(parents=True, exist_ok=True)

    def _paths(self, name: str) -> Tuple[Path, Path]:
        return self.root / f"{name}{SUFFIX}", self.root / f"{name}.json"

    def save_field(self, u: SpectralVectorField, name: str,
                   provenance: Optional[Dict[str, Any]] = None) -> Path:
        data_path, sidecar_path = self._paths(name)
        data_path.write_bytes(encode_field(u))
        _write_json(sidecar_path, {
            "format_version": FORMAT_VERSION,
            "N": u.grid.N,
            "divergence_free": u.divergence_free,
            "mean_zero": u.mean_zero,
            "meta": u.meta,
            "provenance": provenance or {},
        })
        logger.debug("Wrote snapshot %s", data_path)
        return data_path

    def load_field(self, name: str) -> SpectralVectorField:
        data_path, sidecar_path = self._paths(name)
        if not data_path.is_file():
            raise SnapshotFormatError(f"snapshot not found: {data_path}")
        flags = _read_json(sidecar_path) if sidecar_path.is_file() else {}
        u = decode_field(data_path.read_bytes(), flags)
        if flags and flags.get("N") != u.grid.N:
            raise SnapshotFormatError(f"sidecar grid {flags.get('N')} disagrees with header N={u.grid.N}")
        return u

    def provenance(self, name: str) -> Dict[str, Any]:
        return _read_json(self._paths(name)[1]).get("provenance", {})

    def save_trajectory(
        self,
        trajectory: Trajectory,
        name: str,
        provenance: Optional[Dict[str, Any]] = None,
        error_estimates: Optional[List[float]] = None,
    ) -> Path:
        """One snapshot per stored time plus ``name/manifest.json``."""
        store = SnapshotStore(self.root / name)
        files = []
        for i, u in enumerate(trajectory.fields):
            store.save_field(u, f"step_{i:05d}")
            files.append(f"step_{i:05d}")
        manifest = store.root / "manifest.json"
        _write_json(manifest, {
            "format_version": FORMAT_VERSION,
            "kind": trajectory.kind,
            "times": list(trajectory.times),
            "files": files,
            "error_estimates": list(error_estimates or []),
            "provenance": provenance or {},
        })
        logger.info("Wrote trajectory of %d snapshots to %s", len(files), store.root)
        return manifest

    def load_trajectory(self, name: str) -> Trajectory:
        store = SnapshotStore(self.root / name)
        manifest = _read_json(store.root / "manifest.json")
        if len(manifest.get("times", [])) != len(manifest.get("files", [])):
            raise SnapshotFormatError("trajectory manifest lists unequal times and files")
        trajectory = Trajectory(kind=manifest.get("kind", "local"))
        for t, file in zip(manifest["times"], manifest["files"]):
            trajectory.append(t, store.load_field(file))
        return trajectory

    def save_tensor(self, state: LowRankTensorField, name: str,
                    provenance: Optional[Dict[str, Any]] = None) -> Path:
        """
        Factor snapshots plus a manifest of (coefficient, path, factor ids).

        Factors shared between terms are written once.
        """
        store = SnapshotStore(self.root / name)
        ids: Dict[int, str] = {}
        terms = []
        for term in state.terms:
            refs = []
            for factor in term.factors:
                if id(factor) not in ids:
                    ids[id(factor)] = f"factor_{len(ids):05d}"
                    store.save_field(factor, ids[id(factor)])
                refs.append(ids[id(factor)])
            c = complex(term.coefficient)
            terms.append({"coefficient": [c.real, c.imag], "path": list(term.path), "factors": refs})
        manifest = store.root / "manifest.json"
        _write_json(manifest, {
            "format_version": FORMAT_VERSION,
            "order": state.order,
            "N": state.grid.N,
            "terms": terms,
            "provenance": provenance or {},
        })
        logger.info("Wrote tensor with %d terms and %d factors to %s", len(terms), len(ids), store.root)
        return manifest

    def load_tensor(self, name: str) -> LowRankTensorField:
        store = SnapshotStore(self.root / name)
        manifest = _read_json(store.root / "manifest.json")
        grid = GridSpec(int(manifest["N"]))
        factors: Dict[str, SpectralVectorField] = {}
        state = LowRankTensorField(int(manifest["order"]), grid)
        for entry in manifest["terms"]:
            refs = []
            for ref in entry["factors"]:
                if ref not in factors:
                    factors[ref] = store.load_field(ref)
                refs.append(factors[ref])
            re, im = entry["coefficient"]
            state.add_term(RankOneTerm(complex(re, im), tuple(refs), tuple(entry["path"])))
        return state
