"""On-disk cache of fit results."""

from __future__ import annotations

import hashlib
import json
import logging
import zlib
from pathlib import Path
from typing import Union

import numpy as np
from diskcache import DEFAULT_SETTINGS, Cache

from qbm.lab.quantum.density import MomentVector
from qbm.lab.quantum.operators import HamiltonianSpec

from .learning import LearnConfig, LearnResult, fit_bm, fit_qbm

log = logging.getLogger(__name__)


class FitCache:
    def __init__(self, cache_dir: Union[Path, str]):
        """Cache LearnResults with diskcache, keyed by model terms, target and settings."""
        self.dir = Path(cache_dir) / "fits"
        self.setup()

        self.EXPIRE_TIME = 30 * 86400
        self.SETTINGS = dict(DEFAULT_SETTINGS)
        self.SETTINGS["size_limit"] = 2**32

    def setup(self):
        """Setup cache directory."""
        self.dir.mkdir(parents=True, exist_ok=True)
        msg = f"Using cache directory {self.dir.absolute().as_posix()}"
        log.debug(msg)

    def expire(self):
        """Remove expired items from cache."""
        with Cache(self.dir, **self.SETTINGS) as cache:
            cache.expire()

    def clear(self):
        """Remove all items from cache."""
        with Cache(self.dir, **self.SETTINGS) as cache:
            cache.clear()

    def get_key(self, mode: str, spec: HamiltonianSpec, target: np.ndarray, cfg: LearnConfig) -> str:
        """Generate cache key from the fit inputs.

        Weights of `spec` only enter the key when they seed the fit (`init="spec"`).
        """
        params = {
            "mode": mode,
            "n": spec.n,
            "terms": [[t.kind, list(t.sites), t.axis] for t in spec.terms],
            "target": [float.hex(float(v)) for v in np.asarray(target, dtype=np.float64)],
            "config": cfg.to_dict(),
        }
        if cfg.init == "spec":
            params["weights"] = [float.hex(float(w)) for w in spec.weights]
        digest = hashlib.sha256(json.dumps(params, sort_keys=True).encode()).hexdigest()
        return f"{mode}/{spec.n}/{digest}"

    def get(self, mode: str, spec: HamiltonianSpec, target: np.ndarray, cfg: LearnConfig) -> LearnResult | None:
        """Get a cached LearnResult, or None."""
        key = self.get_key(mode, spec, target, cfg)
        with Cache(self.dir, **self.SETTINGS) as cache:
            content = cache.get(key)
            if content:
                log.debug("Cache hit, returning decompressed fit result")
                return LearnResult.from_dict(json.loads(zlib.decompress(content).decode()))
        return None

    def set(self, spec: HamiltonianSpec, target: np.ndarray, cfg: LearnConfig, result: LearnResult):
        """Cache a fit result."""
        key = self.get_key(result.mode, spec, target, cfg)
        with Cache(self.dir, **self.SETTINGS) as cache:
            value = zlib.compress(json.dumps(result.to_dict()).encode())
            cache.set(key, value, expire=self.EXPIRE_TIME, retry=True)

    def fit(self, mode: str, spec: HamiltonianSpec, target: MomentVector | np.ndarray, cfg: LearnConfig) -> LearnResult:
        """Return the cached fit of `spec` to `target`, running and storing it on a miss."""
        values = target.align(spec) if isinstance(target, MomentVector) else np.asarray(target, dtype=np.float64)
        result = self.get(mode, spec, values, cfg)
        if result is None:
            fit = fit_qbm if mode == "qbm" else fit_bm
            result = fit(spec, values, cfg)
            self.set(spec, values, cfg, result)
        return result
