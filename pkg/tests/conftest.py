import time
from types import SimpleNamespace

import pytest

from riskbench.presets import iter_presets
from riskbench.registry import Registry
from riskbench.synthgen import generate, write_dataset
from riskbench.tasks import materialize


@pytest.fixture
def home(tmp_path, monkeypatch):
    """Isolated RISKBENCH_HOME for registry/ledger tests."""
    root = tmp_path / "rbhome"
    monkeypatch.setenv("RISKBENCH_HOME", str(root))
    return root


@pytest.fixture(scope="session")
def preset_suite(tmp_path_factory):
    """All four shipped presets generated, registered, and materialized once.

    Heavy (tens of seconds); shared by the integration and acceptance tests.
    Generation wall time per preset is recorded for the scale criterion.
    """
    root = tmp_path_factory.mktemp("preset-home")
    registry = Registry(home=root)
    timings, bundles, datasets = {}, {}, {}
    for preset in iter_presets():
        t0 = time.perf_counter()
        result = generate(preset.config)
        out = root / "gen" / preset.name
        write_dataset(result, out)
        timings[preset.name] = time.perf_counter() - t0
        ref = registry.register(out / "events.csv", out / "labels.csv", result.card, result.manifest)
        datasets[preset.name] = SimpleNamespace(
            ref=ref, dir=out, manifest=result.manifest, card=result.card
        )
        for spec in preset.task_specs:
            bundles[spec.task_id] = materialize(spec, registry, out_root=root / "bundles")
    return SimpleNamespace(
        home=root, registry=registry, timings=timings, bundles=bundles, datasets=datasets
    )
