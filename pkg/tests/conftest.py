"""Shared fixtures: numba warm-up and the expensive episode-suite sweep."""

import numpy as np
import pytest

from smppi.bench import ScenarioConfig, run_suite
from smppi.projection import project_batch
from smppi.scenes import planar_bounds, planar_tray_scene
from smppi.world import initial_state, rollout_batch


@pytest.fixture(scope="session", autouse=True)
def jit_warmup():
    """Compile the numba kernels once so no individual test pays for it."""
    scene = planar_tray_scene()
    state = initial_state(scene)
    raw = np.full((2, 4, scene.dof), 2.0)
    project_batch(raw, state.joints, planar_bounds(), 0.1)
    rollout_batch(scene, state, 0.1 * np.ones((2, 3, scene.dof)), 0.1)


@pytest.fixture(scope="session")
def suite_results():
    """Episode suites behind the end-to-end success-rate and trend checks.

    The tray task runs the full batch-size sweep (its success trend is
    asserted); ball and hand-over only need the largest batch.  Roughly half
    an hour of compute, shared by every test that needs these numbers.
    """
    plans = {"tray": (256, 512, 1024), "ball": (1024,), "handover": (1024,)}
    results = {}
    for task, batch_sizes in plans.items():
        config = ScenarioConfig(task=task, batch_sizes=batch_sizes)
        _, summaries = run_suite(config)
        results[task] = summaries
    return results
