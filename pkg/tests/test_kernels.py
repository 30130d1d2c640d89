import os
import subprocess
import sys

import numpy as np
import pytest

from gieshield import _kernels
from gieshield._kernels import fallback

SCRIPT = """
import json
from gieshield import _kernels, scenario as sc
tab = sc.run(sc.recipe_path("{name}"))
print(json.dumps({{"backend": _kernels.BACKEND, "E_N": tab.column("E_N").tolist()}}))
"""


def _run(name, pure):
    env = dict(os.environ)
    env.pop("GIESHIELD_PURE_PYTHON", None)
    if pure:
        env["GIESHIELD_PURE_PYTHON"] = "1"
    r = subprocess.run([sys.executable, "-c", SCRIPT.format(name=name)], env=env,
                       capture_output=True, text=True, check=True)
    import json
    return json.loads(r.stdout)


def test_backend_flag():
    assert _kernels.BACKEND in ("cython", "python")


def test_pure_python_switch():
    out = _run("gravity_cat_linear_silica", pure=True)
    assert out["backend"] == "python"


@pytest.mark.skipif(_kernels.BACKEND != "cython", reason="compiled core not built")
def test_shield_decoherence_parity():
    rng = np.random.default_rng(5)
    g = rng.normal(size=(7, 4)) * 1e3
    w = rng.uniform(50, 500, size=7)
    nbar = rng.uniform(0, 20, size=7)
    t = np.linspace(0, 0.1, 33)
    a = _kernels.shield_decoherence(g, w, nbar, t)
    b = fallback.shield_decoherence(g, w, nbar, t)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-12, atol=1e-12)


@pytest.mark.skipif(_kernels.BACKEND != "cython", reason="compiled core not built")
@pytest.mark.parametrize("name", ["trap_revivals_lead", "markovian_diffusion_gaussian",
                                  "shield_mediated_linear_lead"])
def test_engine_parity_across_backends(name):
    fast = _run(name, pure=False)
    slow = _run(name, pure=True)
    assert fast["backend"] == "cython" and slow["backend"] == "python"
    assert np.allclose(fast["E_N"], slow["E_N"], rtol=1e-9, atol=1e-11)
