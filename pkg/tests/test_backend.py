import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsfrac import _backend, _pycore
from hsfrac._rules import profile_rules

core = _backend.compiled_module()
needs_core = pytest.mark.skipif(core is None, reason="compiled extension not built")


@needs_core
@given(st.floats(0.05, 3.0), st.integers(1, 3), st.lists(st.floats(0.0, 1e9), min_size=1, max_size=40))
@settings(max_examples=60, deadline=None)
def test_profile_backends_agree(s, N, psi):
    rules = profile_rules(s)
    psi = np.array(psi)
    a = _pycore.profile_batch(psi, s, N, *rules)
    b = core.profile_batch(psi, s, N, *rules)
    assert np.allclose(a, b, rtol=1e-13, atol=0)


@needs_core
def test_profile_backends_keep_shape():
    rules = profile_rules(0.7)
    psi = np.linspace(0, 12, 12).reshape(3, 4)
    a = _pycore.profile_batch(psi, 0.7, 2, *rules)
    b = core.profile_batch(psi, 0.7, 2, *rules)
    assert a.shape == b.shape == (3, 4)
    assert a[0, 0] == b[0, 0] == 0.0


@needs_core
def test_gk15_backends_agree():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(50, 15))
    f[3] = 0.0
    h = rng.uniform(1e-6, 2.0, 50)
    va, ea = _pycore.gk15_reduce(f, h)
    vb, eb = core.gk15_reduce(f, h)
    assert np.allclose(va, vb, rtol=1e-14, atol=1e-300)
    assert np.allclose(ea, eb, rtol=1e-12, atol=1e-300)


def test_gk15_integrates_cubic_exactly():
    from hsfrac._rules import GK_NODES

    x = np.asarray(GK_NODES)
    v, e = _pycore.gk15_reduce((x**3 + x**2)[None, :], np.array([1.0]))
    assert v[0] == pytest.approx(2 / 3, rel=1e-15)
    assert e[0] < 1e-13


def test_pure_python_override():
    env = dict(os.environ, HSFRAC_PURE_PYTHON="1")
    code = "import hsfrac; print(hsfrac.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_core
def test_suite_result_independent_of_backend():
    env = dict(os.environ, HSFRAC_PURE_PYTHON="1")
    code = "from hsfrac.kernels import green_halfspace_pairs as g; from hsfrac.params import Params; print(repr(float(g([0.4,0.1],[1.3,-0.5],Params(2,1,0.5)))))"
    pure = float(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    comp = float(subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True).stdout)
    assert pure == pytest.approx(comp, rel=1e-14)
    assert comp == pytest.approx(0.0444999977241142508, rel=1e-12)
