import subprocess
import sys

import numpy as np
import pytest

import nlglrt._backend as backend

from tests.conftest import crandn

needs_compiled = pytest.mark.skipif(
    "compiled" not in backend.KERNELS, reason="compiled extension not built"
)


@needs_compiled
class TestAgreement:
    def test_gram(self, rng):
        a = crandn(rng, 6, 33) * 50
        py = backend.kernels("python").gram(a)
        c = backend.kernels("compiled").gram(a)
        assert np.max(np.abs(py - c)) <= 1e-12 * np.abs(py).max()

    @pytest.mark.parametrize("relative", [False, True])
    def test_hpd_inverse(self, rng, relative):
        a = crandn(rng, 5, 15)
        r = a @ a.conj().T
        py, s1 = backend.kernels("python").hpd_inverse(r, 1e-3, relative)
        c, s2 = backend.kernels("compiled").hpd_inverse(r, 1e-3, relative)
        assert s1 == s2 == 0
        assert np.max(np.abs(py - c)) <= 1e-10 * np.abs(py).max()

    def test_failure_status(self):
        for name in ("python", "compiled"):
            _, status = backend.kernels(name).hpd_inverse(np.diag([1.0, -1.0]) + 0j, 0.0, False)
            assert status != 0

    @pytest.mark.parametrize("m, k", [(2, 4), (4, 48), (8, 20)])
    def test_sliding_trace(self, rng, m, k):
        z = crandn(rng, m, 5 * k) * np.geomspace(1, 1000, m)[:, None]
        py, f1 = backend.kernels("python").sliding_trace(z, k, 1e-9, True)
        c, f2 = backend.kernels("compiled").sliding_trace(z, k, 1e-9, True)
        assert f1 == f2 == -1
        assert np.allclose(py, c, rtol=1e-9)

    def test_same_failing_window(self, rng):
        z = crandn(rng, 4, 80)
        z[:, 30:40] = 0
        _, f1 = backend.kernels("python").sliding_trace(z, 10, 0.0, False)
        _, f2 = backend.kernels("compiled").sliding_trace(z, 10, 0.0, False)
        # window 27..36 keeps only three nonzero columns, rank 3 < M
        assert f1 == f2 == 27


@pytest.mark.parametrize("name", ["python", "nonsense"])
def test_environment_override(name):
    code = "import nlglrt._backend as b; print(b.BACKEND)"
    env = {"NLGLRT_BACKEND": name, "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    if name == "python":
        assert out.returncode == 0 and out.stdout.strip() == "python"
    else:
        assert out.returncode != 0 and "NLGLRT_BACKEND" in out.stderr
