import json

import numpy as np
import pytest


def write_long_field(path, t, z, matrix):
    with open(path, "w") as fh:
        fh.write("t,z,value\n")
        for i, ti in enumerate(t):
            for j, zj in enumerate(z):
                fh.write(f"{ti:.17g},{zj:.17g},{matrix[i, j]:.17g}\n")


@pytest.fixture
def synthetic_run(tmp_path):
    """A small fake equilibrium output directory."""
    t = np.linspace(0.0, 2.0, 9)
    z = np.linspace(0.0, 1.0, 5)
    uniform = np.tile(np.linspace(1.0, 2.0, 9)[:, None], (1, 5))
    for name in ("k", "c", "K"):
        write_long_field(tmp_path / f"fields_{name}.csv", t, z, uniform)
    resid = [0.1, 0.01, 1e-4, 1e-9]
    with open(tmp_path / "residuals.csv", "w") as fh:
        fh.write("sweep,y_norm_residual\n")
        for i, r in enumerate(resid):
            fh.write(f"{i},{r:.17g}\n")
    cert = {"fixed_point_sup": 1e-6, "dynamics_sup": 1e-9, "euler_sup": 1e-7}
    with open(tmp_path / "certification.csv", "w") as fh:
        fh.write("name,value\n")
        for k, v in cert.items():
            fh.write(f"{k},{v:.17g}\n")
    with open(tmp_path / "path.csv", "w") as fh:
        fh.write("t,k,c,theta,dynamics_residual,euler_residual\n")
        for ti in t:
            fh.write(f"{ti},{2.0 + ti},{1.0},{np.exp(-0.05 * ti)},0,0\n")
    manifest = {
        "converged": True,
        "y_tol": 1e-8,
        "expect_spatially_uniform": True,
        "certification": cert,
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    return tmp_path
