import numpy as np
import pytest

from stirapberry._backend import available_backends, backend_name, get_kernel
from stirapberry.evolve import propagate
from stirapberry.lambda_system import LambdaParams
from stirapberry.pulses import tangerine
from stirapberry.quantum import IDX_MINUS, basis_ket, density_from_pure

HAS_COMPILED = "compiled" in available_backends()


def reference_run(backend):
    params = LambdaParams()
    rho0 = density_from_pure(basis_ket(IDX_MINUS))
    return propagate(rho0, tangerine(1200.0, 120.0, n_steps=1024), params,
                     backend=backend)


def test_python_backend_always_available():
    assert backend_name("python") == "python"


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled extension not built")
def test_backends_agree():
    py = reference_run("python")
    cy = reference_run("compiled")
    assert np.max(np.abs(py.final_rho - cy.final_rho)) < 1e-11
    assert np.max(np.abs(py.populations - cy.populations)) < 1e-11
    assert np.max(np.abs(py.bloch - cy.bloch)) < 1e-11


@pytest.mark.parametrize("backend", available_backends())
def test_backend_is_deterministic(backend):
    first = reference_run(backend)
    second = reference_run(backend)
    assert np.array_equal(first.final_rho, second.final_rho)
    assert np.array_equal(first.populations, second.populations)


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        get_kernel("fortran")
