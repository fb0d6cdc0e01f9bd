"""Parameter-shift and adjoint gradients versus finite differences."""

import numpy as np

from qamm import qsim


def fd_param_grad(circ, params, inputs, qubits, h=1e-5):
    base = np.asarray(params, dtype=np.float64)
    grads = []
    for j in range(circ.n_params):
        up = base.copy()
        dn = base.copy()
        up[j] += h
        dn[j] -= h
        zu = qsim.expectations(circ, up, inputs=inputs, qubits=qubits)
        zd = qsim.expectations(circ, dn, inputs=inputs, qubits=qubits)
        grads.append((zu - zd) / (2 * h))
    return np.stack(grads, axis=-1)


def fd_input_grad(circ, params, inputs, qubits, h=1e-5):
    grads = []
    for j in range(circ.n_inputs):
        up = inputs.copy()
        dn = inputs.copy()
        up[:, j] += h
        dn[:, j] -= h
        zu = qsim.expectations(circ, params, inputs=up, qubits=qubits)
        zd = qsim.expectations(circ, params, inputs=dn, qubits=qubits)
        grads.append((zu - zd) / (2 * h))
    return np.stack(grads, axis=-1)


def test_param_shift_matches_fd_on_templates():
    rng = np.random.default_rng(31)
    for circ in (qsim.qnn_template(3, 2), qsim.vqe_template(4, 2), qsim.qrwkv_template(3)):
        params = rng.uniform(-np.pi, np.pi, circ.n_params)
        inputs = rng.uniform(0, 2 * np.pi, (3, circ.n_inputs))
        jac = qsim.param_jacobian(circ, params, inputs=inputs)
        fd = fd_param_grad(circ, params, inputs, None)
        assert np.abs(jac - fd).max() < 1e-6


def test_input_jacobian_matches_fd():
    rng = np.random.default_rng(32)
    circ = qsim.qnn_template(3, 1)
    params = rng.uniform(-np.pi, np.pi, circ.n_params)
    inputs = rng.uniform(0, 2 * np.pi, (4, 3))
    jac = qsim.input_jacobian(circ, params, inputs)
    fd = fd_input_grad(circ, params, inputs, None)
    assert np.abs(jac - fd).max() < 1e-6


def test_shared_parameter_across_gates():
    # One parameter feeding two gates with different scales: the shift
    # contributions must add.
    b = qsim.CircuitBuilder("shared", 2, n_params=1, n_inputs=1)
    b.ry(0, inp=0)
    b.ry(0, param=0)
    b.rz(1, param=0, scale=0.5)
    b.ry(1, param=0, scale=-1.0)
    b.cnot(0, 1)
    circ = b.build()
    rng = np.random.default_rng(33)
    params = rng.normal(size=1)
    inputs = rng.uniform(0, 2 * np.pi, (5, 1))
    jac = qsim.param_jacobian(circ, params, inputs=inputs)
    fd = fd_param_grad(circ, params, inputs, None)
    assert np.abs(jac - fd).max() < 1e-6


def test_amplitude_input_grad_matches_fd():
    rng = np.random.default_rng(34)
    circ = qsim.qasa_template(3, 2)
    params = rng.uniform(-np.pi, np.pi, circ.n_params)
    x = rng.normal(size=(4, 6)) + 0.1
    cot = rng.normal(size=(4, 3))

    grad = qsim.amplitude_input_grad(circ, params, x, cot)

    h = 1e-5
    fd = np.zeros_like(x)
    for j in range(x.shape[1]):
        up = x.copy()
        dn = x.copy()
        up[:, j] += h
        dn[:, j] -= h
        zu, _, _ = qsim.amplitude_forward(circ, params, up)
        zd, _, _ = qsim.amplitude_forward(circ, params, dn)
        fd[:, j] = ((zu - zd) * cot).sum(axis=1) / (2 * h)
    assert np.abs(grad - fd).max() < 1e-6


def test_amplitude_param_jacobian_matches_fd():
    rng = np.random.default_rng(35)
    circ = qsim.qasa_template(2, 2)
    params = rng.uniform(-np.pi, np.pi, circ.n_params)
    x = rng.normal(size=(3, 4))
    psi, _ = qsim.amplitude_encode(x, n=circ.n)
    jac = qsim.param_jacobian(circ, params, init_state=psi)

    h = 1e-5
    for j in range(circ.n_params):
        up = params.copy()
        dn = params.copy()
        up[j] += h
        dn[j] -= h
        zu = qsim.expectations(circ, up, init_state=psi)
        zd = qsim.expectations(circ, dn, init_state=psi)
        fd = (zu - zd) / (2 * h)
        assert np.abs(jac[:, :, j] - fd).max() < 1e-6


def test_jacobian_shapes():
    circ = qsim.qnn_template(3, 2)
    params = np.zeros(circ.n_params)
    inputs = np.zeros((7, 3))
    assert qsim.param_jacobian(circ, params, inputs=inputs).shape == (7, 3, circ.n_params)
    assert qsim.input_jacobian(circ, params, inputs).shape == (7, 3, 3)
    assert qsim.expectations(circ, params, inputs=inputs, qubits=[0]).shape == (7, 1)
