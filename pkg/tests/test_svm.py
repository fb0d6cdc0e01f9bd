"""SMO solver vs. a QP reference, plus kernel classifier behavior."""

import numpy as np
import pytest

from qamm.models.svm import QsvmModel, dual_objective, smo_solve
from qamm.qsim import fidelity_kernel, rbf_kernel

cvxopt = pytest.importorskip("cvxopt")
from cvxopt import matrix, solvers  # noqa: E402

solvers.options["show_progress"] = False
solvers.options["abstol"] = 1e-10
solvers.options["reltol"] = 1e-10
solvers.options["feastol"] = 1e-9


def qp_reference(K, y, C):
    """Max-margin dual via interior point: max sum(a) - 1/2 a'Qa with
    0 <= a <= C, a'y = 0."""
    n = y.shape[0]
    Q = np.outer(y, y) * K
    P = matrix(Q + 1e-10 * np.eye(n))
    q = matrix(-np.ones(n))
    G = matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = matrix(np.concatenate([np.zeros(n), np.full(n, C)]))
    A = matrix(y.reshape(1, -1))
    b = matrix(np.zeros(1))
    sol = solvers.qp(P, q, G, h, A, b)
    return np.asarray(sol["x"]).ravel()


def separable_data(rng, n=30, d=3, gap=2.5):
    y = np.repeat([0, 1], n // 2)
    X = rng.normal(size=(n, d)) * 0.4
    X[:, 0] += gap * (2 * y - 1)
    return X, y.astype(np.int8)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_smo_matches_qp_objective_rbf(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, 50))
    X = rng.normal(size=(n, 3))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    if abs(y.sum()) == n:
        pytest.skip("degenerate draw")
    K = rbf_kernel(X, gamma=0.5)
    C = 1.0
    alpha, b, _ = smo_solve(K, y, C=C, tol=1e-6, max_passes=2000)
    assert (alpha >= -1e-9).all() and (alpha <= C + 1e-9).all()
    assert abs(alpha @ y) < 1e-9
    ref = qp_reference(K, y, C)
    w_smo = dual_objective(K, y, alpha)
    w_ref = dual_objective(K, y, ref)
    assert w_smo == pytest.approx(w_ref, abs=1e-4)


def test_smo_matches_qp_objective_fidelity():
    rng = np.random.default_rng(11)
    n = 40
    theta = rng.uniform(0.0, np.pi, size=(n, 4))
    y = np.where(np.cos(theta[:, 0]) > 0, 1.0, -1.0)
    K = fidelity_kernel(theta)
    alpha, _, _ = smo_solve(K, y, C=2.0, tol=1e-6, max_passes=2000)
    ref = qp_reference(K, y, 2.0)
    assert dual_objective(K, y, alpha) == pytest.approx(
        dual_objective(K, y, ref), abs=1e-4)


def test_smo_hard_margin_toy():
    # 1D points at -2,-1 (neg) and 1,2 (pos) with linear kernel: the
    # optimum puts alpha=0.5 on the inner pair, b=0, margin plane x=0
    x = np.array([-2.0, -1.0, 1.0, 2.0])
    y = np.array([-1.0, -1.0, 1.0, 1.0])
    K = np.outer(x, x)
    alpha, b, _ = smo_solve(K, y, C=10.0, tol=1e-8, max_passes=500)
    assert alpha == pytest.approx([0.0, 0.5, 0.5, 0.0], abs=1e-6)
    assert b == pytest.approx(0.0, abs=1e-6)
    margins = (alpha * y) @ K + b
    assert np.sign(margins).tolist() == y.tolist()


def test_qsvm_separable_rbf():
    rng = np.random.default_rng(21)
    X, y = separable_data(rng)
    model = QsvmModel(kernel="rbf").fit(X, y)
    assert (model.predict(X) == y).all()
    assert model.n_support >= 2
    # margins and the proba squash must rank identically
    df = model.decision_function(X)
    assert np.array_equal(np.argsort(df), np.argsort(model.predict_proba(X)))


def test_qsvm_fidelity_ring_data():
    # the 0..2pi min-max angle map makes the overlap kernel periodic:
    # the range endpoints encode to the same state.  Lay one class at
    # both ends and the other in the middle so the circle geometry is
    # actually separable, then expect a clean fit.
    rng = np.random.default_rng(21)
    x_outer = np.concatenate([rng.uniform(-4.0, -3.0, 10), rng.uniform(3.0, 4.0, 10)])
    x_inner = rng.uniform(-0.5, 0.5, 12)
    X = np.concatenate([x_outer, x_inner])[:, None]
    y = np.array([0] * 20 + [1] * 12, dtype=np.int8)
    model = QsvmModel(kernel="fidelity").fit(X, y)
    assert (model.predict(X) == y).all()


def test_qsvm_fidelity_blobs_mostly_separate():
    # same blobs as the rbf test; the wrap costs the extreme tails, so
    # expect strong but not perfect training accuracy
    rng = np.random.default_rng(21)
    X, y = separable_data(rng)
    model = QsvmModel(kernel="fidelity").fit(X, y)
    assert (model.predict(X) == y).mean() >= 0.9


def test_angle_map_wraps_endpoints():
    from qamm.qsim import AngleScaler, fidelity_kernel

    X = np.array([[0.0], [0.5], [1.0]])
    theta = AngleScaler().fit(X).transform(X)
    assert theta.ravel() == pytest.approx([0.0, np.pi, 2 * np.pi])
    K = fidelity_kernel(theta)
    assert K[0, 2] == pytest.approx(1.0)  # endpoints collapse
    assert K[0, 1] == pytest.approx(0.0, abs=1e-12)  # quarter turn apart


def test_qsvm_deterministic():
    rng = np.random.default_rng(22)
    X = rng.normal(size=(36, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=36) > 0).astype(np.int8)
    a = QsvmModel(kernel="rbf").fit(X, y)
    b = QsvmModel(kernel="rbf").fit(X, y)
    assert np.array_equal(a.alpha_y, b.alpha_y)
    assert a.b == b.b


def test_qsvm_fidelity_gram_is_valid():
    rng = np.random.default_rng(23)
    X = rng.normal(size=(25, 4))
    y = (X[:, 0] > 0).astype(np.int8)
    model = QsvmModel(kernel="fidelity").fit(X, y)
    K = model._last_gram
    assert np.allclose(np.diag(K), 1.0, atol=1e-12)
    assert np.allclose(K, K.T, atol=1e-12)
    assert (K >= -1e-12).all() and (K <= 1.0 + 1e-12).all()
    # PSD within round-off
    assert np.linalg.eigvalsh(K).min() > -1e-8


def test_smo_two_orthogonal_points():
    # identity Gram (orthogonal states), opposite labels: both points
    # saturate at alpha = 1 and a training point classifies as itself
    K = np.eye(2)
    y = np.array([-1.0, 1.0])
    alpha, b, _ = smo_solve(K, y, C=10.0, tol=1e-8, max_passes=200)
    assert alpha == pytest.approx([1.0, 1.0], abs=1e-9)
    f = (alpha * y) @ K + b
    assert f[0] < 0.0 < f[1]


def test_qsvm_permutation_invariant_decision():
    rng = np.random.default_rng(31)
    X, y = separable_data(rng, n=24)
    probe = rng.normal(size=(8, 3))
    a = QsvmModel(kernel="rbf", tol=1e-10).fit(X, y)
    perm = rng.permutation(24)
    b = QsvmModel(kernel="rbf", tol=1e-10).fit(X[perm], y[perm])
    assert a.decision_function(probe) == pytest.approx(
        b.decision_function(probe), abs=1e-8)


def test_qsvm_rejects_indefinite_gram():
    from qamm.errors import NonPsdKernel

    model = QsvmModel(kernel="rbf")
    bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # eigenvalues 3, -1
    model._train_gram = lambda X: bad
    with pytest.raises(NonPsdKernel):
        model.fit(np.zeros((2, 1)), np.array([0, 1], dtype=np.int8))


def test_qsvm_rbf_scale_gamma():
    rng = np.random.default_rng(24)
    X = rng.normal(size=(30, 5)) * 2.0
    y = (X[:, 1] > 0).astype(np.int8)
    model = QsvmModel(kernel="rbf", gamma="scale").fit(X, y)
    expect = 1.0 / (X.shape[1] * X.var())
    assert model.gamma_ == pytest.approx(expect)
