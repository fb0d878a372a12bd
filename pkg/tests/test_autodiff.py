import numpy as np
import pytest

from encforge import autodiff as ad
from encforge.autodiff import (DimensionError, DomainError, NumericError,
                               ParamStore, Tape, Tensor)

RNG = np.random.default_rng(20240817)


def check_op_gradient(op, args, grad_args=(0,), tol=1e-6):
    """Spec invariant: analytic gradient matches central differences."""
    arrays = [RNG.uniform(-2, 2, size=s) if isinstance(s, tuple) else s for s in args]
    store = ParamStore()
    tensors = []
    for i, a in enumerate(arrays):
        t = store.add(f"a{i}", a) if i in grad_args else Tensor(np.asarray(a, dtype=np.float64))
        tensors.append(t)
    out = op(*tensors)
    R = RNG.uniform(-1, 1, size=out.data.shape)

    with Tape() as tape:
        loss = ad.sum_all(ad.hadamard(op(*tensors), R))
        tape.backward(loss)

    eps = 1e-6
    for ai in grad_args:
        data = store[f"a{ai}"].data
        analytic = store[f"a{ai}"].grad
        flat = data.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            fp = float((op(*tensors).data * R).sum())
            flat[i] = orig - eps
            fm = float((op(*tensors).data * R).sum())
            flat[i] = orig
            numeric = (fp - fm) / (2 * eps)
            a = analytic.reshape(-1)[i]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-4)
            assert rel < tol, f"{op.__name__} arg {ai} elem {i}: {a} vs {numeric}"


# ---------------------------------------------------------------------------
# closed-form values


def test_tanh_at_origin():
    assert ad.tanh(Tensor([0.0])).data == pytest.approx([0.0], abs=0)


def test_sigmoid_at_origin():
    assert ad.sigmoid(Tensor([0.0])).data == pytest.approx([0.5], abs=0)


def test_concat_values():
    out = ad.concat(Tensor([1.0, 2.0]), Tensor([3.0]))
    assert out.data.tolist() == [1.0, 2.0, 3.0]


def test_matmul_matches_numpy():
    A = RNG.uniform(-2, 2, (3, 4))
    B = RNG.uniform(-2, 2, (4, 2))
    assert np.allclose(ad.matmul(Tensor(A), Tensor(B)).data, A @ B)
    v = RNG.uniform(-2, 2, 4)
    assert np.allclose(ad.matmul(Tensor(A), Tensor(v)).data, A @ v)
    w = RNG.uniform(-2, 2, 3)
    assert np.allclose(ad.matmul(Tensor(w), Tensor(A)).data, w @ A)
    assert np.allclose(ad.matmul_t(Tensor(A), Tensor(B.T)).data, A @ B)


# ---------------------------------------------------------------------------
# error handling


def test_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError) as e:
        ad.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 5))))
    assert "(2, 3)" in str(e.value) and "(4, 5)" in str(e.value)
    with pytest.raises(DimensionError):
        ad.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))
    with pytest.raises(DimensionError):
        ad.concat(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 3))), axis=1)


def test_nonfinite_result_aborts():
    with pytest.raises(NumericError):
        ad.exp(Tensor([1000.0]))
    with pytest.raises(NumericError):
        Tensor([np.nan])


def test_log_domain():
    with pytest.raises(DomainError):
        ad.log(Tensor([0.0, 1.0]))


# ---------------------------------------------------------------------------
# gradients of every primitive (random inputs in [-2, 2])


def test_grad_add():
    check_op_gradient(ad.add, [(3, 4), (3, 4)], grad_args=(0, 1))


def test_grad_add_broadcast_bias():
    check_op_gradient(ad.add, [(5, 3), (3,)], grad_args=(0, 1))


def test_grad_sub():
    check_op_gradient(ad.sub, [(3, 4), (3, 4)], grad_args=(0, 1))


def test_grad_hadamard():
    check_op_gradient(ad.hadamard, [(3, 4), (3, 4)], grad_args=(0, 1))


def test_grad_scale():
    check_op_gradient(lambda a: ad.scale(a, -1.7), [(3, 4)])


def test_grad_matmul_2d_2d():
    check_op_gradient(ad.matmul, [(3, 4), (4, 2)], grad_args=(0, 1))


def test_grad_matmul_1d_2d():
    check_op_gradient(ad.matmul, [(4,), (4, 2)], grad_args=(0, 1))


def test_grad_matmul_2d_1d():
    check_op_gradient(ad.matmul, [(3, 4), (4,)], grad_args=(0, 1))


def test_grad_matmul_t():
    check_op_gradient(ad.matmul_t, [(3, 4), (5, 4)], grad_args=(0, 1))


def test_grad_concat():
    check_op_gradient(ad.concat, [(3, 2), (3, 5)], grad_args=(0, 1))


def test_grad_transpose():
    check_op_gradient(ad.transpose, [(3, 4)])


def test_grad_tanh():
    check_op_gradient(ad.tanh, [(3, 4)])


def test_grad_sigmoid():
    check_op_gradient(ad.sigmoid, [(3, 4)])


def test_grad_exp():
    check_op_gradient(ad.exp, [(3, 4)])


def test_grad_log():
    store = ParamStore()
    a = store.add("a", RNG.uniform(0.1, 2, (3, 4)))
    R = RNG.uniform(-1, 1, (3, 4))
    with Tape() as tape:
        tape.backward(ad.sum_all(ad.hadamard(ad.log(a), R)))
    assert np.allclose(a.grad, R / a.data, rtol=1e-10)


def test_grad_square():
    check_op_gradient(ad.square, [(3, 4)])


def test_grad_sum_all():
    check_op_gradient(ad.sum_all, [(3, 4)])


def test_grad_mean_all():
    check_op_gradient(ad.mean_all, [(3, 4)])


# ---------------------------------------------------------------------------
# tape semantics


def test_backward_does_not_touch_parameter_values():
    store = ParamStore()
    w = store.add("w", RNG.uniform(-2, 2, (4, 4)))
    before = w.data.copy()
    with Tape() as tape:
        tape.backward(ad.sum_all(ad.square(w)))
    assert np.array_equal(w.data, before)
    assert np.allclose(w.grad, 2 * before)


def test_two_backward_passes_accumulate():
    store = ParamStore()
    w = store.add("w", [1.0, 2.0])
    for _ in range(2):
        with Tape() as tape:
            tape.backward(ad.sum_all(ad.square(w)))
    assert np.allclose(w.grad, 2 * (2 * w.data))


def test_tape_single_use():
    store = ParamStore()
    w = store.add("w", [1.0])
    with Tape() as tape:
        loss = ad.sum_all(w)
        tape.backward(loss)
    with pytest.raises(RuntimeError):
        tape.backward(loss)


def test_backward_needs_scalar():
    store = ParamStore()
    w = store.add("w", [1.0, 2.0])
    with Tape() as tape:
        out = ad.square(w)
        with pytest.raises(DimensionError):
            tape.backward(out)


def test_no_tape_no_recording():
    store = ParamStore()
    w = store.add("w", [1.0, 2.0])
    store.zero_grads()
    out = ad.sum_all(ad.square(w))  # traced nowhere
    assert out.item() == pytest.approx(5.0)
    assert np.all(w.grad == 0)


def test_constants_get_no_gradient():
    store = ParamStore()
    w = store.add("w", [2.0])
    c = Tensor([3.0])
    with Tape() as tape:
        tape.backward(ad.sum_all(ad.hadamard(w, c)))
    assert c.grad is None
    assert np.allclose(w.grad, [3.0])


# ---------------------------------------------------------------------------
# ParamStore


def test_paramstore_duplicate_name():
    store = ParamStore()
    store.add("w", [1.0])
    with pytest.raises(ValueError):
        store.add("w", [2.0])


def test_paramstore_order_is_insertion_order():
    store = ParamStore()
    for name in ("zz", "aa", "mm"):
        store.add(name, [0.0])
    assert store.names() == ["zz", "aa", "mm"]


def test_paramstore_snapshot_and_load():
    store = ParamStore()
    w = store.add("w", [[1.0, 2.0]])
    snap = store.snapshot()
    w.data[...] = 9.0
    store.load(snap)
    assert w.data.tolist() == [[1.0, 2.0]]
    with pytest.raises(DimensionError):
        store.load({"w": np.zeros(3)})


def test_grad_slot_shape_matches_parameter():
    store = ParamStore()
    w = store.add("w", np.zeros((3, 2)))
    assert w.grad.shape == (3, 2)


# ---------------------------------------------------------------------------
# mse / gaussian_kl


def test_mse_identity_is_zero():
    x = Tensor(RNG.uniform(-1, 1, (4, 2)))
    assert ad.mse(x, x).item() == 0.0


def test_mse_closed_forms():
    assert ad.mse(Tensor([0.0, 0.0]), Tensor([1.0, 1.0])).item() == pytest.approx(1.0)
    assert ad.mse(Tensor([0.0]), Tensor([3.0])).item() == pytest.approx(9.0)


def test_mse_symmetric():
    for _ in range(20):
        a = RNG.uniform(-2, 2, (5, 2))
        b = RNG.uniform(-2, 2, (5, 2))
        assert ad.mse(Tensor(a), Tensor(b)).item() == ad.mse(Tensor(b), Tensor(a)).item()


def test_mse_sequence_form_and_errors():
    a = [Tensor([0.0, 0.0]), Tensor([1.0, 1.0])]
    b = [Tensor([1.0, 1.0]), Tensor([1.0, 1.0])]
    assert ad.mse(a, b).item() == pytest.approx(0.5)
    with pytest.raises(DimensionError):
        ad.mse(Tensor([1.0]), Tensor([1.0, 2.0]))
    with pytest.raises(DimensionError):
        ad.mse([Tensor([1.0])], [Tensor([1.0]), Tensor([2.0])])


def test_gaussian_kl_zero_at_prior():
    K = 6
    assert ad.gaussian_kl(Tensor(np.zeros(K)), Tensor(np.ones(K))).item() == 0.0


def test_gaussian_kl_closed_forms():
    assert ad.gaussian_kl(Tensor([1.0]), Tensor([1.0])).item() == pytest.approx(0.5)
    val = ad.gaussian_kl(Tensor([0.0]), Tensor([np.sqrt(np.e)])).item()
    assert val == pytest.approx((np.e - 2) / 2, rel=1e-12)
    assert val == pytest.approx(0.35914, abs=1e-5)


def test_gaussian_kl_nonnegative_random():
    for _ in range(50):
        mu = RNG.uniform(-3, 3, 8)
        sigma = RNG.uniform(0.05, 4, 8)
        assert ad.gaussian_kl(Tensor(mu), Tensor(sigma)).item() >= 0.0


def test_gaussian_kl_rejects_nonpositive_sigma():
    with pytest.raises(DomainError):
        ad.gaussian_kl(Tensor([0.0]), Tensor([0.0]))
    with pytest.raises(DomainError):
        ad.gaussian_kl(Tensor([0.0]), Tensor([-1.0]))
