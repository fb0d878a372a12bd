import numpy as np
import pytest

from encforge import autodiff as ad
from encforge.autodiff import ParamStore, Tape
from encforge.optim import Adam, grad_check


def quadratic_store(values):
    store = ParamStore()
    store.add("w", values)
    return store


def test_zero_gradients_leave_parameters_unchanged():
    store = quadratic_store([1.0, -2.0, 3.0])
    opt = Adam(store)
    before = store["w"].data.copy()
    for _ in range(5):
        store.zero_grads()
        opt.step()
    assert np.array_equal(store["w"].data, before)


def test_single_step_descends_on_square():
    store = quadratic_store([1.0])
    opt = Adam(store, lr=1e-2)
    with Tape() as tape:
        tape.backward(ad.sum_all(ad.square(store["w"])))
    opt.step()
    assert abs(store["w"].data[0]) < 1.0


def test_adam_converges_on_quadratic():
    store = quadratic_store([3.0, -4.0])
    opt = Adam(store, lr=0.05)
    for _ in range(500):
        with Tape() as tape:
            tape.backward(ad.sum_all(ad.square(store["w"])))
        opt.step()
    assert np.all(np.abs(store["w"].data) < 1e-3)


def test_step_zeroes_gradients():
    store = quadratic_store([2.0])
    opt = Adam(store)
    with Tape() as tape:
        tape.backward(ad.sum_all(ad.square(store["w"])))
    assert store["w"].grad[0] != 0
    opt.step()
    assert np.all(store["w"].grad == 0)


def test_same_seed_same_trajectory():
    def run():
        rng = np.random.default_rng(7)
        store = quadratic_store(rng.uniform(-1, 1, 6))
        opt = Adam(store, lr=1e-2)
        for _ in range(50):
            noise = rng.uniform(-1, 1, 6)  # deterministic "data"
            with Tape() as tape:
                tape.backward(ad.sum_all(ad.square(ad.sub(store["w"], noise))))
            opt.step()
        return store["w"].data.copy()

    a, b = run(), run()
    assert np.array_equal(a, b)  # bit-identical


def test_empty_store_rejected():
    with pytest.raises(ValueError):
        Adam(ParamStore())


# ---------------------------------------------------------------------------
# grad_check


def test_grad_check_on_sum_of_squares():
    store = quadratic_store(np.linspace(-1.5, 2.0, 8))

    report = grad_check(lambda p: ad.sum_all(ad.square(p["w"])), store,
                        eps=1e-6, tol=1e-9, floor=1e-6)
    assert report.passed
    assert report.deterministic
    assert report.max_rel_err < 1e-9


def test_grad_check_flags_nondeterminism():
    store = quadratic_store([1.0])
    rng = np.random.default_rng(0)

    def noisy_loss(p):
        return ad.sum_all(ad.hadamard(ad.square(p["w"]), rng.uniform(0.5, 1.5, 1)))

    report = grad_check(noisy_loss, store, eps=1e-6, tol=1e-6)
    assert not report.deterministic
    assert not report.passed
    assert "deterministic" in report.summary()


def test_grad_check_catches_wrong_gradient():
    store = quadratic_store([1.0, 2.0])

    def bad_loss(p):
        w = p["w"]
        out = ad._result(w.data ** 3, "cube",
                         lambda g: ad._accumulate(w, g * 2.0 * w.data))  # wrong: says d/dw=2w
        return ad.sum_all(out)

    report = grad_check(bad_loss, store, eps=1e-6, tol=1e-4)
    assert not report.passed
    assert report.failures
