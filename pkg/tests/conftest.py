"""Shared helpers: finite-difference gradient checking for Mlp networks."""
import numpy as np


def numeric_weight_grads(net, x, grad_output, h=1e-5):
    """Central-difference gradients of sum(output * grad_output) w.r.t. weights."""
    grad_output = np.atleast_2d(np.asarray(grad_output, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float))

    def loss():
        out, _ = net.forward_cached(x)
        return float(np.sum(out * grad_output))

    w_grads, b_grads = [], []
    for w in net.weights:
        g = np.zeros_like(w)
        it = np.nditer(w, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = w[idx]
            w[idx] = orig + h
            up = loss()
            w[idx] = orig - h
            down = loss()
            w[idx] = orig
            g[idx] = (up - down) / (2 * h)
        w_grads.append(g)
    for b in net.biases:
        g = np.zeros_like(b)
        for k in range(b.size):
            orig = b[k]
            b[k] = orig + h
            up = loss()
            b[k] = orig - h
            down = loss()
            b[k] = orig
            g[k] = (up - down) / (2 * h)
        b_grads.append(g)
    return w_grads, b_grads


def numeric_input_grad(net, x, grad_output, h=1e-5):
    """Central-difference gradient of sum(output * grad_output) w.r.t. the input."""
    grad_output = np.atleast_2d(np.asarray(grad_output, dtype=float))
    x = np.atleast_2d(np.asarray(x, dtype=float)).copy()
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        up = float(np.sum(net.forward_cached(x)[0] * grad_output))
        x[idx] = orig - h
        down = float(np.sum(net.forward_cached(x)[0] * grad_output))
        x[idx] = orig
        g[idx] = (up - down) / (2 * h)
    return g


def max_rel_error(analytic, numeric, floor=1e-6):
    """Max elementwise relative error with an absolute floor for tiny entries."""
    a = np.asarray(analytic, dtype=float)
    n = np.asarray(numeric, dtype=float)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float(np.max(np.abs(a - n) / denom))


def gradient_check(net, rng_seed=0, batch=4, tol=1e-4):
    """Assert analytic gradients match finite differences for one Mlp."""
    rng = np.random.default_rng(rng_seed)
    x = rng.normal(0.0, 1.0, size=(batch, net.input_dim))
    upstream = rng.normal(0.0, 1.0, size=(batch, net.output_dim))
    out, cache = net.forward_cached(x)
    (w_grads, b_grads), input_grad = net.backward(cache, upstream)
    num_w, num_b = numeric_weight_grads(net, x, upstream)
    num_x = numeric_input_grad(net, x, upstream)
    worst = 0.0
    for a, n in zip(w_grads, num_w):
        worst = max(worst, max_rel_error(a, n))
    for a, n in zip(b_grads, num_b):
        worst = max(worst, max_rel_error(a, n))
    worst = max(worst, max_rel_error(input_grad, num_x))
    assert worst < tol, f"gradient mismatch: max relative error {worst:.3e}"
    return worst
