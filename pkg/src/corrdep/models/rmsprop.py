import numpy as np


def init_state(params: dict) -> dict:
    return {k: np.zeros_like(v) for k, v in params.items()}


def rmsprop_step(params: dict, grads: dict, state: dict, lr: float,
                 decay: float = 0.99, epsilon: float = 1e-8):
    """One RMSProp update, applied in place; returns ``(params, state)``.

    ``state <- decay * state + (1 - decay) * grad**2``
    ``param <- param - lr * grad / (sqrt(state) + epsilon)``
    """
    for k, g in grads.items():
        s = state[k]
        s *= decay
        s += (1.0 - decay) * g * g
        params[k] -= lr * g / (np.sqrt(s) + epsilon)
    return params, state
