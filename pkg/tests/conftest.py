import numpy as np
import pytest
import torch

from hwgnn.graph import Graph


def random_graph(n, p=0.3, d=3, seed=0, labeled=True, connected=False):
    """Erdos-Renyi graph with Gaussian features and random 0/1 labels."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], ju[keep]], axis=1)
    if connected:
        ring = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
        edges = np.concatenate([edges, ring])
    X = rng.normal(size=(n, d))
    labels = rng.integers(0, 2, size=n) if labeled else None
    return Graph(n, edges, X, labels)


def cycle_graph(n, d=2):
    edges = [(i, (i + 1) % n) for i in range(n)]
    return Graph(n, edges, np.ones((n, d)))


@pytest.fixture(autouse=True)
def _single_thread():
    torch.set_num_threads(1)
    yield


def perturb_parameters(model, seed, scale=0.3):
    """Random nonzero parameters so every gradient path is live."""
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in model.parameters():
            p.add_(scale * torch.randn(p.shape, generator=gen, dtype=p.dtype))


def finite_difference_check(seed, step=1e-5):
    """Max relative error between backprop and central differences per parameter group.

    Runs a 12-node graph through a two-block windowed model in float64 with
    the full training loss (focal + frequency anchor).
    """
    from hwgnn.basis import PolyBasis
    from hwgnn.graph import build_laplacian
    from hwgnn.losses import total_loss
    from hwgnn.model import HWModel
    from hwgnn.training import backward

    g = random_graph(12, p=0.35, d=3, seed=seed, connected=True)
    lap = build_laplacian(g)
    model = HWModel(3, PolyBasis("bernstein", 3), hidden=4, n_layers=2, n_windows=3,
                    mlp_hidden=5, generator=torch.Generator().manual_seed(seed)).double()
    perturb_parameters(model, seed)
    X = torch.as_tensor(g.features)
    mask = np.ones(12, dtype=bool)
    omega_bar = 1.3

    def loss_fn():
        out = model(X, lap, omega_bar)
        return total_loss(out.logits, out.centers, g.labels, mask, omega_bar, 0.5, 0.25, 2.0)[0]

    grads = backward(loss_fn(), model)
    errors = {}
    with torch.no_grad():
        for name, p in model.named_parameters():
            fd = torch.zeros_like(p)
            flat, fd_flat = p.view(-1), fd.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + step
                up = loss_fn().item()
                flat[i] = orig - step
                down = loss_fn().item()
                flat[i] = orig
                fd_flat[i] = (up - down) / (2 * step)
            denom = max(fd.norm().item(), grads[name].norm().item(), 1e-12)
            errors[name] = (grads[name] - fd).norm().item() / denom
    return errors


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    line = f"{name}: {'PASS' if passed else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
