"""Davidson iteration for the smallest eigenpair of a symmetric operator
acting on block tensors.

No preconditioner is applied.  The working subspace is tiny (default two
vectors); when it fills up it collapses onto the current Ritz vector and
grows again.  Basis candidates are orthogonalized by modified Gram-Schmidt;
on breakdown (candidate norm below threshold) the candidate is replaced by a
seeded random tensor spanning the admissible blocks, so the iteration can
escape invariant subspaces deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .btensor import BlockTensor, add, inner, random_tensor
from .errors import BlockStructureError


@dataclass(frozen=True)
class DavidsonConfig:
    max_iter: int = 25
    residual_tol: float = 1e-8
    max_subspace: int = 2
    reorth_tol: float = 1e-10
    seed: int = 7

    def __post_init__(self):
        if self.max_subspace < 2:
            raise ValueError("max_subspace must be at least 2")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class SolveResult:
    eigenvalue: float
    eigenvector: BlockTensor
    residual_norm: float
    iterations: int
    matvecs: int
    converged: bool
    ritz_values: list  # one per iteration; non-increasing for symmetric ops


def _lincomb(vectors, weights) -> BlockTensor:
    out = vectors[0].scaled(float(weights[0]))
    for v, w in zip(vectors[1:], weights[1:]):
        out = add(out, v, 1.0, float(w))
    return out


def davidson(apply_op, x0: BlockTensor, config: DavidsonConfig | None = None) -> SolveResult:
    """Iterate toward the smallest eigenpair of ``apply_op``.

    ``apply_op`` maps a block tensor to one with identical indices and must
    be symmetric in the inner product; ``x0`` is the starting guess (a good
    guess makes the fixed small iteration count effective).
    """
    cfg = config if config is not None else DavidsonConfig()
    nrm = x0.norm()
    if nrm == 0.0:
        raise BlockStructureError("davidson needs a nonzero starting vector")
    rng = np.random.default_rng(cfg.seed)

    basis = [x0.scaled(1.0 / nrm)]
    images = [apply_op(basis[0])]
    matvecs = 1
    proj = np.array([[inner(basis[0], images[0])]])

    theta = float(proj[0, 0])
    ritz, ritz_image = basis[0], images[0]
    rnorm = np.inf
    iterations = 0
    converged = False
    ritz_values = []

    for it in range(1, cfg.max_iter + 1):
        iterations = it
        evals, evecs = np.linalg.eigh(proj)
        theta = float(evals[0])
        ritz_values.append(theta)
        s = evecs[:, 0]
        ritz = _lincomb(basis, s)
        ritz_image = _lincomb(images, s)
        residual = add(ritz_image, ritz, 1.0, -theta)
        rnorm = residual.norm()
        if rnorm <= cfg.residual_tol:
            converged = True
            break
        if it == cfg.max_iter:
            break

        if len(basis) >= cfg.max_subspace:
            # restart: collapse onto the Ritz vector (no extra matvec)
            basis = [ritz]
            images = [ritz_image]
            proj = np.array([[theta]])

        cand = residual
        for v in basis:
            cand = add(cand, v, 1.0, -inner(v, cand))
        cnorm = cand.norm()
        if cnorm < cfg.reorth_tol:
            fresh = False
            for _ in range(3):
                cand = random_tensor(x0.indices, x0.total_charge, rng, fmt=x0.format)
                for v in basis:
                    cand = add(cand, v, 1.0, -inner(v, cand))
                cnorm = cand.norm()
                if cnorm >= cfg.reorth_tol:
                    fresh = True
                    break
            if not fresh:
                # admissible space is exhausted; the Ritz pair is exact
                converged = rnorm <= cfg.residual_tol
                break
        cand = cand.scaled(1.0 / cnorm)
        basis.append(cand)
        images.append(apply_op(cand))
        matvecs += 1
        k = len(basis)
        proj = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                proj[i, j] = inner(basis[i], images[j])

    return SolveResult(eigenvalue=theta, eigenvector=ritz, residual_norm=rnorm,
                       iterations=iterations, matvecs=matvecs,
                       converged=converged, ritz_values=ritz_values)
