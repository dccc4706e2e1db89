"""Pure-python reference kernel for the block-pair GEMM accumulate loop."""

from scipy.linalg.blas import dgemm

BACKEND = "python"


def accumulate_pair_products(out2, pairs):
    """For each (a, b) in order: compute p = a @ b, then out2 += p.

    The product-then-add split fixes the floating-point summation order.
    The product itself goes through the same BLAS dgemm call the compiled
    kernel makes — (a @ b)^T = b^T @ a^T on transposed views, which are
    Fortran-contiguous, so the wrapper neither copies nor transposes — and
    elementwise addition is order-independent, so both kernels produce
    bitwise-identical results.
    """
    for a, b in pairs:
        out2 += dgemm(1.0, b.T, a.T).T
