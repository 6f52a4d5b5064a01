"""
Product-type Krylov solvers: BiCG, CGS, BiCGSTAB and GPBiCG.

Each solver runs entirely at the precision of the right-hand side and
reports instead of raising when it fails to converge. The convergence test
is always on the unpreconditioned residual r = b - A x:

    ||r_k||_2 <= rel_tol * ||r_0||_2 + abs_tol

BiCG applies K in the usual preconditioned form (w = K^-1 r, w~ = K^-T r~,
rho = (r~, w)). CGS, BiCGSTAB and GPBiCG apply K as solves at their
preconditioning sites, which keeps the recursively updated residual equal
to the true one.
"""
import logging
import time
from typing import List, Optional, Protocol, Tuple, Union

import gmpy2

from errors import DimensionMismatchError, PrecisionMismatchError
from models.CsrMatrix import CsrMatrix
from models.DenseMatrix import DenseMatrix
from models.MPVector import MPVector
from models.Precision import Precision
from schemas import Method, PreconditionerKind, SolverConfig, SolveReport, SolveStatus
from services.matrices import dense_mv, spmv, to_csr, transpose_spmv
from services.mp_core import add, axpy, dot, is_zero_vector, lincomb, norm2, scale, sub, zeros
from services.precond import IdentityPreconditioner, Ilu0Preconditioner, Preconditioner
from utils.csv_out import write_history_csv  # noqa: F401  re-exported for callers

logger = logging.getLogger("mpkrylov.solvers")


# ---------- Operators ----------
class LinearOperator(Protocol):
    dim: int
    precision: Precision

    def matvec(self, x: MPVector) -> MPVector: ...

    def rmatvec(self, x: MPVector) -> MPVector: ...


class CsrOperator:
    """A and A^T products on CSR storage; counts products for reporting."""

    def __init__(self, A: CsrMatrix):
        if A.rows != A.cols:
            raise DimensionMismatchError("square system required", A.rows, A.cols)
        self.A = A
        self.dim = A.rows
        self.precision = A.precision
        self.matvecs = 0

    def matvec(self, x: MPVector) -> MPVector:
        self.matvecs += 1
        return spmv(self.A, x)

    def rmatvec(self, x: MPVector) -> MPVector:
        self.matvecs += 1
        return transpose_spmv(self.A, x)


class DenseOperator:
    def __init__(self, A: DenseMatrix):
        if A.rows != A.cols:
            raise DimensionMismatchError("square system required", A.rows, A.cols)
        self.A = A
        self.dim = A.rows
        self.precision = A.precision
        self.matvecs = 0
        self._At: Optional[DenseMatrix] = None

    def matvec(self, x: MPVector) -> MPVector:
        self.matvecs += 1
        return dense_mv(self.A, x)

    def rmatvec(self, x: MPVector) -> MPVector:
        if self._At is None:
            n = self.dim
            self._At = DenseMatrix(n, n, self.precision,
                                   tuple(self.A.get(i, j) for j in range(n) for i in range(n)))
        self.matvecs += 1
        return dense_mv(self._At, x)


MatrixLike = Union[CsrMatrix, DenseMatrix, LinearOperator]


def as_operator(A: MatrixLike) -> LinearOperator:
    if isinstance(A, CsrMatrix):
        return CsrOperator(A)
    if isinstance(A, DenseMatrix):
        return DenseOperator(A)
    return A


def make_preconditioner(A: MatrixLike, kind: PreconditionerKind) -> Preconditioner:
    if kind == PreconditionerKind.NONE:
        return IdentityPreconditioner()
    if isinstance(A, CsrOperator):
        A = A.A
    elif isinstance(A, DenseOperator):
        A = to_csr(A.A)
    elif isinstance(A, DenseMatrix):
        A = to_csr(A)
    if not isinstance(A, CsrMatrix):
        raise TypeError("ILU(0) needs an explicit matrix")
    return Ilu0Preconditioner(A)


def preconditioner_kind(K: Preconditioner) -> Union[PreconditionerKind, str]:
    """Report label for K: its PreconditionerKind when built in, else its name or class name."""
    name = getattr(K, "name", None) or type(K).__name__
    try:
        return PreconditionerKind(name)
    except ValueError:
        return name


# ---------- Convergence ----------
def check_convergence(r_k: MPVector, r0_norm: gmpy2.mpfr, cfg: SolverConfig) -> bool:
    """||r_k||_2 <= rel_tol * ||r_0||_2 + abs_tol (inclusive)."""
    rel_tol, abs_tol = cfg.tolerances()
    with Precision(bits=cfg.precision_bits).context():
        return norm2(r_k) <= rel_tol * r0_norm + abs_tol


class _Run:
    """Bookkeeping shared by the four solvers: history, status, timing."""

    def __init__(self, method: Method, op: LinearOperator, b: MPVector, x0: Optional[MPVector],
                 cfg: SolverConfig, K: Preconditioner):
        if b.dim != op.dim:
            raise DimensionMismatchError(f"{method.value}: right-hand side", op.dim, b.dim)
        if b.precision.bits != op.precision.bits:
            raise PrecisionMismatchError(op.precision.bits, b.precision.bits)
        if cfg.precision_bits != b.precision.bits:
            cfg = cfg.model_copy(update={"precision_bits": b.precision.bits})
        self.method = method
        self.op = op
        self.b = b
        self.cfg = cfg
        self.K = K
        self.p = b.precision
        self.started = time.perf_counter()
        self.max_iter = cfg.resolved_max_iter(op.dim)
        self.status: Optional[SolveStatus] = None
        self.reason: Optional[str] = None

        if x0 is None:
            x0 = zeros(op.dim, self.p)
        elif x0.dim != op.dim:
            raise DimensionMismatchError(f"{method.value}: initial guess", op.dim, x0.dim)
        self.x0 = x0
        self.r0 = b if is_zero_vector(x0) else sub(b, op.matvec(x0))

        rel_tol, abs_tol = cfg.tolerances()
        self.r0_norm = norm2(self.r0)
        with self.p.context():
            self.threshold = rel_tol * self.r0_norm + abs_tol
        self.last_norm = self.r0_norm
        self.history: List[Tuple[int, gmpy2.mpfr]] = [(0, self._ratio(self.r0_norm))]
        self.gap_history = [self.p.zero()] if cfg.track_residual_gap else None

        logger.info("%s: n=%d prec=%d bits precond=%s max_iter=%d ||r0||=%.6e",
                    method.value, op.dim, self.p.bits, getattr(K, "name", type(K).__name__),
                    self.max_iter, float(self.r0_norm))
        if self.r0_norm <= self.threshold:
            self.status = SolveStatus.CONVERGED

    def _ratio(self, norm: gmpy2.mpfr) -> gmpy2.mpfr:
        if gmpy2.is_zero(self.r0_norm):
            return norm
        with self.p.context():
            return norm / self.r0_norm

    @property
    def done(self) -> bool:
        return self.status is not None

    def nonfinite(self, **scalars) -> bool:
        bad = [name for name, v in scalars.items() if not gmpy2.is_finite(v)]
        if bad:
            self.stop(SolveStatus.NOT_CONVERGENT, f"non-finite {', '.join(bad)}")
            return True
        return False

    def breakdown(self, what: str) -> None:
        self.stop(SolveStatus.BREAKDOWN, f"{what} = 0")

    def stop(self, status: SolveStatus, reason: Optional[str] = None) -> None:
        self.status = status
        self.reason = reason
        if status != SolveStatus.CONVERGED:
            logger.warning("%s: %s after %d iterations (%s)",
                           self.method.value, status.value, len(self.history) - 1, reason)

    def step(self, i: int, r: MPVector, x: MPVector) -> bool:
        """Record iteration i; True when the solve must stop."""
        rn = norm2(r)
        self.last_norm = rn
        self.history.append((i, self._ratio(rn)))
        if self.gap_history is not None:
            # drift between the recursive residual and b - A x
            self.gap_history.append(norm2(sub(r, sub(self.b, self.op.matvec(x)))))
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug("%s it=%d relres=%.6e", self.method.value, i, float(self.history[-1][1]))
        if not gmpy2.is_finite(rn):
            self.stop(SolveStatus.NOT_CONVERGENT, "non-finite residual norm")
            return True
        if rn <= self.threshold:
            self.stop(SolveStatus.CONVERGED)
            return True
        return False

    def finish(self, x: MPVector) -> SolveReport:
        if self.status is None:
            self.stop(SolveStatus.MAX_ITER_EXCEEDED, f"max_iter={self.max_iter}")
        true_res = norm2(sub(self.b, self.op.matvec(x)))
        elapsed = time.perf_counter() - self.started
        iterations = len(self.history) - 1
        logger.info("%s: %s in %d iterations, %.3f s", self.method.value, self.status.value, iterations, elapsed)
        return SolveReport(
            method=self.method,
            precision_bits=self.p.bits,
            preconditioner=preconditioner_kind(self.K),
            status=self.status,
            iterations=iterations,
            residual_history=self.history,
            wall_time_seconds=elapsed,
            initial_residual=self.r0_norm,
            final_residual=self.last_norm,
            final_true_residual=true_res,
            solution=x,
            residual_gap_history=self.gap_history,
            reason=self.reason,
        )


def _prepare(A: MatrixLike, K: Optional[Preconditioner], cfg: Optional[SolverConfig], method: Method):
    op = as_operator(A)
    cfg = cfg or SolverConfig(method=method, precision_bits=op.precision.bits)
    if K is None:
        K = make_preconditioner(op, cfg.preconditioner)
    return op, K, cfg


# ---------- BiCG ----------
def solve_bicg(A: MatrixLike, b: MPVector, x0: Optional[MPVector] = None,
               K: Optional[Preconditioner] = None, cfg: Optional[SolverConfig] = None) -> SolveReport:
    op, K, cfg = _prepare(A, K, cfg, Method.BICG)
    run = _Run(Method.BICG, op, b, x0, cfg, K)
    x, r = run.x0, run.r0
    rt = r
    p = pt = None
    rho_prev = None

    with run.p.context():
        for i in range(1, run.max_iter + 1):
            if run.done:
                break
            w = K.solve(r)
            wt = K.solve_transpose(rt)
            rho = dot(rt, w)
            if run.nonfinite(rho=rho):
                break
            if gmpy2.is_zero(rho):
                run.breakdown("rho")
                break
            if i == 1:
                p, pt = w, wt
            else:
                beta = rho / rho_prev
                p = axpy(beta, p, w)
                pt = axpy(beta, pt, wt)
            z = op.matvec(p)
            zt = op.rmatvec(pt)
            sigma = dot(pt, z)
            if gmpy2.is_zero(sigma):
                run.breakdown("(p~, A p)")
                break
            alpha = rho / sigma
            if run.nonfinite(alpha=alpha):
                break
            x = axpy(alpha, p, x)
            r = axpy(-alpha, z, r)
            rt = axpy(-alpha, zt, rt)
            rho_prev = rho
            if run.step(i, r, x):
                break
    return run.finish(x)


# ---------- CGS ----------
def solve_cgs(A: MatrixLike, b: MPVector, x0: Optional[MPVector] = None,
              K: Optional[Preconditioner] = None, cfg: Optional[SolverConfig] = None) -> SolveReport:
    op, K, cfg = _prepare(A, K, cfg, Method.CGS)
    run = _Run(Method.CGS, op, b, x0, cfg, K)
    x, r = run.x0, run.r0
    rt = r
    u = p = q = None
    rho_prev = None

    with run.p.context():
        for i in range(1, run.max_iter + 1):
            if run.done:
                break
            rho = dot(rt, r)
            if run.nonfinite(rho=rho):
                break
            if gmpy2.is_zero(rho):
                run.breakdown("rho")
                break
            if i == 1:
                u = r
                p = u
            else:
                beta = rho / rho_prev
                u = axpy(beta, q, r)
                p = axpy(beta, axpy(beta, p, q), u)
            p_hat = K.solve(p)
            v_hat = op.matvec(p_hat)
            sigma = dot(rt, v_hat)
            if gmpy2.is_zero(sigma):
                run.breakdown("(r~, A p)")
                break
            alpha = rho / sigma
            if run.nonfinite(alpha=alpha):
                break
            q = axpy(-alpha, v_hat, u)
            u_hat = K.solve(add(u, q))
            x = axpy(alpha, u_hat, x)
            q_hat = op.matvec(u_hat)
            r = axpy(-alpha, q_hat, r)
            rho_prev = rho
            if run.step(i, r, x):
                break
    return run.finish(x)


# ---------- BiCGSTAB ----------
def solve_bicgstab(A: MatrixLike, b: MPVector, x0: Optional[MPVector] = None,
                   K: Optional[Preconditioner] = None, cfg: Optional[SolverConfig] = None) -> SolveReport:
    op, K, cfg = _prepare(A, K, cfg, Method.BICGSTAB)
    run = _Run(Method.BICGSTAB, op, b, x0, cfg, K)
    x, r = run.x0, run.r0
    rt = r
    p = v = None
    rho_prev = alpha = omega = None

    with run.p.context():
        for i in range(1, run.max_iter + 1):
            if run.done:
                break
            rho = dot(rt, r)
            if run.nonfinite(rho=rho):
                break
            if gmpy2.is_zero(rho):
                run.breakdown("rho")
                break
            if i == 1:
                p = r
            else:
                beta = (rho / rho_prev) * (alpha / omega)
                p = axpy(beta, axpy(-omega, v, p), r)
            p_hat = K.solve(p)
            v = op.matvec(p_hat)
            sigma = dot(rt, v)
            if gmpy2.is_zero(sigma):
                run.breakdown("(r~, A p)")
                break
            alpha = rho / sigma
            if run.nonfinite(alpha=alpha):
                break
            s = axpy(-alpha, v, r)
            if norm2(s) <= run.threshold:
                # s already meets the test: half step, no stabilization
                x = axpy(alpha, p_hat, x)
                r = s
                run.step(i, r, x)
                break
            s_hat = K.solve(s)
            t = op.matvec(s_hat)
            tt = dot(t, t)
            if gmpy2.is_zero(tt):
                run.breakdown("(t, t)")
                break
            omega = dot(t, s) / tt
            if run.nonfinite(omega=omega):
                break
            x = axpy(omega, s_hat, axpy(alpha, p_hat, x))
            r = axpy(-omega, t, s)
            rho_prev = rho
            if run.step(i, r, x):
                break
            if gmpy2.is_zero(omega):
                run.breakdown("omega")
                break
    return run.finish(x)


# ---------- GPBiCG ----------
def solve_gpbicg(A: MatrixLike, b: MPVector, x0: Optional[MPVector] = None,
                 K: Optional[Preconditioner] = None, cfg: Optional[SolverConfig] = None) -> SolveReport:
    """GPBiCG over the reals.

    The products q = A p and v = A t are the matrix-vector sites; with a
    preconditioner they become A K^-1 p and A K^-1 t, and x is updated with
    K^-1 (alpha p + z) so that r stays the true residual.
    """
    op, K, cfg = _prepare(A, K, cfg, Method.GPBICG)
    run = _Run(Method.GPBICG, op, b, x0, cfg, K)
    n = op.dim
    x, r = run.x0, run.r0
    rt = r
    zero_vec = zeros(n, run.p)
    u = z = zero_vec
    p = q = t = v = w = y = s = zero_vec
    rho_prev = alpha_prev = zeta_prev = None

    def A_hat(vec: MPVector) -> MPVector:
        return op.matvec(K.solve(vec))

    with run.p.context():
        zero = run.p.zero()
        for i in range(1, run.max_iter + 1):
            if run.done:
                break
            rho = dot(rt, r)
            if run.nonfinite(rho=rho):
                break
            if gmpy2.is_zero(rho):
                run.breakdown("rho")
                break

            if i == 1:
                beta = zero
                p = r
                q = A_hat(p)
                sigma = dot(rt, q)
                if gmpy2.is_zero(sigma):
                    run.breakdown("(r~, q)")
                    break
                alpha = rho / sigma
                t = axpy(-alpha, q, r)
                v = A_hat(t)
                y = sub(scale(alpha, q), r)
                s = zero_vec
                mu2 = dot(v, t)
                mu5 = dot(v, v)
                if gmpy2.is_zero(mu5):
                    if not is_zero_vector(t):
                        run.breakdown("(v, v)")
                        break
                    zeta = eta = zero  # t = 0: x + alpha p is exact
                else:
                    zeta = mu2 / mu5
                    eta = zero
            else:
                beta = (rho / rho_prev) * (alpha_prev / zeta_prev)
                w = axpy(beta, q, v)
                p = axpy(beta, sub(p, u), r)
                q = A_hat(p)
                sigma = dot(rt, q)
                if gmpy2.is_zero(sigma):
                    run.breakdown("(r~, q)")
                    break
                alpha = rho / sigma
                s = sub(t, r)
                t = axpy(-alpha, q, r)
                v = A_hat(t)
                y = axpy(-alpha, sub(w, q), s)
                mu1 = dot(y, y)
                mu2 = dot(v, t)
                mu3 = dot(y, t)
                mu4 = dot(v, y)
                mu5 = dot(v, v)
                tau = mu5 * mu1 - mu4 * mu4
                if gmpy2.is_zero(tau):
                    if not is_zero_vector(t):
                        run.breakdown("tau")
                        break
                    zeta = eta = zero
                else:
                    zeta = (mu1 * mu2 - mu3 * mu4) / tau
                    eta = (mu5 * mu3 - mu4 * mu2) / tau
            if run.nonfinite(alpha=alpha, zeta=zeta, eta=eta):
                break

            u = lincomb(zeta, q, eta, axpy(beta, u, s))
            z = axpy(-alpha, u, lincomb(zeta, r, eta, z))
            x = add(x, K.solve(axpy(alpha, p, z)))
            r = axpy(-zeta, v, axpy(-eta, y, t))
            rho_prev, alpha_prev, zeta_prev = rho, alpha, zeta
            if run.step(i, r, x):
                break
            if gmpy2.is_zero(zeta):
                run.breakdown("zeta")
                break
    return run.finish(x)


SOLVERS = {
    Method.BICG: solve_bicg,
    Method.CGS: solve_cgs,
    Method.BICGSTAB: solve_bicgstab,
    Method.GPBICG: solve_gpbicg,
}


def solve(A: MatrixLike, b: MPVector, x0: Optional[MPVector] = None,
          K: Optional[Preconditioner] = None, cfg: Optional[SolverConfig] = None) -> SolveReport:
    cfg = cfg or SolverConfig(precision_bits=b.precision.bits)
    return SOLVERS[cfg.method](A, b, x0, K, cfg)
