//! Small dense/sparse linear-algebra kernels shared across the crate:
//! Sturm-sequence bisection for symmetric tridiagonal eigenvalues, conjugate
//! gradients for Hermitian positive systems, inverse power iteration, exact
//! minimization of low-degree polynomials and simple least-squares fits.

use crate::error::{GlError, Result};
use crate::scalar::{norm_sqr, Cplx, Real};

/// Symmetric tridiagonal matrix (diag `d`, off-diagonal `e`, `e.len() = d.len()-1`).
pub struct Tridiag<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> Tridiag<T> {
    /// Number of eigenvalues strictly below `x` (Sturm count via the shifted
    /// LDL^T recurrence, with the standard safeguard on tiny pivots).
    pub fn count_below(&self, x: T) -> usize {
        let n = self.diag.len();
        let tiny = T::min_positive_value() / T::epsilon();
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < T::zero() {
            count += 1;
        }
        for i in 1..n {
            let denom = if q.abs() < tiny {
                if q >= T::zero() {
                    tiny
                } else {
                    -tiny
                }
            } else {
                q
            };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / denom;
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn bounds(&self) -> (T, T) {
        let n = self.diag.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection. Deterministic; the
    /// interval is narrowed until it is tight at the scalar's precision.
    pub fn eigenvalue(&self, k: usize) -> T {
        let (mut lo, mut hi) = self.bounds();
        let two = T::of(2.0);
        // bisection to relative machine tolerance on the bracket
        for _ in 0..(8 * std::mem::size_of::<T>() * 8) {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / two
    }
}

/// Hermitian operator given as a matrix-free closure `y = A x`.
pub fn cg_hermitian<T: Real, F>(
    apply: F,
    rhs: &[Cplx<T>],
    x: &mut [Cplx<T>],
    tol: T,
    max_iter: usize,
) -> Result<usize>
where
    F: Fn(&[Cplx<T>], &mut [Cplx<T>]),
{
    let n = rhs.len();
    let mut r = vec![Cplx::new(T::zero(), T::zero()); n];
    let mut p = vec![Cplx::new(T::zero(), T::zero()); n];
    let mut ap = vec![Cplx::new(T::zero(), T::zero()); n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = rhs[i] - ap[i];
        p[i] = r[i];
    }
    let dot = |a: &[Cplx<T>], b: &[Cplx<T>]| -> T {
        let mut s = T::zero();
        for i in 0..a.len() {
            s += a[i].re * b[i].re + a[i].im * b[i].im;
        }
        s
    };
    let rhs_norm = dot(rhs, rhs).sqrt().max(T::min_positive_value());
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol * rhs_norm {
        return Ok(0);
    }
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            return Err(GlError::LinearSolve(
                "operator not positive along search direction".into(),
                pap.to_f64_lossy(),
            ));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * rhs_norm {
            return Ok(it + 1);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
    }
    Err(GlError::LinearSolve(
        "conjugate gradient stalled".into(),
        (rr.sqrt() / rhs_norm).to_f64_lossy(),
    ))
}

/// Real SPD conjugate gradient, matrix-free.
pub fn cg_real<T: Real, F>(
    apply: F,
    rhs: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<usize>
where
    F: Fn(&[T], &mut [T]),
{
    let n = rhs.len();
    let mut r = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut ap = vec![T::zero(); n];
    apply(x, &mut ap);
    for i in 0..n {
        r[i] = rhs[i] - ap[i];
        p[i] = r[i];
    }
    let dot = |a: &[T], b: &[T]| -> T {
        let mut s = T::zero();
        for i in 0..a.len() {
            s += a[i] * b[i];
        }
        s
    };
    let rhs_norm = dot(rhs, rhs).sqrt().max(T::min_positive_value());
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol * rhs_norm {
        return Ok(0);
    }
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            return Err(GlError::LinearSolve(
                "operator not positive along search direction".into(),
                pap.to_f64_lossy(),
            ));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * rhs_norm {
            return Ok(it + 1);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
    }
    Err(GlError::LinearSolve(
        "conjugate gradient stalled".into(),
        (rr.sqrt() / rhs_norm).to_f64_lossy(),
    ))
}

/// Lowest eigenvalue of the Hermitian pencil `(K, M)` with `M` diagonal and
/// positive, by inverse power iteration (`K y = M x` via CG). Returns the
/// Rayleigh quotient once it stabilizes to `tol` relative.
pub fn lowest_eigenvalue<T: Real, F>(
    apply_k: F,
    mass: &[T],
    tol: T,
    max_outer: usize,
) -> Result<T>
where
    F: Fn(&[Cplx<T>], &mut [Cplx<T>]) + Sync,
{
    let n = mass.len();
    // deterministic start: spread over a few incommensurate frequencies so no
    // eigenvector is accidentally orthogonal to it
    let mut x: Vec<Cplx<T>> = (0..n)
        .map(|i| {
            let a = T::of(0.7) * T::of_usize(i + 1);
            let b = T::of(0.31) * T::of_usize(i + 1);
            Cplx::new(T::one() + a.sin() * T::of(0.3), b.cos() * T::of(0.3))
        })
        .collect();
    let mut ky = vec![Cplx::new(T::zero(), T::zero()); n];
    let normalize = |v: &mut [Cplx<T>]| {
        let mut s = T::zero();
        for i in 0..v.len() {
            s += norm_sqr(v[i]) * mass[i];
        }
        let inv = s.sqrt().recip();
        for z in v.iter_mut() {
            *z = *z * inv;
        }
    };
    normalize(&mut x);
    let mut lam_prev = T::infinity();
    for _ in 0..max_outer {
        // rhs = M x
        let rhs: Vec<Cplx<T>> = (0..n).map(|i| x[i] * mass[i]).collect();
        let mut y = x.clone();
        cg_hermitian(&apply_k, &rhs, &mut y, T::of(1e-8), 200 * n.max(100))?;
        normalize(&mut y);
        apply_k(&y, &mut ky);
        let mut num = T::zero();
        for i in 0..n {
            num += y[i].re * ky[i].re + y[i].im * ky[i].im;
        }
        let lam = num; // y is M-normalized
        x = y;
        if (lam - lam_prev).abs() <= tol * lam.abs().max(T::one()) {
            return Ok(lam);
        }
        lam_prev = lam;
    }
    Err(GlError::IterationLimit {
        what: "inverse power iteration".into(),
        limit: max_outer,
        last: lam_prev.to_f64_lossy(),
    })
}

/// Global minimizer of the quartic `c[0] + c[1] t + ... + c[4] t^4` assuming it
/// is bounded below (`c[4] >= 0`). Returns `(t*, value)`.
pub fn quartic_min<T: Real>(c: [T; 5]) -> (T, T) {
    let eval = |t: T| c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
    // stationary points: 4 c4 t^3 + 3 c3 t^2 + 2 c2 t + c1 = 0
    let roots = cubic_roots(
        T::of(4.0) * c[4],
        T::of(3.0) * c[3],
        T::of(2.0) * c[2],
        c[1],
    );
    let mut best_t = T::zero();
    let mut best_v = eval(T::zero());
    for r in roots {
        let v = eval(r);
        if v < best_v {
            best_v = v;
            best_t = r;
        }
    }
    (best_t, best_v)
}

/// Real roots of `a t^3 + b t^2 + c t + d = 0` (up to three). Degenerate
/// leading coefficients fall back to the quadratic/linear cases.
pub fn cubic_roots<T: Real>(a: T, b: T, c: T, d: T) -> Vec<T> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == T::zero() {
        return vec![];
    }
    let eps = T::epsilon() * T::of(64.0);
    if a.abs() <= eps * scale {
        // quadratic b t^2 + c t + d
        if b.abs() <= eps * scale {
            if c.abs() <= eps * scale {
                return vec![];
            }
            return vec![-d / c];
        }
        let disc = c * c - T::of(4.0) * b * d;
        if disc < T::zero() {
            return vec![];
        }
        let sq = disc.sqrt();
        let two_b = T::of(2.0) * b;
        return vec![(-c + sq) / two_b, (-c - sq) / two_b];
    }
    // depressed cubic t = y - b/(3a): y^3 + p y + q = 0
    let bn = b / a;
    let cn = c / a;
    let dn = d / a;
    let third = T::one() / T::of(3.0);
    let shift = bn * third;
    let p = cn - bn * bn * third;
    let q = T::of(2.0 / 27.0) * bn * bn * bn - bn * cn * third + dn;
    let half_q = q / T::of(2.0);
    let disc = half_q * half_q + p * p * p / T::of(27.0);
    let mut ys = Vec::with_capacity(3);
    if disc > T::zero() {
        let sq = disc.sqrt();
        let u = cbrt(-half_q + sq);
        let v = cbrt(-half_q - sq);
        ys.push(u + v);
    } else {
        // three real roots: trigonometric form
        let r = (-p * third).sqrt();
        if r == T::zero() {
            ys.push(T::zero());
        } else {
            let cos_arg = (-half_q / (r * r * r)).max(-T::one()).min(T::one());
            let phi = cos_arg.acos();
            let two = T::of(2.0);
            for k in 0..3 {
                let ang = (phi + T::of(2.0) * T::PI() * T::of_usize(k)) * third;
                ys.push(two * r * ang.cos());
            }
        }
    }
    ys.into_iter().map(|y| y - shift).collect()
}

fn cbrt<T: Real>(x: T) -> T {
    let third = T::one() / T::of(3.0);
    if x >= T::zero() {
        x.powf(third)
    } else {
        -(-x).powf(third)
    }
}

/// Least-squares fit of `y_i = g + m / r_i`; returns `(g, m, max residual)`.
pub fn fit_inverse_r<T: Real>(r: &[T], y: &[T]) -> (T, T, T) {
    let n = T::of_usize(r.len());
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for i in 0..r.len() {
        let x = r[i].recip();
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    let det = n * sxx - sx * sx;
    let g = (sy * sxx - sx * sxy) / det;
    let m = (n * sxy - sx * sy) / det;
    let mut resid = T::zero();
    for i in 0..r.len() {
        let pred = g + m / r[i];
        resid = resid.max((y[i] - pred).abs());
    }
    (g, m, resid)
}

/// Richardson extrapolation in `h^2` of a sequence sampled at successively
/// halved spacings (`h`, `h/2`, `h/4`, ...). Returns the extrapolated limit.
pub fn richardson_h2<T: Real>(values: &[T]) -> T {
    let mut col: Vec<T> = values.to_vec();
    let mut factor = T::of(4.0);
    while col.len() > 1 {
        let mut next = Vec::with_capacity(col.len() - 1);
        for i in 0..col.len() - 1 {
            next.push(col[i + 1] + (col[i + 1] - col[i]) / (factor - T::one()));
        }
        col = next;
        factor *= T::of(4.0);
    }
    col[0]
}

/// Ordinary least squares line `y = a + b x`; returns `(a, b)`.
pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> (T, T) {
    let n = T::of_usize(x.len());
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for i in 0..x.len() {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    let det = n * sxx - sx * sx;
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tridiag_eigen_known_laplacian() {
        // -u'' on (0,1), Dirichlet, n interior points: lambda_k = (2-2cos(k pi h))/h^2
        let n = 200usize;
        let h = 1.0 / (n as f64 + 1.0);
        let t = Tridiag {
            diag: vec![2.0 / (h * h); n],
            off: vec![-1.0 / (h * h); n - 1],
        };
        for k in 0..3 {
            let exact = (2.0 - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI * h).cos()) / (h * h);
            assert_abs_diff_eq!(t.eigenvalue(k), exact, epsilon = 1e-8 * exact);
        }
    }

    #[test]
    fn cubic_three_real_roots() {
        // (t-1)(t-2)(t-3) = t^3 -6t^2 + 11t - 6
        let mut roots = cubic_roots(1.0f64, -6.0, 11.0, -6.0);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*r, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn quartic_descends() {
        // (t^2-1)^2 has minima at t = +-1 with value 0
        let (t, v) = quartic_min([1.0f64, 0.0, -2.0, 0.0, 1.0]);
        assert_abs_diff_eq!(t.abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_r_fit_recovers() {
        let r = [8.0f64, 12.0, 16.0];
        let y: Vec<f64> = r.iter().map(|ri| -0.5 + 1.3 / ri).collect();
        let (g, m, resid) = fit_inverse_r(&r, &y);
        assert_abs_diff_eq!(g, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(m, 1.3, epsilon = 1e-12);
        assert!(resid < 1e-12);
    }

    #[test]
    fn richardson_removes_h2() {
        let f = |h: f64| 1.0 + 3.0 * h * h + 0.2 * h * h * h * h;
        let vals = [f(4e-3), f(2e-3), f(1e-3)];
        let lim = richardson_h2(&vals);
        assert_abs_diff_eq!(lim, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn cg_solves_spd() {
        // 1D Laplacian system
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 2.0 * x[i] - l - r;
            }
        };
        let rhs = vec![1.0; n];
        let mut x = vec![0.0; n];
        cg_real(apply, &rhs, &mut x, 1e-12, 10_000).unwrap();
        let mut res = vec![0.0; n];
        apply(&x, &mut res);
        for i in 0..n {
            assert_abs_diff_eq!(res[i], 1.0, epsilon = 1e-9);
        }
    }
}
