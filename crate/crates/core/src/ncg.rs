//! Nonlinear conjugate gradient (Polak-Ribiere+) over complex degrees of
//! freedom. The Ginzburg-Landau-type functionals here are exact quartics
//! along any line, so the line search solves a cubic in closed form; every
//! accepted step decreases the energy by construction.

use crate::error::{GlError, Result};
use crate::linalg::quartic_min;
use crate::scalar::{Cplx, Real};

/// Discrete energy whose restriction to lines is a quartic polynomial.
pub trait QuarticEnergy<T: Real>: Sync {
    fn dof(&self) -> usize;
    fn energy(&self, u: &[Cplx<T>]) -> T;
    /// `g = 2 dE/d(conj u)`; entries of pinned nodes must be zeroed.
    fn gradient(&self, u: &[Cplx<T>], g: &mut [Cplx<T>]);
    /// Coefficients of `t -> E(u + t d)`.
    fn line(&self, u: &[Cplx<T>], d: &[Cplx<T>]) -> [T; 5];
    /// Sup norm of the Euler-Lagrange residual associated with the gradient
    /// (gradient divided by twice the local quadrature weight).
    fn residual_sup(&self, g: &[Cplx<T>]) -> T;
}

#[derive(Debug, Clone)]
pub struct NcgOptions<T> {
    pub max_iter: usize,
    /// Converged when the relative energy change over `plateau` iterations
    /// stays below this.
    pub energy_tol: T,
    pub plateau: usize,
    /// Additional requirement on the Euler-Lagrange sup residual, if any.
    pub residual_tol: Option<T>,
    /// Keep per-iteration energies and residuals for reporting.
    pub record: bool,
}

impl<T: Real> Default for NcgOptions<T> {
    fn default() -> Self {
        Self {
            max_iter: 50_000,
            energy_tol: T::of(1e-10),
            plateau: 50,
            residual_tol: None,
            record: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NcgOutcome<T> {
    pub u: Vec<Cplx<T>>,
    pub energy: T,
    pub iterations: usize,
    pub converged: bool,
    pub residual_sup: T,
    pub energy_history: Vec<T>,
    pub residual_history: Vec<T>,
}

fn dot<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> T {
    let mut s = T::zero();
    for i in 0..a.len() {
        s += a[i].re * b[i].re + a[i].im * b[i].im;
    }
    s
}

/// Minimize from `u0`. Returns an error only on the iteration cap with the
/// best state still attached to the error site via the outcome of the caller;
/// callers that tolerate non-convergence should use [`minimize_lenient`].
pub fn minimize<T: Real, M: QuarticEnergy<T>>(
    model: &M,
    u0: Vec<Cplx<T>>,
    opts: &NcgOptions<T>,
) -> Result<NcgOutcome<T>> {
    let out = minimize_lenient(model, u0, opts);
    if out.converged {
        Ok(out)
    } else {
        Err(GlError::IterationLimit {
            what: "nonlinear conjugate gradient".into(),
            limit: opts.max_iter,
            last: out.energy.to_f64_lossy(),
        })
    }
}

/// Same as [`minimize`] but reports non-convergence through the outcome flag.
pub fn minimize_lenient<T: Real, M: QuarticEnergy<T>>(
    model: &M,
    u0: Vec<Cplx<T>>,
    opts: &NcgOptions<T>,
) -> NcgOutcome<T> {
    let n = model.dof();
    assert_eq!(u0.len(), n);
    let zero = Cplx::new(T::zero(), T::zero());
    let mut u = u0;
    let mut g = vec![zero; n];
    let mut g_old = vec![zero; n];
    let mut d = vec![zero; n];
    model.gradient(&u, &mut g);
    let mut energy = model.energy(&u);
    for i in 0..n {
        d[i] = -g[i];
    }
    let mut gg = dot(&g, &g);
    let mut history = Vec::new();
    let mut res_history = Vec::new();
    let mut plateau_ref = energy;
    let mut plateau_count = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;
    let floor = T::min_positive_value() * T::of(1e8);

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let coeffs = model.line(&u, &d);
        let (t, e_new) = quartic_min(coeffs);
        if !(e_new <= energy) || t == T::zero() {
            // direction exhausted; restart along steepest descent
            for i in 0..n {
                d[i] = -g[i];
            }
            let coeffs = model.line(&u, &d);
            let (t2, e2) = quartic_min(coeffs);
            if !(e2 < energy) || t2 == T::zero() {
                // stationary to machine precision
                let res = model.residual_sup(&g);
                converged = opts.residual_tol.map_or(true, |tol| res <= tol)
                    || gg.sqrt() <= floor;
                break;
            }
            for i in 0..n {
                u[i] += d[i] * t2;
            }
            energy = e2;
        } else {
            for i in 0..n {
                u[i] += d[i] * t;
            }
            energy = e_new;
        }
        std::mem::swap(&mut g, &mut g_old);
        model.gradient(&u, &mut g);
        let gg_new = dot(&g, &g);
        // Polak-Ribiere+ with automatic restart
        let mut beta = (gg_new - dot(&g, &g_old)) / gg;
        if beta < T::zero() || !beta.is_finite() {
            beta = T::zero();
        }
        for i in 0..n {
            d[i] = -g[i] + d[i] * beta;
        }
        // enforce descent
        if dot(&g, &d) >= T::zero() {
            for i in 0..n {
                d[i] = -g[i];
            }
        }
        gg = gg_new;

        let res = if opts.residual_tol.is_some() || opts.record {
            model.residual_sup(&g)
        } else {
            T::nan()
        };
        if opts.record {
            history.push(energy);
            res_history.push(res);
        }

        // plateau detection on relative energy change
        plateau_count += 1;
        if plateau_count >= opts.plateau {
            let scale = energy.abs().max(T::one());
            let change = (plateau_ref - energy).abs() / scale;
            if change < opts.energy_tol {
                if opts.residual_tol.map_or(true, |tol| {
                    let r = if res.is_nan() { model.residual_sup(&g) } else { res };
                    r <= tol
                }) {
                    converged = true;
                    break;
                }
            }
            plateau_ref = energy;
            plateau_count = 0;
        }
    }
    let res = model.residual_sup(&g);
    NcgOutcome {
        u,
        energy,
        iterations,
        converged,
        residual_sup: res,
        energy_history: history,
        residual_history: res_history,
    }
}
