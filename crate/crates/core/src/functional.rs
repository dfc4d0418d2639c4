//! Discrete Ginzburg-Landau-type energy on a lattice with link variables:
//!
//! `E(u) = k sum_e w_e |u_head a_e - u_tail|^2
//!         + sum_n w_n (q |u_n|^2 + s |u_n|^4)`
//!
//! with unit link phases `a_e = exp(-i theta_e)`, `theta_e` the line integral
//! of the vector potential along the edge (times any field coupling). The
//! covariant difference makes the kinetic term exactly gauge-covariant on the
//! grid: node phases can be absorbed into the links without changing the
//! energy.

use crate::grid::Lattice;
use crate::ncg::QuarticEnergy;
use crate::scalar::{norm_sqr, Cplx, Real};

pub struct LinkFunctional<'a, T> {
    pub lat: &'a Lattice<T>,
    /// Kinetic coefficient (`b` for the reference cells, 1 for the full
    /// functional whose coupling sits inside the link phases).
    pub kinetic: T,
    /// Unit phases per edge.
    pub link: Vec<Cplx<T>>,
    /// Coefficient of `|u|^2`.
    pub quad: T,
    /// Coefficient of `|u|^4`.
    pub quart: T,
}

impl<'a, T: Real> LinkFunctional<'a, T> {
    pub fn with_phases(
        lat: &'a Lattice<T>,
        kinetic: T,
        quad: T,
        quart: T,
        theta: impl Fn(usize) -> T,
    ) -> Self {
        let link = (0..lat.edges.len())
            .map(|e| {
                let t = theta(e);
                Cplx::new(t.cos(), -t.sin())
            })
            .collect();
        Self {
            lat,
            kinetic,
            link,
            quad,
            quart,
        }
    }

    #[inline]
    fn covariant(&self, u: &[Cplx<T>], e: usize) -> Cplx<T> {
        let edge = &self.lat.edges[e];
        u[edge.head as usize] * self.link[e] - u[edge.tail as usize]
    }

    pub fn kinetic_energy(&self, u: &[Cplx<T>]) -> T {
        let mut acc = T::zero();
        for e in 0..self.lat.edges.len() {
            let w = T::of(self.lat.edges[e].weight_frac);
            acc += w * norm_sqr(self.covariant(u, e));
        }
        self.kinetic * acc
    }

    pub fn potential_energy(&self, u: &[Cplx<T>]) -> T {
        let mut acc = T::zero();
        for n in 0..self.lat.n_nodes() {
            let p = norm_sqr(u[n]);
            acc += self.lat.weight[n] * (self.quad * p + self.quart * p * p);
        }
        acc
    }
}

impl<'a, T: Real> QuarticEnergy<T> for LinkFunctional<'a, T> {
    fn dof(&self) -> usize {
        self.lat.n_nodes()
    }

    fn energy(&self, u: &[Cplx<T>]) -> T {
        self.kinetic_energy(u) + self.potential_energy(u)
    }

    fn gradient(&self, u: &[Cplx<T>], g: &mut [Cplx<T>]) {
        let zero = Cplx::new(T::zero(), T::zero());
        for gi in g.iter_mut() {
            *gi = zero;
        }
        let two_k = T::of(2.0) * self.kinetic;
        for e in 0..self.lat.edges.len() {
            let edge = &self.lat.edges[e];
            let w = T::of(edge.weight_frac) * two_k;
            let l = self.covariant(u, e);
            g[edge.head as usize] += l * self.link[e].conj() * w;
            g[edge.tail as usize] -= l * w;
        }
        let two = T::of(2.0);
        for n in 0..self.lat.n_nodes() {
            let w = self.lat.weight[n];
            let p = norm_sqr(u[n]);
            g[n] += u[n] * (two * w * (self.quad + two * self.quart * p));
        }
        for n in 0..self.lat.n_nodes() {
            if self.lat.fixed[n] {
                g[n] = zero;
            }
        }
    }

    fn line(&self, u: &[Cplx<T>], d: &[Cplx<T>]) -> [T; 5] {
        let mut c = [T::zero(); 5];
        let two = T::of(2.0);
        for e in 0..self.lat.edges.len() {
            let w = T::of(self.lat.edges[e].weight_frac) * self.kinetic;
            let lu = self.covariant(u, e);
            let ld = self.covariant(d, e);
            c[0] += w * norm_sqr(lu);
            c[1] += w * two * (lu.re * ld.re + lu.im * ld.im);
            c[2] += w * norm_sqr(ld);
        }
        for n in 0..self.lat.n_nodes() {
            let w = self.lat.weight[n];
            let p = norm_sqr(u[n]);
            let q = two * (u[n].re * d[n].re + u[n].im * d[n].im);
            let r = norm_sqr(d[n]);
            c[0] += w * (self.quad * p + self.quart * p * p);
            c[1] += w * (self.quad * q + self.quart * two * p * q);
            c[2] += w * (self.quad * r + self.quart * (q * q + two * p * r));
            c[3] += w * self.quart * two * q * r;
            c[4] += w * self.quart * r * r;
        }
        c
    }

    fn residual_sup(&self, g: &[Cplx<T>]) -> T {
        let mut sup = T::zero();
        for n in 0..self.lat.n_nodes() {
            let w = self.lat.weight[n];
            if w > T::zero() && !self.lat.fixed[n] {
                sup = sup.max(g[n].norm() / (T::of(2.0) * w));
            }
        }
        sup
    }
}

/// Deterministic noisy start `scale * (1 + amp * noise)` used by the solvers;
/// pinned nodes start at zero.
pub fn noisy_start<T: Real>(
    lat: &Lattice<T>,
    scale: Cplx<T>,
    amp: T,
    seed: u64,
) -> Vec<Cplx<T>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..lat.n_nodes())
        .map(|n| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            if lat.fixed[n] {
                Cplx::new(T::zero(), T::zero())
            } else {
                scale * (Cplx::new(T::one(), T::zero())
                    + Cplx::new(T::of(re), T::of(im)) * amp)
            }
        })
        .collect()
}
