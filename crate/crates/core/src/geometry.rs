//! Domain geometry: star-shaped smooth domains with arc-length boundary
//! parametrization, curvature and tubular coordinates; applied-field profiles
//! with their sup constants; level sets of `|B0|` and the distance functions
//! entering the decay estimates.

use crate::error::{GlError, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Applied field profile on the closure of the domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum FieldProfile<T> {
    /// `B0 = c`.
    Constant { c: T },
    /// `B0 = x1`.
    LinearX1,
    /// `B0 = x1 + c`.
    ShiftedLinear { c: T },
    /// `B0 = sign(x1) |x1|^alpha + c`, Hoelder of exponent `alpha`.
    Hoelder { c: T, alpha: T },
    /// Bilinear interpolation of samples on a regular grid.
    Tabulated(TabulatedField<T>),
}

/// Regular-grid samples `(x1, x2) -> B0` with bilinear evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TabulatedField<T> {
    pub x0: [T; 2],
    pub dx: [T; 2],
    pub nx: [usize; 2],
    pub values: Vec<T>,
    /// Declared Hoelder exponent of the sampled field.
    pub alpha: T,
}

impl<T: Real> TabulatedField<T> {
    pub fn eval(&self, x: [T; 2]) -> T {
        let clampf = |v: T, n: usize| v.max(T::zero()).min(T::of_usize(n - 1) - T::of(1e-9));
        let fx = clampf((x[0] - self.x0[0]) / self.dx[0], self.nx[0]);
        let fy = clampf((x[1] - self.x0[1]) / self.dx[1], self.nx[1]);
        let i = fx.floor().to_f64_lossy() as usize;
        let j = fy.floor().to_f64_lossy() as usize;
        let sx = fx - T::of_usize(i);
        let sy = fy - T::of_usize(j);
        let at = |i: usize, j: usize| self.values[j * self.nx[0] + i];
        let one = T::one();
        at(i, j) * (one - sx) * (one - sy)
            + at(i + 1, j) * sx * (one - sy)
            + at(i, j + 1) * (one - sx) * sy
            + at(i + 1, j + 1) * sx * sy
    }
}

impl<T: Real> FieldProfile<T> {
    pub fn eval(&self, x: [T; 2]) -> T {
        match self {
            FieldProfile::Constant { c } => *c,
            FieldProfile::LinearX1 => x[0],
            FieldProfile::ShiftedLinear { c } => x[0] + *c,
            FieldProfile::Hoelder { c, alpha } => {
                let s = if x[0] >= T::zero() { T::one() } else { -T::one() };
                s * x[0].abs().powf(*alpha) + *c
            }
            FieldProfile::Tabulated(t) => t.eval(x),
        }
    }

    /// Declared Hoelder exponent.
    pub fn holder_alpha(&self) -> T {
        match self {
            FieldProfile::Hoelder { alpha, .. } => *alpha,
            FieldProfile::Tabulated(t) => t.alpha,
            _ => T::one(),
        }
    }

    /// `(beta0, beta1)`: sup of `|B0|` over the closed domain and over the
    /// boundary, sampled on the domain grid plus a 10x oversampled boundary.
    pub fn betas(&self, domain: &Domain<T>, grid_n: usize) -> (T, T) {
        let mut beta1 = T::zero();
        let m = 10 * grid_n.max(64);
        for k in 0..m {
            let s = domain.boundary_length * T::of_usize(k) / T::of_usize(m);
            let p = domain.gamma(s);
            beta1 = beta1.max(self.eval(p).abs());
        }
        let mut beta0 = beta1;
        let bb = domain.bounding_box();
        let n = grid_n.max(64);
        for j in 0..=n {
            for i in 0..=n {
                let x = [
                    bb.0[0] + (bb.1[0] - bb.0[0]) * T::of_usize(i) / T::of_usize(n),
                    bb.0[1] + (bb.1[1] - bb.0[1]) * T::of_usize(j) / T::of_usize(n),
                ];
                if domain.contains(x) {
                    beta0 = beta0.max(self.eval(x).abs());
                }
            }
        }
        (beta0, beta1)
    }
}

/// Star-shaped domain given by a positive trigonometric-polynomial radius
/// `r(theta) = c0 + sum_j (a_j cos(j theta) + b_j sin(j theta))`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarShape<T> {
    pub c0: T,
    pub cos_coeffs: Vec<T>,
    pub sin_coeffs: Vec<T>,
}

impl<T: Real> StarShape<T> {
    pub fn disk() -> Self {
        Self {
            c0: T::one(),
            cos_coeffs: vec![],
            sin_coeffs: vec![],
        }
    }

    fn r(&self, th: T) -> (T, T, T) {
        // value, first and second derivative in theta
        let mut r = self.c0;
        let mut r1 = T::zero();
        let mut r2 = T::zero();
        for (j, &a) in self.cos_coeffs.iter().enumerate() {
            let k = T::of_usize(j + 1);
            r += a * (k * th).cos();
            r1 -= a * k * (k * th).sin();
            r2 -= a * k * k * (k * th).cos();
        }
        for (j, &b) in self.sin_coeffs.iter().enumerate() {
            let k = T::of_usize(j + 1);
            r += b * (k * th).sin();
            r1 += b * k * (k * th).cos();
            r2 -= b * k * k * (k * th).sin();
        }
        (r, r1, r2)
    }
}

/// Smooth bounded domain with precomputed boundary tables.
#[derive(Debug, Clone)]
pub struct Domain<T> {
    pub shape: StarShape<T>,
    pub boundary_length: T,
    /// Largest safe tubular half-width (half the injectivity width).
    pub tubular_width: T,
    /// Cumulative arc length at `theta_k = 2 pi k / n_table`.
    arc_table: Vec<T>,
    n_table: usize,
}

const TABLE_SIZE: usize = 4096;

impl<T: Real> Domain<T> {
    pub fn disk() -> Self {
        Self::new(StarShape::disk())
    }

    pub fn new(shape: StarShape<T>) -> Self {
        let n = TABLE_SIZE;
        // speed |c'(theta)| = sqrt(r^2 + r'^2); cumulative Simpson on a fine grid
        let speed = |th: T| {
            let (r, r1, _) = shape.r(th);
            (r * r + r1 * r1).sqrt()
        };
        let two_pi = T::of(2.0) * T::PI();
        let dth = two_pi / T::of_usize(n);
        let mut arc = Vec::with_capacity(n + 1);
        arc.push(T::zero());
        let mut acc = T::zero();
        for k in 0..n {
            let a = dth * T::of_usize(k);
            let m = a + dth / T::of(2.0);
            let b = a + dth;
            acc += dth / T::of(6.0) * (speed(a) + T::of(4.0) * speed(m) + speed(b));
            arc.push(acc);
        }
        let mut dom = Self {
            shape,
            boundary_length: acc,
            tubular_width: T::zero(),
            arc_table: arc,
            n_table: n,
        };
        dom.tubular_width = dom.find_tubular_width();
        dom
    }

    /// Monotone inversion of the arc-length table plus Newton refinement.
    fn theta_of_s(&self, s: T) -> T {
        let len = self.boundary_length;
        let mut s = s % len;
        if s < T::zero() {
            s += len;
        }
        let mut lo = 0usize;
        let mut hi = self.n_table;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.arc_table[mid] <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let dth = T::of(2.0) * T::PI() / T::of_usize(self.n_table);
        let frac = (s - self.arc_table[lo]) / (self.arc_table[hi] - self.arc_table[lo]);
        let mut th = dth * (T::of_usize(lo) + frac);
        // Newton on arc(theta) - s using the speed
        for _ in 0..4 {
            let a = self.arc_of_theta(th);
            let (r, r1, _) = self.shape.r(th);
            let sp = (r * r + r1 * r1).sqrt();
            th -= (a - s) / sp;
        }
        th
    }

    fn arc_of_theta(&self, th: T) -> T {
        let two_pi = T::of(2.0) * T::PI();
        let mut t = th % two_pi;
        if t < T::zero() {
            t += two_pi;
        }
        let dth = two_pi / T::of_usize(self.n_table);
        let k = (t / dth).floor().to_f64_lossy() as usize;
        let k = k.min(self.n_table - 1);
        let a = dth * T::of_usize(k);
        // Simpson over the partial panel
        let speed = |x: T| {
            let (r, r1, _) = self.shape.r(x);
            (r * r + r1 * r1).sqrt()
        };
        let w = t - a;
        let part = w / T::of(6.0)
            * (speed(a) + T::of(4.0) * speed(a + w / T::of(2.0)) + speed(a + w));
        self.arc_table[k] + part
    }

    fn point(&self, th: T) -> [T; 2] {
        let (r, _, _) = self.shape.r(th);
        [r * th.cos(), r * th.sin()]
    }

    /// Boundary point at arc length `s` (counterclockwise).
    pub fn gamma(&self, s: T) -> [T; 2] {
        self.point(self.theta_of_s(s))
    }

    /// Unit tangent at arc length `s`.
    pub fn tangent(&self, s: T) -> [T; 2] {
        let th = self.theta_of_s(s);
        let (r, r1, _) = self.shape.r(th);
        let sp = (r * r + r1 * r1).sqrt();
        // d/dtheta of (r cos, r sin) divided by speed
        [
            (r1 * th.cos() - r * th.sin()) / sp,
            (r1 * th.sin() + r * th.cos()) / sp,
        ]
    }

    /// Inward unit normal; `det(gamma'(s), nu(s)) = 1`.
    pub fn normal(&self, s: T) -> [T; 2] {
        let t = self.tangent(s);
        [-t[1], t[0]]
    }

    /// Signed curvature at arc length `s` (`k = 1` on the unit disk).
    pub fn curvature(&self, s: T) -> T {
        let th = self.theta_of_s(s);
        let (r, r1, r2) = self.shape.r(th);
        (r * r + T::of(2.0) * r1 * r1 - r * r2) / (r * r + r1 * r1).powf(T::of(1.5))
    }

    /// Tubular chart `Phi(s, t) = gamma(s) + t nu(s)`.
    pub fn chart(&self, s: T, t: T) -> [T; 2] {
        let g = self.gamma(s);
        let n = self.normal(s);
        [g[0] + t * n[0], g[1] + t * n[1]]
    }

    /// Jacobian `a(s, t) = 1 - t k(s)` of the tubular chart.
    pub fn jacobian(&self, s: T, t: T) -> Result<T> {
        if t < T::zero() || t > self.tubular_width {
            return Err(GlError::TubularDomain(
                t.to_f64_lossy(),
                self.tubular_width.to_f64_lossy(),
            ));
        }
        Ok(T::one() - t * self.curvature(s))
    }

    pub fn contains(&self, x: [T; 2]) -> bool {
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let th = x[1].atan2(x[0]);
        let (r, _, _) = self.shape.r(th);
        rho <= r + T::epsilon() * T::of(16.0)
    }

    pub fn bounding_box(&self) -> ([T; 2], [T; 2]) {
        let mut rmax = T::zero();
        for k in 0..512 {
            let th = T::of(2.0) * T::PI() * T::of_usize(k) / T::of(512.0);
            let (r, _, _) = self.shape.r(th);
            rmax = rmax.max(r);
        }
        ([-rmax, -rmax], [rmax, rmax])
    }

    /// Arc length of the nearest boundary foot point (coarse scan plus Newton
    /// on the orthogonality condition) and the distance to the boundary.
    pub fn foot_point(&self, x: [T; 2]) -> (T, T) {
        let n = 256usize;
        let len = self.boundary_length;
        let mut best_s = T::zero();
        let mut best_d2 = T::infinity();
        for k in 0..n {
            let s = len * T::of_usize(k) / T::of_usize(n);
            let g = self.gamma(s);
            let d2 = (x[0] - g[0]) * (x[0] - g[0]) + (x[1] - g[1]) * (x[1] - g[1]);
            if d2 < best_d2 {
                best_d2 = d2;
                best_s = s;
            }
        }
        // Newton on phi(s) = (x - gamma(s)) . gamma'(s) = 0;
        // phi'(s) = -1 + k (x - gamma) . nu
        let mut s = best_s;
        for _ in 0..30 {
            let g = self.gamma(s);
            let t = self.tangent(s);
            let nu = self.normal(s);
            let dx = [x[0] - g[0], x[1] - g[1]];
            let phi = dx[0] * t[0] + dx[1] * t[1];
            let dphi = -T::one() + self.curvature(s) * (dx[0] * nu[0] + dx[1] * nu[1]);
            let step = phi / dphi;
            s -= step;
            if step.abs() < T::of(1e-14) * len {
                break;
            }
        }
        let g = self.gamma(s);
        let d = ((x[0] - g[0]) * (x[0] - g[0]) + (x[1] - g[1]) * (x[1] - g[1])).sqrt();
        let mut s = s % len;
        if s < T::zero() {
            s += len;
        }
        (s, d)
    }

    /// Distance to the boundary (unsigned).
    pub fn boundary_distance(&self, x: [T; 2]) -> T {
        self.foot_point(x).1
    }

    /// Inverse tubular chart for points inside the tubular neighborhood.
    pub fn boundary_coords(&self, x: [T; 2]) -> Result<(T, T)> {
        let (s, d) = self.foot_point(x);
        if d >= self.tubular_width || !self.contains(x) {
            return Err(GlError::OutOfChart(
                x[0].to_f64_lossy(),
                x[1].to_f64_lossy(),
                self.tubular_width.to_f64_lossy(),
            ));
        }
        Ok((s, d))
    }

    /// Binary search for the largest `t` with an injective tubular map on a
    /// fine `s`-grid, halved for safety.
    fn find_tubular_width(&self) -> T {
        let probe = |t: T| -> bool {
            let n = 256usize;
            for k in 0..n {
                let s = self.boundary_length * T::of_usize(k) / T::of_usize(n);
                let p = self.chart(s, t);
                if !self.contains(p) {
                    return false;
                }
                let (_, d) = self.foot_point(p);
                if (d - t).abs() > T::of(1e-6) * (T::one() + t) {
                    return false;
                }
            }
            true
        };
        let mut lo = T::zero();
        let mut hi = self.boundary_length / T::of(4.0);
        if probe(hi) {
            return hi / T::of(2.0);
        }
        for _ in 0..40 {
            let mid = (lo + hi) / T::of(2.0);
            if probe(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo / T::of(2.0)
    }
}

/// Dense boundary sampling with a uniform spatial bin index; turns
/// nearest-boundary queries from `O(samples)` scans into `O(1)`-ish lookups.
/// Sample spacing is ~`|dOmega|/4096`, so distances carry an error well below
/// any grid spacing used by the solvers.
#[derive(Debug, Clone)]
pub struct BoundaryIndex<T> {
    pub arc: Vec<T>,
    pub points: Vec<[T; 2]>,
    bins: Vec<Vec<u32>>,
    nbin: usize,
    lo: [T; 2],
    bin_size: T,
}

impl<T: Real> BoundaryIndex<T> {
    pub fn new(domain: &Domain<T>) -> Self {
        let n = TABLE_SIZE;
        let mut arc = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for k in 0..n {
            let s = domain.boundary_length * T::of_usize(k) / T::of_usize(n);
            arc.push(s);
            points.push(domain.gamma(s));
        }
        let (lo, hi) = domain.bounding_box();
        let margin = T::of(0.05) * (hi[0] - lo[0]);
        let lo = [lo[0] - margin, lo[1] - margin];
        let hi = [hi[0] + margin, hi[1] + margin];
        let nbin = 128usize;
        let bin_size = ((hi[0] - lo[0]).max(hi[1] - lo[1])) / T::of_usize(nbin);
        let mut bins = vec![Vec::new(); nbin * nbin];
        for (idx, p) in points.iter().enumerate() {
            let bi = ((p[0] - lo[0]) / bin_size).floor().to_f64_lossy() as usize;
            let bj = ((p[1] - lo[1]) / bin_size).floor().to_f64_lossy() as usize;
            bins[bj.min(nbin - 1) * nbin + bi.min(nbin - 1)].push(idx as u32);
        }
        Self {
            arc,
            points,
            bins,
            nbin,
            lo,
            bin_size,
        }
    }

    /// Arc length and distance of the (approximately) nearest boundary point.
    pub fn nearest(&self, x: [T; 2]) -> (T, T) {
        let nb = self.nbin as i64;
        let ci = (((x[0] - self.lo[0]) / self.bin_size).floor().to_f64_lossy() as i64)
            .clamp(0, nb - 1);
        let cj = (((x[1] - self.lo[1]) / self.bin_size).floor().to_f64_lossy() as i64)
            .clamp(0, nb - 1);
        let mut best = T::infinity();
        let mut best_idx = 0usize;
        let mut ring = 0i64;
        loop {
            for dj in -ring..=ring {
                for di in -ring..=ring {
                    if di.abs() != ring && dj.abs() != ring {
                        continue;
                    }
                    let i = ci + di;
                    let j = cj + dj;
                    if i < 0 || j < 0 || i >= nb || j >= nb {
                        continue;
                    }
                    for &idx in &self.bins[(j * nb + i) as usize] {
                        let p = self.points[idx as usize];
                        let d2 = (x[0] - p[0]) * (x[0] - p[0]) + (x[1] - p[1]) * (x[1] - p[1]);
                        if d2 < best {
                            best = d2;
                            best_idx = idx as usize;
                        }
                    }
                }
            }
            // every unexplored sample lies beyond (ring - 1) * bin_size from
            // the query, so stop once the current best cannot be beaten
            if best.is_finite() && ring >= 1 {
                let safe = self.bin_size * T::of_usize((ring - 1) as usize);
                if best.sqrt() <= safe {
                    break;
                }
            }
            ring += 1;
            if ring > 2 * nb {
                break;
            }
        }
        // parabolic refinement of d^2(s) through the neighboring samples
        let n = self.points.len();
        let d2_at = |k: usize| {
            let p = self.points[k % n];
            (x[0] - p[0]) * (x[0] - p[0]) + (x[1] - p[1]) * (x[1] - p[1])
        };
        let prev = d2_at((best_idx + n - 1) % n);
        let here = d2_at(best_idx);
        let next = d2_at((best_idx + 1) % n);
        let denom = prev - T::of(2.0) * here + next;
        let ds = self.arc[1] - self.arc[0];
        let (s, d2) = if denom > T::zero() {
            let off = (prev - next) / (T::of(2.0) * denom);
            let off = off.max(-T::one()).min(T::one());
            (
                self.arc[best_idx] + off * ds,
                here - T::of(0.25) * (prev - next) * off,
            )
        } else {
            (self.arc[best_idx], here)
        };
        (s, d2.max(T::zero()).sqrt())
    }
}

/// Which level-set family a query targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelSetKind {
    /// `V(eps) = {x in Omega : |B0| <= eps}`.
    BulkV,
    /// `V_bnd(eps) = {x on boundary : Theta0 |B0| <= eps}`.
    BoundaryV,
    /// `omega(eps) = Omega \ V(eps)`.
    Omega,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LevelSetQuery<T> {
    pub epsilon: T,
    pub kind: LevelSetKind,
}

/// Cell mask plus measure for bulk queries; arc mask plus length for boundary
/// queries. Cell-counting measures carry an `O(h)` perimeter error.
#[derive(Debug, Clone)]
pub struct LevelSet<T> {
    pub mask: Vec<bool>,
    pub measure: T,
}

/// Interior square or boundary window from the local-average statements.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum Window<T> {
    /// `Q_{2l}(x0)`, requires the square inside the closed domain.
    Interior { center: [T; 2], halfwidth: T },
    /// Boundary patch: arc distance `< l` from `s0`, depth `< 2l`.
    Boundary { s0: T, halfwidth: T },
}

impl<T: Real> Window<T> {
    pub fn validate(&self, domain: &Domain<T>) -> Result<()> {
        match *self {
            Window::Interior { center, halfwidth } => {
                for sx in [-T::one(), T::one()] {
                    for sy in [-T::one(), T::one()] {
                        let corner = [center[0] + sx * halfwidth, center[1] + sy * halfwidth];
                        if !domain.contains(corner) {
                            return Err(GlError::Window(
                                center[0].to_f64_lossy(),
                                center[1].to_f64_lossy(),
                                halfwidth.to_f64_lossy(),
                                "interior square leaves the domain".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
            Window::Boundary { s0, halfwidth } => {
                if halfwidth <= T::zero() || s0 < T::zero() {
                    return Err(GlError::Window(
                        s0.to_f64_lossy(),
                        T::zero().to_f64_lossy(),
                        halfwidth.to_f64_lossy(),
                        "boundary window needs s0 >= 0 and positive halfwidth".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Membership test; boundary windows use the tubular chart.
    pub fn contains(&self, domain: &Domain<T>, x: [T; 2]) -> bool {
        match *self {
            Window::Interior { center, halfwidth } => {
                (x[0] - center[0]).abs() < halfwidth && (x[1] - center[1]).abs() < halfwidth
            }
            Window::Boundary { s0, halfwidth } => match domain.boundary_coords(x) {
                Ok((s, t)) => {
                    let len = domain.boundary_length;
                    let mut ds = (s - s0).abs() % len;
                    if ds > len / T::of(2.0) {
                        ds = len - ds;
                    }
                    ds < halfwidth && t < T::of(2.0) * halfwidth
                }
                Err(_) => false,
            },
        }
    }

    /// Area of the window (boundary windows to first order in the width).
    pub fn area(&self, domain: &Domain<T>) -> T {
        match *self {
            Window::Interior { halfwidth, .. } => T::of(4.0) * halfwidth * halfwidth,
            Window::Boundary { s0, halfwidth } => {
                // ∫∫ (1 - t k) dt ds over (-l, l) x (0, 2l)
                let k = domain.curvature(s0);
                T::of(4.0) * halfwidth * halfwidth
                    * (T::one() - k * halfwidth)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn star() -> Domain<f64> {
        Domain::new(StarShape {
            c0: 1.0,
            cos_coeffs: vec![0.0, 0.12],
            sin_coeffs: vec![0.05],
        })
    }

    #[test]
    fn disk_boundary_tables() {
        let d = Domain::<f64>::disk();
        assert_abs_diff_eq!(d.boundary_length, 2.0 * std::f64::consts::PI, epsilon = 1e-10);
        let g = d.gamma(0.0);
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.curvature(1.234), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn disk_boundary_coords_radial() {
        let d = Domain::<f64>::disk();
        let (s, t) = d.boundary_coords([0.9, 0.0]).unwrap();
        assert_abs_diff_eq!(t, 0.1, epsilon = 1e-10);
        let g = d.gamma(s);
        assert_abs_diff_eq!(g[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn boundary_point_has_zero_depth() {
        let d = Domain::<f64>::disk();
        let x = d.gamma(2.0);
        let (_, t) = d.boundary_coords([x[0] * 0.999999, x[1] * 0.999999]).unwrap();
        assert!(t < 2e-6);
    }

    #[test]
    fn jacobian_values() {
        let d = Domain::<f64>::disk();
        assert_abs_diff_eq!(d.jacobian(0.0, 0.1).unwrap(), 0.9, epsilon = 1e-9);
        assert_abs_diff_eq!(d.jacobian(1.7, 0.0).unwrap(), 1.0, epsilon = 1e-12);
        assert!(d.jacobian(0.0, -0.01).is_err());
        assert!(d.jacobian(0.0, 10.0).is_err());
    }

    #[test]
    fn orientation_and_unit_speed() {
        let d = star();
        let n = 97;
        for k in 0..n {
            let s = d.boundary_length * k as f64 / n as f64;
            let t = d.tangent(s);
            let nu = d.normal(s);
            let det = t[0] * nu[1] - t[1] * nu[0];
            assert_abs_diff_eq!(det, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(t[0] * t[0] + t[1] * t[1], 1.0, epsilon = 1e-12);
            // finite-difference speed of gamma
            let ds = 1e-6;
            let a = d.gamma(s);
            let b = d.gamma(s + ds);
            let speed = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt() / ds;
            assert_abs_diff_eq!(speed, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn periodicity() {
        let d = star();
        let a = d.gamma(1.0);
        let b = d.gamma(1.0 + d.boundary_length);
        assert_abs_diff_eq!(a[0], b[0], epsilon = 1e-9);
        assert_abs_diff_eq!(a[1], b[1], epsilon = 1e-9);
    }

    #[test]
    fn curvature_matches_five_point_stencil() {
        let d = star();
        let hs = 1e-3;
        for k in 0..41 {
            let s = d.boundary_length * k as f64 / 41.0;
            let p = |o: f64| d.gamma(s + o * hs);
            // five-point second derivative of gamma; |gamma''| = |k|
            let m2 = p(-2.0);
            let m1 = p(-1.0);
            let c0 = p(0.0);
            let p1 = p(1.0);
            let p2 = p(2.0);
            let dd = |i: usize| {
                (-m2[i] + 16.0 * m1[i] - 30.0 * c0[i] + 16.0 * p1[i] - p2[i]) / (12.0 * hs * hs)
            };
            let gxx = dd(0);
            let gyy = dd(1);
            let nu = d.normal(s);
            // gamma'' = k nu for unit-speed curves with this frame
            let k_fd = gxx * nu[0] + gyy * nu[1];
            assert_abs_diff_eq!(d.curvature(s), k_fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn jacobian_positive_through_tubular_width() {
        let d = star();
        assert!(d.tubular_width > 0.0);
        for k in 0..64 {
            let s = d.boundary_length * k as f64 / 64.0;
            for j in 0..=8 {
                let t = d.tubular_width * j as f64 / 8.0;
                assert!(d.jacobian(s, t).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn chart_round_trip_on_random_tubular_points() {
        // 10^3 seeded points: Phi(boundary_coords(x)) = x to 1e-8, round trip
        // error below 1e-7
        let d = star();
        let mut state = 0x243F6A8885A308D3u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut tested = 0;
        while tested < 1000 {
            let s = d.boundary_length * rand01();
            let t = d.tubular_width * rand01();
            let x = d.chart(s, t);
            if !d.contains(x) {
                continue;
            }
            tested += 1;
            let (s2, t2) = d.boundary_coords(x).unwrap();
            let y = d.chart(s2, t2);
            let err = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            assert!(err < 1e-8, "round trip error {err} at s={s} t={t}");
            assert!((t2 - t).abs() < 1e-7);
        }
    }

    #[test]
    fn betas_ordering_and_constant_field() {
        let d = Domain::<f64>::disk();
        let f = FieldProfile::Constant { c: -0.7 };
        let (b0, b1) = f.betas(&d, 128);
        assert_abs_diff_eq!(b0, 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(b1, 0.7, epsilon = 1e-12);

        let f = FieldProfile::<f64>::LinearX1;
        let (b0, b1) = f.betas(&d, 128);
        assert!(b1 <= b0);
        assert_abs_diff_eq!(b0, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn holder_quotient_consistent_with_declared_alpha() {
        let f = FieldProfile::Hoelder { c: 0.0, alpha: 0.5f64 };
        let mut state = 99u64;
        let mut rand01 = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let x = [2.0 * rand01() - 1.0, 2.0 * rand01() - 1.0];
            let y = [2.0 * rand01() - 1.0, 2.0 * rand01() - 1.0];
            let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            if dist < 1e-12 {
                continue;
            }
            let q = (f.eval(x) - f.eval(y)).abs() / dist.powf(0.5);
            assert!(q < 4.0, "Hoelder quotient {q} too large");
        }
    }

    #[test]
    fn tabulated_field_interpolates() {
        let t = TabulatedField {
            x0: [-1.0, -1.0],
            dx: [0.5, 0.5],
            nx: [5, 5],
            values: (0..25)
                .map(|k| {
                    let i = k % 5;
                    let j = k / 5;
                    -1.0 + 0.5 * i as f64 + 0.1 * (-1.0 + 0.5 * j as f64)
                })
                .collect(),
            alpha: 1.0,
        };
        // bilinear reproduces affine data exactly
        assert_abs_diff_eq!(t.eval([0.3, -0.4]), 0.3 + 0.1 * -0.4, epsilon = 1e-12);
    }

    #[test]
    fn interior_window_validation() {
        let d = Domain::<f64>::disk();
        let ok = Window::Interior {
            center: [0.2, 0.0],
            halfwidth: 0.1,
        };
        assert!(ok.validate(&d).is_ok());
        let bad = Window::Interior {
            center: [0.95, 0.0],
            halfwidth: 0.2,
        };
        assert!(bad.validate(&d).is_err());
    }
}
