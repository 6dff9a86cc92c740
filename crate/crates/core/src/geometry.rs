//! Reference curve, tubular neighbourhood and the displacement-driven flow map.
//!
//! Γ = ℝ/ℤ is parametrised by `y ∈ [0, 1)`. A normal displacement `w(y)` moves the
//! reference boundary point `φ(y)` to `φ(y) + w(y) n(y)`; the flow map extends this
//! deformation into the tube `{a < d < b}` through the cut-off profile `f_Γ(d)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

#[inline]
fn dot2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn norm2(a: Vec2) -> f64 {
    dot2(a, a).sqrt()
}

/// Parametric closed curve bounding the reference domain Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    Circle { radius: f64 },
    /// Axis-aligned ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { a: f64, b: f64 },
}

impl Chart {
    pub fn unit_circle() -> Self {
        Chart::Circle { radius: 1.0 }
    }

    pub fn point(&self, y: f64) -> Vec2 {
        let t = TAU * y;
        match *self {
            Chart::Circle { radius } => [radius * t.cos(), radius * t.sin()],
            Chart::Ellipse { a, b } => [a * t.cos(), b * t.sin()],
        }
    }

    /// dφ/dy.
    pub fn tangent(&self, y: f64) -> Vec2 {
        let t = TAU * y;
        let (ra, rb) = self.axes();
        [-TAU * ra * t.sin(), TAU * rb * t.cos()]
    }

    /// d²φ/dy².
    pub fn second_derivative(&self, y: f64) -> Vec2 {
        let t = TAU * y;
        let (ra, rb) = self.axes();
        [-TAU * TAU * ra * t.cos(), -TAU * TAU * rb * t.sin()]
    }

    /// Outward unit normal n(y).
    pub fn normal(&self, y: f64) -> Vec2 {
        let t = TAU * y;
        let (ra, rb) = self.axes();
        let v = [rb * t.cos(), ra * t.sin()];
        let g = norm2(v);
        [v[0] / g, v[1] / g]
    }

    /// dn/dy.
    pub fn normal_derivative(&self, y: f64) -> Vec2 {
        let t = TAU * y;
        let (ra, rb) = self.axes();
        let v = [rb * t.cos(), ra * t.sin()];
        let dv = [-TAU * rb * t.sin(), TAU * ra * t.cos()];
        let g = norm2(v);
        let dg = dot2(v, dv) / g;
        [(dv[0] * g - v[0] * dg) / (g * g), (dv[1] * g - v[1] * dg) / (g * g)]
    }

    /// Strict interior test for the reference domain Ω.
    pub fn contains(&self, x: Vec2) -> bool {
        let (ra, rb) = self.axes();
        (x[0] / ra).powi(2) + (x[1] / rb).powi(2) < 1.0
    }

    /// Smallest radius of curvature along the curve.
    pub fn min_curvature_radius(&self) -> f64 {
        let (ra, rb) = self.axes();
        (ra * ra / rb).min(rb * rb / ra)
    }

    /// Largest distance of the curve from the origin.
    pub fn max_extent(&self) -> f64 {
        let (ra, rb) = self.axes();
        ra.max(rb)
    }

    pub fn area(&self) -> f64 {
        let (ra, rb) = self.axes();
        PI * ra * rb
    }

    fn axes(&self) -> (f64, f64) {
        match *self {
            Chart::Circle { radius } => (radius, radius),
            Chart::Ellipse { a, b } => (a, b),
        }
    }
}

/// The mollified trapezoid `f_Γ`: equal to 1 on a plateau around `d = 0` and vanishing
/// near the edges of the tube.
#[derive(Debug, Clone)]
pub struct ProfileFGamma {
    /// m''
    pub outer_lo: f64,
    /// m'
    pub inner_lo: f64,
    /// M'
    pub inner_hi: f64,
    /// M''
    pub outer_hi: f64,
    pub alpha: f64,
    table_lo: f64,
    table_step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

const PROFILE_TABLE: usize = 4096;
const MOLLIFIER_POINTS: usize = 16384;

impl ProfileFGamma {
    /// Builds the profile from the plateau parameters `m'' < m' < 0 < M' < M''`.
    pub fn new(outer_lo: f64, inner_lo: f64, inner_hi: f64, outer_hi: f64, alpha: f64) -> Result<Self> {
        if !(outer_lo < inner_lo && inner_lo < 0.0 && 0.0 < inner_hi && inner_hi < outer_hi) {
            return Err(Error::Validation(format!(
                "profile parameters must satisfy m'' < m' < 0 < M' < M'' (got {outer_lo}, {inner_lo}, {inner_hi}, {outer_hi})"
            )));
        }
        let half_gap = 0.5 * (inner_lo - outer_lo).min(outer_hi - inner_hi);
        if !(alpha > 0.0 && alpha < half_gap) {
            return Err(Error::Validation(format!(
                "mollifier half-width {alpha} must lie in (0, {half_gap})"
            )));
        }
        let plateau = (outer_hi - inner_hi) - (outer_lo - inner_lo);
        if plateau <= 2.0 * alpha {
            return Err(Error::Validation(format!(
                "plateau of width {plateau} does not survive mollification with alpha = {alpha}"
            )));
        }
        let mut p = ProfileFGamma {
            outer_lo,
            inner_lo,
            inner_hi,
            outer_hi,
            alpha,
            table_lo: outer_lo - alpha,
            table_step: (outer_hi - outer_lo + 2.0 * alpha) / (PROFILE_TABLE - 1) as f64,
            values: Vec::new(),
            slopes: Vec::new(),
        };
        p.tabulate();
        Ok(p)
    }

    /// Default plateau placement relative to tube bounds `a < 0 < b`.
    pub fn for_tube(a: f64, b: f64) -> Result<Self> {
        Self::new(a + 0.05, a + 0.15, b - 0.15, b - 0.05, 0.04)
    }

    /// Piecewise-linear trapezoid before mollification.
    pub fn raw(&self, x: f64) -> f64 {
        let left_top = self.outer_lo - self.inner_lo;
        let right_top = self.outer_hi - self.inner_hi;
        if x <= self.outer_lo || x >= self.outer_hi {
            0.0
        } else if x < left_top {
            (x - self.outer_lo) / (-self.inner_lo)
        } else if x <= right_top {
            1.0
        } else {
            (self.outer_hi - x) / self.inner_hi
        }
    }

    fn tabulate(&mut self) {
        // The trapezoid is Σ J_k (x − k)_+ over its four kinks, so its mollification is
        // Σ J_k α Ψ((x − k)/α) with Φ the bump CDF and Ψ' = Φ; both are tabulated once on a
        // fine grid, which keeps values and slopes mutually consistent.
        let n = MOLLIFIER_POINTS;
        let dr = 2.0 / n as f64;
        let bump: Vec<f64> = (0..=n)
            .map(|j| {
                let r = -1.0 + dr * j as f64;
                if r.abs() < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 }
            })
            .collect();
        let mut cdf = vec![0.0; n + 1];
        for j in 1..=n {
            cdf[j] = cdf[j - 1] + 0.5 * dr * (bump[j - 1] + bump[j]);
        }
        let total = cdf[n];
        cdf.iter_mut().for_each(|c| *c /= total);
        let mut psi = vec![0.0; n + 1];
        for j in 1..=n {
            psi[j] = psi[j - 1] + 0.5 * dr * (cdf[j - 1] + cdf[j]);
        }
        let fine = |table: &[f64], r: f64| {
            let t = (r + 1.0) / dr;
            let i = (t.floor() as usize).min(n - 1);
            let f = t - i as f64;
            table[i] + f * (table[i + 1] - table[i])
        };
        let big_phi = |r: f64| if r <= -1.0 { 0.0 } else if r >= 1.0 { 1.0 } else { fine(&cdf, r) };
        let big_psi = |r: f64| if r <= -1.0 { 0.0 } else if r >= 1.0 { psi[n] + (r - 1.0) } else { fine(&psi, r) };
        let sl = 1.0 / (-self.inner_lo);
        let sr = 1.0 / self.inner_hi;
        let kinks = [
            (self.outer_lo, sl),
            (self.outer_lo - self.inner_lo, -sl),
            (self.outer_hi - self.inner_hi, -sr),
            (self.outer_hi, sr),
        ];
        self.values = Vec::with_capacity(PROFILE_TABLE);
        self.slopes = Vec::with_capacity(PROFILE_TABLE);
        for i in 0..PROFILE_TABLE {
            let x = self.table_lo + self.table_step * i as f64;
            let (mut v, mut dv) = (0.0, 0.0);
            for &(k, jump) in &kinks {
                let r = (x - k) / self.alpha;
                v += jump * self.alpha * big_psi(r);
                dv += jump * big_phi(r);
            }
            self.values.push(v);
            self.slopes.push(dv);
        }
    }

    /// Cubic Hermite interpolation of the (value, slope) tables: `(f, f')`.
    fn lookup(&self, x: f64) -> (f64, f64) {
        let t = (x - self.table_lo) / self.table_step;
        if !(t > 0.0) || t >= (PROFILE_TABLE - 1) as f64 {
            return (0.0, 0.0);
        }
        let i = t.floor() as usize;
        let s = t - i as f64;
        let h = self.table_step;
        let (v0, v1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]);
        let (s2, s3) = (s * s, s * s * s);
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * v0 + (s3 - 2.0 * s2 + s) * h * m0 + (3.0 * s2 - 2.0 * s3) * v1 + (s3 - s2) * h * m1;
        let dv = (6.0 * s2 - 6.0 * s) * (v0 - v1) / h + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (3.0 * s2 - 2.0 * s) * m1;
        (v, dv)
    }

    fn on_plateau(&self, x: f64) -> bool {
        x >= self.outer_lo - self.inner_lo + self.alpha && x <= self.outer_hi - self.inner_hi - self.alpha
    }

    pub fn value(&self, x: f64) -> f64 {
        if self.on_plateau(x) {
            return 1.0;
        }
        self.lookup(x).0.clamp(0.0, 1.0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if self.on_plateau(x) {
            return 0.0;
        }
        self.lookup(x).1
    }

    /// Upper bound on |f_Γ'|.
    pub fn slope_bound(&self) -> f64 {
        1.0 / (-self.inner_lo).min(self.inner_hi)
    }
}

/// Nodal samples of a normal displacement on Γ, with a trigonometric interpolant.
#[derive(Debug, Clone)]
pub struct DisplacementSample {
    values: Vec<f64>,
    velocities: Option<Vec<f64>>,
    coeffs: Vec<Complex64>,
}

impl DisplacementSample {
    pub fn new(values: Vec<f64>) -> Self {
        let coeffs = dft(&values);
        DisplacementSample { values, velocities: None, coeffs }
    }

    pub fn with_velocities(values: Vec<f64>, velocities: Vec<f64>) -> Self {
        assert_eq!(values.len(), velocities.len(), "velocity samples must match displacement nodes");
        let mut s = Self::new(values);
        s.velocities = Some(velocities);
        s
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::new((0..n).map(|j| f(j as f64 / n as f64)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn velocities(&self) -> Option<&[f64]> {
        self.velocities.as_deref()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn node_position(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trigonometric interpolant w(y) and its derivative w'(y).
    pub fn eval_with_derivative(&self, y: f64) -> (f64, f64) {
        let n = self.values.len();
        if n == 0 {
            return (0.0, 0.0);
        }
        let mut v = self.coeffs[0].re;
        let mut dv = 0.0;
        let top = if n % 2 == 0 { n / 2 } else { n.div_ceil(2) };
        for k in 1..top {
            let e = Complex64::from_polar(1.0, TAU * k as f64 * y);
            let c = self.coeffs[k] * e;
            v += 2.0 * c.re;
            dv += -2.0 * TAU * k as f64 * c.im;
        }
        if n % 2 == 0 && n >= 2 {
            let k = (n / 2) as f64;
            let c = self.coeffs[n / 2].re;
            v += c * (TAU * k * y).cos();
            dv -= c * TAU * k * (TAU * k * y).sin();
        }
        (v, dv)
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.values.len();
        let t = y.rem_euclid(1.0) * n as f64;
        let r = t.round();
        if (t - r).abs() < 1e-12 {
            return self.values[(r as usize) % n];
        }
        self.eval_with_derivative(y).0
    }
}

fn dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                acc += Complex64::from_polar(*v, -TAU * ((k * j) % n) as f64 / n as f64);
            }
            acc / n as f64
        })
        .collect()
}

/// Result of the injectivity predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injectivity {
    pub injective: bool,
    pub margin: f64,
}

/// Reference configuration: chart, tube bounds, extended box and the cut-off profile.
#[derive(Debug, Clone)]
pub struct ReferenceGeometry {
    pub chart: Chart,
    /// a_∂Ω < 0
    pub a: f64,
    /// b_∂Ω > 0
    pub b: f64,
    /// Half-width 2R of the extended box B = [-2R, 2R]².
    pub half_width: f64,
    pub n_gamma: usize,
    pub profile: ProfileFGamma,
}

impl Default for ReferenceGeometry {
    fn default() -> Self {
        ReferenceGeometry::new(Chart::unit_circle(), -0.5, 0.5, 2.0, 128).expect("default geometry is valid")
    }
}

impl ReferenceGeometry {
    pub fn new(chart: Chart, a: f64, b: f64, half_width: f64, n_gamma: usize) -> Result<Self> {
        let profile = ProfileFGamma::for_tube(a, b)?;
        Self::with_profile(chart, a, b, half_width, n_gamma, profile)
    }

    pub fn with_profile(
        chart: Chart,
        a: f64,
        b: f64,
        half_width: f64,
        n_gamma: usize,
        profile: ProfileFGamma,
    ) -> Result<Self> {
        let (ra, rb) = chart.axes();
        if !(ra > 0.0 && rb > 0.0) {
            return Err(Error::Validation("chart axes must be positive".into()));
        }
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::Validation(format!("tube bounds must satisfy a < 0 < b (got {a}, {b})")));
        }
        if -a >= chart.min_curvature_radius() {
            return Err(Error::Validation(format!(
                "inner tube bound {a} exceeds the minimal curvature radius {}",
                chart.min_curvature_radius()
            )));
        }
        if chart.max_extent() + b >= half_width {
            return Err(Error::Validation(format!(
                "tube reaches the box boundary (extent {} + b {} >= half-width {half_width})",
                chart.max_extent(),
                b
            )));
        }
        if profile.outer_lo <= a || profile.outer_hi >= b {
            return Err(Error::Validation("cut-off profile must be supported inside the tube".into()));
        }
        if n_gamma < 4 {
            return Err(Error::Validation("at least 4 interface nodes are required".into()));
        }
        Ok(ReferenceGeometry { chart, a, b, half_width, n_gamma, profile })
    }

    /// Signed distance and projection parameter, or `None` outside the closed tube.
    pub fn tube_coords(&self, x: Vec2) -> Option<(f64, f64)> {
        match self.chart {
            Chart::Circle { radius } => {
                let r = norm2(x);
                let d = r - radius;
                if d < self.a || d > self.b || r == 0.0 {
                    return None;
                }
                let y = (x[1].atan2(x[0]) / TAU).rem_euclid(1.0);
                Some((d, if y >= 1.0 { 0.0 } else { y }))
            }
            Chart::Ellipse { .. } => self.newton_projection(x),
        }
    }

    fn newton_projection(&self, x: Vec2) -> Option<(f64, f64)> {
        const SAMPLES: usize = 512;
        let chart = &self.chart;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..SAMPLES {
            let y = i as f64 / SAMPLES as f64;
            let p = chart.point(y);
            let d2 = (x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2);
            if d2 < best.0 {
                best = (d2, y);
            }
        }
        let mut y = best.1;
        for _ in 0..50 {
            let p = chart.point(y);
            let t = chart.tangent(y);
            let s = chart.second_derivative(y);
            let r = [x[0] - p[0], x[1] - p[1]];
            let g = dot2(r, t);
            let dg = -dot2(t, t) + dot2(r, s);
            if dg == 0.0 {
                break;
            }
            let step = g / dg;
            y -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        y = y.rem_euclid(1.0);
        if y >= 1.0 {
            y = 0.0;
        }
        let p = chart.point(y);
        let n = chart.normal(y);
        let r = [x[0] - p[0], x[1] - p[1]];
        let d = dot2(r, n);
        let resid = [r[0] - d * n[0], r[1] - d * n[1]];
        if norm2(resid) > 1e-9 * (1.0 + d.abs()) || d < self.a || d > self.b {
            return None;
        }
        Some((d, y))
    }

    /// Signed distance d(X) = (X − π(X))·n(π(X)); negative inside Ω.
    pub fn signed_distance(&self, x: Vec2) -> Result<f64> {
        self.tube_coords(x).map(|(d, _)| d).ok_or_else(|| {
            Error::Domain(format!("point ({}, {}) lies outside the tubular neighbourhood", x[0], x[1]))
        })
    }

    /// Projection π(X) ∈ [0, 1) onto Γ.
    pub fn project_to_gamma(&self, x: Vec2) -> Result<f64> {
        self.tube_coords(x).map(|(_, y)| y).ok_or_else(|| {
            Error::Domain(format!(
                "projection of ({}, {}) is not unique: point lies outside the tubular neighbourhood",
                x[0], x[1]
            ))
        })
    }

    pub fn check_injectivity(&self, w: &DisplacementSample) -> Injectivity {
        let lo = w.min();
        let hi = w.max();
        let margin = (lo - self.a).min(self.b - hi);
        Injectivity { injective: self.a < lo && hi < self.b, margin }
    }

    /// Two-sided bounds (c, C) on the directional Jacobian factor 1 + f_Γ'(d)·w(π(X)).
    pub fn jacobian_bounds(&self, w: &DisplacementSample) -> (f64, f64) {
        let p = &self.profile;
        let upper = w.max().max(0.0);
        let lower = (-w.min()).max(0.0);
        let s = upper.max(lower) / (-p.inner_lo).min(p.inner_hi);
        (1.0 - s, 1.0 + s)
    }

    fn require_admissible(&self, w: &DisplacementSample) -> Result<()> {
        let inj = self.check_injectivity(w);
        if !inj.injective {
            return Err(Error::Degeneracy(format!(
                "displacement range [{}, {}] leaves the tube ({}, {})",
                w.min(),
                w.max(),
                self.a,
                self.b
            )));
        }
        let (c, _) = self.jacobian_bounds(w);
        if c <= 0.0 {
            return Err(Error::Degeneracy(format!(
                "flow-map Jacobian lower bound {c} is not positive"
            )));
        }
        Ok(())
    }

    /// The extended flow map X ↦ X + f_Γ(d(X)) w(π(X)) n(π(X)).
    pub fn flow_map(&self, w: &DisplacementSample, x: Vec2) -> Result<Vec2> {
        self.require_admissible(w)?;
        Ok(self.flow_map_unchecked(w, x))
    }

    pub(crate) fn flow_map_unchecked(&self, w: &DisplacementSample, x: Vec2) -> Vec2 {
        match self.tube_coords(x) {
            Some((d, y)) => {
                let f = self.profile.value(d);
                if f == 0.0 {
                    return x;
                }
                let n = self.chart.normal(y);
                let s = f * w.eval(y);
                [x[0] + s * n[0], x[1] + s * n[1]]
            }
            None => x,
        }
    }

    /// Directional Jacobian factor 1 + f_Γ'(d(X))·w(π(X)); 1 outside the tube.
    pub fn jacobian_factor(&self, w: &DisplacementSample, x: Vec2) -> f64 {
        match self.tube_coords(x) {
            Some((d, y)) => 1.0 + self.profile.derivative(d) * w.eval(y),
            None => 1.0,
        }
    }

    /// Deformed boundary point φ(y) + w(y) n(y).
    pub fn deformed_point(&self, w: &DisplacementSample, y: f64) -> Vec2 {
        let p = self.chart.point(y);
        let n = self.chart.normal(y);
        let s = w.eval(y);
        [p[0] + s * n[0], p[1] + s * n[1]]
    }

    /// Unit normal n^w and area factor S^w = det∇Φ̃·|∇Φ̃^{-T} n| at Γ-parameter `y`.
    pub fn deformed_normal_and_area(&self, w: &DisplacementSample, y: f64) -> Result<(Vec2, f64)> {
        self.require_admissible(w)?;
        let (wv, dw) = w.eval_with_derivative(y);
        let wv = if w.is_empty() { 0.0 } else { wv };
        let t = self.chart.tangent(y);
        let n = self.chart.normal(y);
        let dn = self.chart.normal_derivative(y);
        let f0 = self.profile.value(0.0);
        let df0 = self.profile.derivative(0.0);
        // Columns of ∇Φ̃ in tube coordinates (y, z), then F = [∂_yΦ̃ ∂_zΦ̃]·[φ' n]⁻¹.
        let gy = [
            t[0] + f0 * (wv * dn[0] + dw * n[0]),
            t[1] + f0 * (wv * dn[1] + dw * n[1]),
        ];
        let gz = [(1.0 + df0 * wv) * n[0], (1.0 + df0 * wv) * n[1]];
        let ref_det = t[0] * n[1] - t[1] * n[0];
        let inv_ref = [[n[1] / ref_det, -n[0] / ref_det], [-t[1] / ref_det, t[0] / ref_det]];
        let f = [
            [
                gy[0] * inv_ref[0][0] + gz[0] * inv_ref[1][0],
                gy[0] * inv_ref[0][1] + gz[0] * inv_ref[1][1],
            ],
            [
                gy[1] * inv_ref[0][0] + gz[1] * inv_ref[1][0],
                gy[1] * inv_ref[0][1] + gz[1] * inv_ref[1][1],
            ],
        ];
        let det = f[0][0] * f[1][1] - f[0][1] * f[1][0];
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::Degeneracy(format!("flow-map Jacobian is singular at y = {y} (det = {det})")));
        }
        // F^{-T} = cof(F)/det.
        let cof_n = [f[1][1] * n[0] - f[1][0] * n[1], -f[0][1] * n[0] + f[0][0] * n[1]];
        let len = norm2(cof_n);
        let area = len;
        let normal = [cof_n[0] / len, cof_n[1] / len];
        Ok((normal, area))
    }

    /// Whether `x` lies in the deformed domain Ω^w.
    pub fn contains_deformed(&self, w: &DisplacementSample, x: Vec2) -> bool {
        match self.tube_coords(x) {
            Some((d, y)) => d < w.eval(y),
            None => self.chart.contains(x),
        }
    }

    /// `d(X) − w(π(X))` inside the tube (negative in Ω^w); `None` outside the tube.
    pub fn offset_from_deformed(&self, w: &DisplacementSample, x: Vec2) -> Option<f64> {
        self.tube_coords(x).map(|(d, y)| d - w.eval(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_distance_and_projection() {
        let g = ReferenceGeometry::default();
        assert!((g.signed_distance([1.2, 0.0]).unwrap() - 0.2).abs() < 1e-15);
        assert!((g.project_to_gamma([0.0, 1.3]).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(g.signed_distance([0.1, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn profile_is_one_at_zero_and_vanishes_at_tube_edges() {
        let p = ProfileFGamma::for_tube(-0.5, 0.5).unwrap();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(-0.495), 0.0);
        assert_eq!(p.value(0.495), 0.0);
        assert!((p.derivative(-0.25) - 1.0 / 0.35).abs() < 1e-9);
    }

    #[test]
    fn trigonometric_interpolant_reproduces_modes() {
        let w = DisplacementSample::from_fn(16, |y| 0.05 * (TAU * y).cos() + 0.01 * (3.0 * TAU * y).sin());
        let y = 0.137;
        let (v, dv) = w.eval_with_derivative(y);
        assert!((v - (0.05 * (TAU * y).cos() + 0.01 * (3.0 * TAU * y).sin())).abs() < 1e-14);
        let exact = -0.05 * TAU * (TAU * y).sin() + 0.03 * TAU * (3.0 * TAU * y).cos();
        assert!((dv - exact).abs() < 1e-13);
    }

    #[test]
    fn constant_displacement_area_factor() {
        let g = ReferenceGeometry::default();
        let w = DisplacementSample::constant(128, 0.1);
        let (n, s) = g.deformed_normal_and_area(&w, 0.3).unwrap();
        assert!((s - 1.1).abs() < 1e-12);
        let n0 = g.chart.normal(0.3);
        assert!((n[0] - n0[0]).abs() < 1e-12 && (n[1] - n0[1]).abs() < 1e-12);
    }
}
