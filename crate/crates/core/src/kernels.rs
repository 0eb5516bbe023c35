//! Smooth kernels, their L¹-normalised dilates and the sampled discrete kernels built from them.

use std::f64::consts::PI;
use std::fmt;

use crate::quadrature::{gauss_legendre, Quadrature};
use crate::{Error, Result, C64};

/// Grid density (points per unit length) for derivative sup scans.
pub const BETA_SCAN_DENSITY: f64 = 1e4;
/// Inflation applied to every scanned derivative sup.
pub const SAFETY: f64 = 1.05;

/// `t ↦ exp(-1/t)` for `t > 0`, else 0.
pub fn flat_exp(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smoothstep `S(t) = E(t)/(E(t)+E(1-t))`: 0 for `t ≤ 0`, 1 for `t ≥ 1`, flat at both ends.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = flat_exp(t);
        a / (a + flat_exp(1.0 - t))
    }
}

pub fn smoothstep_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        let (a, b) = (flat_exp(t), flat_exp(1.0 - t));
        let s = a + b;
        a * b * (1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t))) / (s * s)
    }
}

/// Transition profile of the mollified Hilbert kernel: `s(x)` rises from 0 at `1-1/M` to 1 at 1.
pub fn hilbert_ramp(x: f64, m: u32) -> f64 {
    smoothstep(m as f64 * (x - 1.0) + 1.0)
}

/// `1 - s(x)`, computed without cancellation.
pub fn hilbert_ramp_complement(x: f64, m: u32) -> f64 {
    smoothstep(-(m as f64) * (x - 1.0))
}

/// `d_m^j = 2^{j/m}`, exact when `m | j`.
pub fn lacunary(m: u32, j: i64) -> f64 {
    if j % m as i64 == 0 {
        2f64.powi((j / m as i64) as i32)
    } else {
        (j as f64 / m as f64).exp2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Zero,
    Bump { width: f64 },
    Plateau { m: u32 },
    Hilbert { m: u32 },
    Difference(Box<KernelSpec>, Box<KernelSpec>),
}

/// Real kernel `x ↦ base(x/ξ)/ξ` with support radius and derivative-sup metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    shape: Shape,
    scale: f64,
    alpha: Option<f64>,
    beta: f64,
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match &self.shape {
            Shape::Zero => "zero".to_string(),
            Shape::Bump { width } => format!("bump({width})"),
            Shape::Plateau { m } => format!("plateau({m})"),
            Shape::Hilbert { m } => format!("hilbert({m})"),
            Shape::Difference(a, b) => format!("diff({a},{b})"),
        };
        if self.scale == 1.0 {
            write!(f, "{base}")
        } else {
            write!(f, "dilate({base},{:e})", self.scale)
        }
    }
}

/// Canonical bump `exp(-1/(1-(x/w)²))` on `|x| < w`; `α = ceil(w)`.
pub fn bump_kernel(width: f64) -> Result<KernelSpec> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::BadParameter(format!("bump width {width} must be positive")));
    }
    Ok(KernelSpec::base(Shape::Bump { width }, Some(width.ceil()), width))
}

/// 1 on `[0,1]`, smoothstep flanks on `(-1/M, 0)` and `(1, 1+1/M)`, 0 elsewhere; `α = 2`.
pub fn plateau_kernel(m: u32) -> Result<KernelSpec> {
    if m < 2 {
        return Err(Error::BadParameter(format!("plateau kernel needs M ≥ 2, got {m}")));
    }
    Ok(KernelSpec::base(Shape::Plateau { m }, Some(2.0), 2.0))
}

/// Odd kernel: `1/x` for `|x| ≥ 1`, 0 for `|x| ≤ 1-1/M`, `s(x)/x` between.
pub fn hilbert_kernel(m: u32) -> Result<KernelSpec> {
    if m < 2 {
        return Err(Error::BadParameter(format!("Hilbert kernel needs M ≥ 2, got {m}")));
    }
    let k = KernelSpec::base(Shape::Hilbert { m }, None, 2.0);
    let n = (2.0 * BETA_SCAN_DENSITY) as usize;
    let peak = (0..=n).map(|i| k.eval(-1.0 + 2.0 * i as f64 / n as f64).abs()).fold(0.0, f64::max);
    if peak > 2.0 {
        return Err(Error::BadParameter(format!("Hilbert kernel exceeds 2 on [-1,1]: {peak}")));
    }
    Ok(k)
}

/// The zero kernel.
pub fn zero_kernel() -> KernelSpec {
    KernelSpec { shape: Shape::Zero, scale: 1.0, alpha: Some(0.0), beta: 0.0 }
}

/// `δ_ξ k`: `x ↦ k(x/ξ)/ξ`.
pub fn dilate(k: &KernelSpec, xi: f64) -> Result<KernelSpec> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::BadParameter(format!("dilation {xi} must be positive")));
    }
    Ok(KernelSpec { shape: k.shape.clone(), scale: k.scale * xi, alpha: k.alpha.map(|a| a * xi), beta: k.beta / (xi * xi) })
}

impl KernelSpec {
    fn base(shape: Shape, alpha: Option<f64>, scan_radius: f64) -> Self {
        let mut k = Self { shape, scale: 1.0, alpha, beta: 0.0 };
        let n = (2.0 * scan_radius * BETA_SCAN_DENSITY) as usize;
        let sup = (0..=n)
            .map(|i| k.derivative(-scan_radius + 2.0 * scan_radius * i as f64 / n as f64).abs())
            .fold(0.0, f64::max);
        k.beta = sup * SAFETY;
        k
    }

    /// `a - b`. Its derivative bound is `β_a + β_b`.
    pub fn difference(a: &KernelSpec, b: &KernelSpec) -> Self {
        let alpha = match (a.alpha, b.alpha, &a.shape, &b.shape) {
            (Some(x), Some(y), _, _) => Some(x.max(y)),
            // Two dilates of one Hilbert kernel agree beyond the larger scale.
            (None, None, Shape::Hilbert { m: p }, Shape::Hilbert { m: q }) if p == q => Some(a.scale.max(b.scale)),
            _ => None,
        };
        Self { shape: Shape::Difference(Box::new(a.clone()), Box::new(b.clone())), scale: 1.0, alpha, beta: a.beta + b.beta }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x / self.scale;
        let v = match &self.shape {
            Shape::Zero => 0.0,
            Shape::Bump { width } => {
                let t = u / width;
                if t.abs() < 1.0 {
                    (-1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            }
            Shape::Plateau { m } => {
                let mf = *m as f64;
                if (0.0..=1.0).contains(&u) {
                    1.0
                } else if u < 0.0 {
                    smoothstep(mf * u + 1.0)
                } else {
                    smoothstep(1.0 - mf * (u - 1.0))
                }
            }
            Shape::Hilbert { m } => {
                let a = u.abs();
                let v = if a >= 1.0 {
                    1.0 / a
                } else if a <= 1.0 - 1.0 / *m as f64 {
                    0.0
                } else {
                    hilbert_ramp(a, *m) / a
                };
                v.copysign(u)
            }
            Shape::Difference(a, b) => return a.eval(x) - b.eval(x),
        };
        v / self.scale
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let u = x / self.scale;
        let d = match &self.shape {
            Shape::Zero => 0.0,
            Shape::Bump { width } => {
                let t = u / width;
                if t.abs() < 1.0 {
                    let q = 1.0 - t * t;
                    (-1.0 / q).exp() * (-2.0 * t / (q * q)) / width
                } else {
                    0.0
                }
            }
            Shape::Plateau { m } => {
                let mf = *m as f64;
                if (0.0..=1.0).contains(&u) {
                    0.0
                } else if u < 0.0 {
                    mf * smoothstep_derivative(mf * u + 1.0)
                } else {
                    -mf * smoothstep_derivative(1.0 - mf * (u - 1.0))
                }
            }
            Shape::Hilbert { m } => {
                let a = u.abs();
                let mf = *m as f64;
                if a >= 1.0 {
                    -1.0 / (a * a)
                } else if a <= 1.0 - 1.0 / mf {
                    0.0
                } else {
                    let s = hilbert_ramp(a, *m);
                    let ds = mf * smoothstep_derivative(mf * (a - 1.0) + 1.0);
                    (ds * a - s) / (a * a)
                }
            }
            Shape::Difference(a, b) => return a.derivative(x) - b.derivative(x),
        };
        d / (self.scale * self.scale)
    }

    /// `α_K`: the kernel vanishes for `|x| > α_K`; `None` when not compactly supported.
    pub fn support_radius(&self) -> Option<f64> {
        self.alpha
    }

    /// `β_K ≥ sup |K'|`.
    pub fn derivative_sup(&self) -> f64 {
        self.beta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn parity(&self) -> Parity {
        match &self.shape {
            Shape::Zero | Shape::Bump { .. } => Parity::Even,
            Shape::Plateau { .. } => Parity::None,
            Shape::Hilbert { .. } => Parity::Odd,
            Shape::Difference(a, b) => match (a.parity(), b.parity()) {
                (p, q) if p == q => p,
                _ => Parity::None,
            },
        }
    }

    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        let mut out = match &self.shape {
            Shape::Zero | Shape::Difference(..) => vec![],
            Shape::Bump { width } => vec![("width", *width)],
            Shape::Plateau { m } | Shape::Hilbert { m } => vec![("M", *m as f64)],
        };
        out.push(("scale", self.scale));
        out
    }

    /// `M` for an undilated mollified Hilbert kernel.
    pub fn hilbert_order(&self) -> Option<u32> {
        match self.shape {
            Shape::Hilbert { m } if self.scale == 1.0 => Some(m),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.shape, Shape::Zero)
    }

    /// Points where the kernel changes formula (useful as quadrature breaks).
    pub fn knots(&self) -> Vec<f64> {
        let s = self.scale;
        match &self.shape {
            Shape::Zero => vec![],
            Shape::Bump { width } => vec![-width * s, 0.0, width * s],
            Shape::Plateau { m } => {
                let e = 1.0 / *m as f64;
                vec![-e * s, 0.0, s, (1.0 + e) * s]
            }
            Shape::Hilbert { m } => {
                let e = 1.0 - 1.0 / *m as f64;
                vec![-s, -e * s, e * s, s]
            }
            Shape::Difference(a, b) => {
                let mut k = a.knots();
                k.extend(b.knots());
                k
            }
        }
    }

    /// `∂ⁿ K̂(y)` with `K̂(y) = ∫ K(x) e^{-2πixy} dx`; `panels_per_unit` sets the quadrature resolution.
    pub fn fourier_derivative(&self, y: f64, n: u32, panels_per_unit: usize) -> C64 {
        let s = self.scale;
        let inner = match &self.shape {
            Shape::Zero => C64::new(0.0, 0.0),
            Shape::Difference(a, b) => {
                return a.fourier_derivative(y, n, panels_per_unit) - b.fourier_derivative(y, n, panels_per_unit)
            }
            Shape::Bump { .. } | Shape::Plateau { .. } => {
                let unit = KernelSpec { scale: 1.0, alpha: self.alpha.map(|a| a / s), ..self.clone() };
                let r = unit.alpha.unwrap_or(1.0);
                moment_transform(|x| unit.eval(x), -r, r, s * y, n, panels_per_unit)
            }
            Shape::Hilbert { .. } => {
                let unit = KernelSpec { scale: 1.0, ..self.clone() };
                let core = moment_transform(|x| unit.eval(x), -1.0, 1.0, s * y, n, panels_per_unit);
                core + hilbert_tail_derivative(s * y, n, panels_per_unit)
            }
        };
        inner * s.powi(n as i32)
    }
}

fn moment_transform(f: impl Fn(f64) -> f64, a: f64, b: f64, y: f64, n: u32, panels_per_unit: usize) -> C64 {
    let (xs, ws) = gauss_legendre(16);
    let panels = ((b - a) * (panels_per_unit as f64).max(4.0 * y.abs())).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let c = a + h * (p as f64 + 0.5);
        for (xi, wi) in xs.iter().zip(&ws) {
            let x = c + 0.5 * h * xi;
            let phase = C64::from_polar(1.0, -2.0 * PI * x * y);
            acc += C64::new(0.0, -2.0 * PI * x).powu(n) * phase * f(x) * (wi * 0.5 * h);
        }
    }
    acc
}

/// `∂ⁿ` of `∫_{|x|≥1} e^{-2πixy}/x dx`.
fn hilbert_tail_derivative(y: f64, n: u32, panels_per_unit: usize) -> C64 {
    if n == 0 {
        if y == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let v = -2.0 * y.signum() * (PI / 2.0 - sine_integral(2.0 * PI * y.abs()));
        return C64::new(0.0, v);
    }
    // The derivative of the tail is 2πi times the transform of the indicator of [-1, 1].
    moment_transform(|_| 1.0, -1.0, 1.0, y, n - 1, panels_per_unit) * C64::new(0.0, 2.0 * PI)
}

/// `Si(z) = ∫₀^z sin t / t dt`.
pub fn sine_integral(z: f64) -> f64 {
    if z < 0.0 {
        return -sine_integral(-z);
    }
    if z == 0.0 {
        return 0.0;
    }
    let q = Quadrature { tolerance: 1e-14, max_panel: 1.0, max_depth: 30 };
    let sinc = |t: f64| C64::new(if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0);
    q.integrate(sinc, 0.0, z, &[]).map(|v| v.value.re).unwrap_or(f64::NAN)
}

/// `δ_{d_m^j} base` for integer `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationFamily {
    pub base: KernelSpec,
    pub m: u32,
}

impl DilationFamily {
    pub fn new(base: KernelSpec, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::BadParameter("m must be positive".into()));
        }
        Ok(Self { base, m })
    }

    pub fn ratio(&self) -> f64 {
        (1.0 / self.m as f64).exp2()
    }

    pub fn member(&self, j: i64) -> KernelSpec {
        dilate(&self.base, lacunary(self.m, j)).expect("lacunary scale is positive")
    }

    /// `K_{j,m}` sampled on the integers inside its support.
    pub fn sampled(&self, j: i64) -> Result<DiscreteKernel> {
        DiscreteKernel::sampled(self.member(j))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum DiscreteKind {
    Averaging { m: u32 },
    TruncatedHilbert,
    Difference { m: u32 },
    Sampled(KernelSpec),
}

/// Integer kernel with finite support, evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    kind: DiscreteKind,
    scale: f64,
    support: (i64, i64),
}

/// `(𝔸, ℌ, 𝔇)` at scale `d = 2^{j/m}`:
/// `𝔸(n) = 𝔎(n/d)/d` and `ℌ(n) = 1/n` for `0 < |n| ≤ d`, `𝔇 = 𝔸 - ℌ`.
pub fn sample_discrete_family(big_m: u32, m: u32, j: i64) -> Result<(DiscreteKernel, DiscreteKernel, DiscreteKernel)> {
    if big_m < 2 || m == 0 || j < 1 {
        return Err(Error::BadParameter(format!("need M ≥ 2, m ≥ 1, j ≥ 1 (got {big_m}, {m}, {j})")));
    }
    let d = lacunary(m, j);
    let r = d.floor().min(SUPPORT_CAP as f64) as i64;
    let mk = |kind| DiscreteKernel { kind, scale: d, support: (-r, r) };
    Ok((mk(DiscreteKind::Averaging { m: big_m }), mk(DiscreteKind::TruncatedHilbert), mk(DiscreteKind::Difference { m: big_m })))
}

impl DiscreteKernel {
    /// `n ↦ 1/n` on `0 < |n| ≤ r`.
    pub fn truncated_hilbert(r: f64) -> Self {
        let k = r.floor() as i64;
        Self { kind: DiscreteKind::TruncatedHilbert, scale: r, support: (-k, k) }
    }

    /// `n ↦ K(n)` for a compactly supported kernel.
    pub fn sampled(k: KernelSpec) -> Result<Self> {
        let a = k.support_radius().ok_or_else(|| Error::BadParameter("sampling needs a compactly supported kernel".into()))?;
        let r = a.floor() as i64;
        Ok(Self { scale: k.scale(), kind: DiscreteKind::Sampled(k), support: (-r, r) })
    }

    /// The dilation `d` this kernel was built at.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn support(&self) -> (i64, i64) {
        self.support
    }

    pub fn value(&self, n: i64) -> f64 {
        if n < self.support.0 || n > self.support.1 {
            return 0.0;
        }
        let d = self.scale;
        match &self.kind {
            DiscreteKind::Averaging { m } => {
                let x = n as f64 / d;
                let a = x.abs();
                let v = if a >= 1.0 {
                    1.0 / a
                } else if a <= 1.0 - 1.0 / *m as f64 {
                    0.0
                } else {
                    hilbert_ramp(a, *m) / a
                };
                v.copysign(x) / d
            }
            DiscreteKind::TruncatedHilbert => {
                if n == 0 {
                    0.0
                } else {
                    1.0 / n as f64
                }
            }
            DiscreteKind::Difference { m } => {
                if n == 0 {
                    0.0
                } else {
                    -hilbert_ramp_complement(n.unsigned_abs() as f64 / d, *m) / n as f64
                }
            }
            DiscreteKind::Sampled(k) => k.eval(n as f64),
        }
    }

    /// `W(r) = Σ_{n ≡ r mod P} value(n)` for `r ∈ 0..P`.
    pub fn fold(&self, period: usize) -> Vec<f64> {
        if let DiscreteKind::Difference { m } = self.kind {
            if self.scale >= EM_THRESHOLD * (m as f64) * period as f64 {
                return fold_difference_tail(period);
            }
        }
        let p = period as i64;
        let mut w = vec![0.0; period];
        for n in self.support.0..=self.support.1 {
            w[n.rem_euclid(p) as usize] += self.value(n);
        }
        w
    }
}

/// Support radii are clamped here so window arithmetic cannot overflow; only folded sums reach it.
pub const SUPPORT_CAP: i64 = 1 << 60;

/// Scale (in units of `M·P`) above which the 𝔇 fold switches to the Euler-Maclaurin form.
pub const EM_THRESHOLD: f64 = 512.0;
const EM_HEAD: i64 = 32;
/// `B_{2k}` for `k = 1..=6`.
const BERNOULLI: [f64; 6] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0];

/// Folded 𝔇 weights when the transition band lies far beyond the period.
///
/// Each residue class is summed directly over its first `EM_HEAD` terms; the rest is an
/// Euler-Maclaurin tail of `1/n`. The tail integral and the band contribution are common to the
/// two classes `r` and `-r` and cancel in `W(r) = T(r) - T(P-r)`.
fn fold_difference_tail(period: usize) -> Vec<f64> {
    let p = period as i64;
    let pf = period as f64;
    let partial = |c: i64| -> f64 {
        let mut head = 0.0;
        for q in (0..EM_HEAD).rev() {
            head += 1.0 / (c + q * p) as f64;
        }
        let n0 = (c + EM_HEAD * p) as f64;
        let mut tail = -n0.ln() / pf + 0.5 / n0;
        let mut pw = 1.0 / (n0 * n0);
        for (k, b) in BERNOULLI.iter().enumerate() {
            let kk = 2.0 * (k as f64 + 1.0);
            tail += b / kk * pf.powi(2 * k as i32 + 1) * pw;
            pw /= n0 * n0;
        }
        -(head + tail)
    };
    (0..p)
        .map(|r| if r == 0 { 0.0 } else { partial(r) - partial(p - r) })
        .collect()
}

/// Fourier smoke-check resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierGrid {
    pub y_max: f64,
    pub y_count: usize,
    pub panels_per_unit: usize,
}

impl Default for FourierGrid {
    fn default() -> Self {
        Self { y_max: 32.0, y_count: 512, panels_per_unit: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierReport {
    /// `sup |K̂(y)|·max(1,|y|)`.
    pub weighted_sup: f64,
    /// `sup |∂ⁿK̂(y)|·max(|y|^{n-1},|y|^{n+1})` for `n = 1..=orders`.
    pub derivative_sups: Vec<f64>,
    /// The same quantities at doubled resolution.
    pub refined_weighted_sup: f64,
    pub refined_derivative_sups: Vec<f64>,
    /// Largest relative change between the two resolutions.
    pub refinement_change: f64,
    /// Set when some weighted quantity peaks in the outer tenth of the frequency range.
    pub growing_tail: bool,
}

/// Numerical smoke check of the Fourier decay hypotheses on a symmetric frequency grid.
pub fn fourier_condition_check(k: &KernelSpec, derivative_orders: u32, grid: FourierGrid) -> FourierReport {
    let coarse = fourier_sups(k, derivative_orders, grid);
    let fine_grid = FourierGrid { y_count: grid.y_count * 2, panels_per_unit: grid.panels_per_unit * 2, ..grid };
    let fine = fourier_sups(k, derivative_orders, fine_grid);
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let mut change = rel(coarse.0, fine.0);
    for (a, b) in coarse.1.iter().zip(&fine.1) {
        change = change.max(rel(*a, *b));
    }
    FourierReport {
        weighted_sup: coarse.0,
        derivative_sups: coarse.1,
        refined_weighted_sup: fine.0,
        refined_derivative_sups: fine.1,
        refinement_change: change,
        growing_tail: coarse.2 || fine.2,
    }
}

fn fourier_sups(k: &KernelSpec, orders: u32, grid: FourierGrid) -> (f64, Vec<f64>, bool) {
    let ys: Vec<f64> = (0..grid.y_count)
        .map(|i| -grid.y_max + 2.0 * grid.y_max * (i as f64 + 0.5) / grid.y_count as f64)
        .collect();
    let outer = 0.9 * grid.y_max;
    let mut growing = false;
    let mut sups = Vec::new();
    for n in 0..=orders {
        let (mut inner_sup, mut outer_sup) = (0.0f64, 0.0f64);
        for &y in &ys {
            let a = y.abs();
            let weight = if n == 0 { a.max(1.0) } else { a.powi(n as i32 - 1).max(a.powi(n as i32 + 1)) };
            let v = k.fourier_derivative(y, n, grid.panels_per_unit).norm() * weight;
            if a > outer {
                outer_sup = outer_sup.max(v);
            } else {
                inner_sup = inner_sup.max(v);
            }
        }
        growing |= outer_sup > inner_sup && outer_sup > 1e-12;
        sups.push(inner_sup.max(outer_sup));
    }
    let first = sups.remove(0);
    (first, sups, growing)
}
