//! Sampled functions on the periodic grid [−L, L)ⁿ, their spectra, dyadic
//! dilation, and the test families used by the audits.
//!
//! Spectral coefficients approximate the continuous transform
//! f̂(ξ) = ∫ f(x) e^{−ix·ξ} dx at ξ = k·π/L, so that the inverse reads
//! f(x) = (2L)^{−n} Σ_k f̂(ξ_k) e^{ix·ξ_k}.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{format_rational, parse_rational, rat, rational_serde, rational_to_f64, Rational};

pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;
const MAX_DYADIC_SHIFT: i32 = 60;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Geometry {
    pub n: usize,
    pub points: usize,
    #[serde(with = "rational_serde")]
    pub half_period: Rational,
}

impl Geometry {
    pub fn new(n: usize, points: usize, half_period: Rational) -> Result<Self> {
        let g = Geometry {
            n,
            points,
            half_period,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn desk(n: usize) -> Self {
        match n {
            1 => Geometry::new(1, 1 << 14, rat(64, 1)).unwrap(),
            _ => Geometry::new(2, 512, rat(32, 1)).unwrap(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::InvalidGeometry(format!("dimension {} is not 1 or 2", self.n)));
        }
        if self.points < 2 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGeometry(format!(
                "{} points per axis is not a power of two >= 2",
                self.points
            )));
        }
        if !self.half_period.is_positive() {
            return Err(Error::InvalidGeometry("half period must be positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_period_f64(&self) -> f64 {
        rational_to_f64(&self.half_period)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_period_f64() / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.n as i32)
    }

    pub fn total_measure(&self) -> f64 {
        (2.0 * self.half_period_f64()).powi(self.n as i32)
    }

    /// Frequency spacing π/L.
    pub fn freq_step(&self) -> f64 {
        PI / self.half_period_f64()
    }

    /// Volume element for Parseval on the spectral side, (Δξ/2π)ⁿ = (2L)^{−n}.
    pub fn freq_cell_volume(&self) -> f64 {
        (2.0 * self.half_period_f64()).powi(-(self.n as i32))
    }

    pub fn nyquist(&self) -> f64 {
        (self.points / 2) as f64 * self.freq_step()
    }

    pub fn max_abs_freq(&self) -> f64 {
        self.nyquist() * (self.n as f64).sqrt()
    }

    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.points / 2 {
            i as i64
        } else {
            i as i64 - self.points as i64
        }
    }

    pub fn axis_indices(&self, flat: usize) -> [usize; 2] {
        if self.n == 1 {
            [flat, 0]
        } else {
            [flat / self.points, flat % self.points]
        }
    }

    pub fn frequency_vector(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(flat);
        let step = self.freq_step();
        if self.n == 1 {
            [self.signed_index(a) as f64 * step, 0.0]
        } else {
            [
                self.signed_index(a) as f64 * step,
                self.signed_index(b) as f64 * step,
            ]
        }
    }

    pub fn abs_frequency(&self, flat: usize) -> f64 {
        let [a, b] = self.frequency_vector(flat);
        a.hypot(b)
    }

    pub fn coordinate(&self, flat: usize) -> [f64; 2] {
        let [a, b] = self.axis_indices(flat);
        let h = self.spacing();
        let l = self.half_period_f64();
        if self.n == 1 {
            [-l + a as f64 * h, 0.0]
        } else {
            [-l + a as f64 * h, -l + b as f64 * h]
        }
    }

    /// Geometry of f(2^k ·): the same samples over a box scaled by 2^{−k}.
    pub fn rescaled(&self, k: i32) -> Result<Self> {
        if k.abs() > MAX_DYADIC_SHIFT {
            return Err(Error::DomainOverflow {
                k,
                reason: format!("|k| exceeds {MAX_DYADIC_SHIFT}"),
            });
        }
        let factor = Rational::from_integer(BigInt::one() << k.unsigned_abs());
        let half_period = if k >= 0 {
            &self.half_period / factor
        } else {
            &self.half_period * factor
        };
        Ok(Geometry {
            half_period,
            ..self.clone()
        })
    }

    pub fn describe(&self) -> String {
        format!(
            "n={} N={} L={}",
            self.n,
            self.points,
            format_rational(&self.half_period)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub geometry: Geometry,
    pub samples: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    pub geometry: Geometry,
    pub coeffs: Vec<Complex64>,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized n-dimensional DFT in place (row-major for n = 2).
fn dft_in_place(data: &mut [Complex64], n: usize, points: usize, inverse: bool) {
    let fft = plan(points, inverse);
    if n == 1 {
        fft.process(data);
        return;
    }
    fft.process(data);
    let mut column = vec![Complex64::zero(); points];
    for c in 0..points {
        for r in 0..points {
            column[r] = data[r * points + c];
        }
        fft.process(&mut column);
        for r in 0..points {
            data[r * points + c] = column[r];
        }
    }
}

fn checkerboard_sign(g: &Geometry, flat: usize) -> f64 {
    let [a, b] = g.axis_indices(flat);
    if (a + b) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SampledFunction {
    pub fn new(geometry: Geometry, samples: Vec<Complex64>) -> Result<Self> {
        geometry.validate()?;
        if samples.len() != geometry.len() {
            return Err(Error::InvalidGeometry(format!(
                "{} samples for a grid of {} points",
                samples.len(),
                geometry.len()
            )));
        }
        Ok(Self { geometry, samples })
    }

    pub fn zeros(geometry: Geometry) -> Self {
        let len = geometry.len();
        Self {
            geometry,
            samples: vec![Complex64::zero(); len],
        }
    }

    pub fn from_fn(geometry: Geometry, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let samples = (0..geometry.len()).map(|i| f(geometry.coordinate(i))).collect();
        Self { geometry, samples }
    }

    pub fn from_real_fn(geometry: Geometry, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(geometry, |x| Complex64::new(f(x), 0.0))
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.geometry.cell_volume()).sqrt()
    }

    pub fn mean(&self) -> Complex64 {
        self.samples.iter().sum::<Complex64>() / self.samples.len() as f64
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            geometry: self.geometry.clone(),
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn combine(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.geometry != other.geometry {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            geometry: self.geometry.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn to_spectral(&self) -> SpectralFunction {
        let g = &self.geometry;
        let mut data = self.samples.clone();
        dft_in_place(&mut data, g.n, g.points, false);
        let scale = g.cell_volume();
        for (i, z) in data.iter_mut().enumerate() {
            *z *= scale * checkerboard_sign(g, i);
        }
        SpectralFunction {
            geometry: g.clone(),
            coeffs: data,
        }
    }

    /// Largest |f| on the outer 1/32 of each axis, relative to the peak of |f|.
    pub fn tail_defect(&self) -> f64 {
        let peak = self.sup_norm();
        if peak == 0.0 {
            return 0.0;
        }
        let g = &self.geometry;
        let width = (g.points / 32).max(1);
        let in_layer = |i: usize| i < width || i >= g.points - width;
        let mut edge = 0.0f64;
        for (flat, z) in self.samples.iter().enumerate() {
            let [a, b] = g.axis_indices(flat);
            if in_layer(a) || (g.n == 2 && in_layer(b)) {
                edge = edge.max(z.norm());
            }
        }
        edge / peak
    }
}

impl SpectralFunction {
    pub fn from_symbol(geometry: Geometry, symbol: impl Fn([f64; 2]) -> Complex64) -> Self {
        let coeffs = (0..geometry.len())
            .map(|i| symbol(geometry.frequency_vector(i)))
            .collect();
        Self { geometry, coeffs }
    }

    pub fn to_physical(&self) -> SampledFunction {
        let g = &self.geometry;
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, z)| z * checkerboard_sign(g, i))
            .collect();
        dft_in_place(&mut data, g.n, g.points, true);
        let scale = g.freq_cell_volume();
        for z in data.iter_mut() {
            *z *= scale;
        }
        SampledFunction {
            geometry: g.clone(),
            samples: data,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.geometry.freq_cell_volume()).sqrt()
    }

    pub fn map_symbol(&self, m: impl Fn([f64; 2]) -> Complex64) -> Self {
        let g = &self.geometry;
        Self {
            geometry: g.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, z)| z * m(g.frequency_vector(i)))
                .collect(),
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }
}

/// f(2^k ·) as an exact change of geometry: the samples are kept and the box
/// [−L, L)ⁿ becomes [−2^{−k}L, 2^{−k}L)ⁿ. Cell volumes scale by 2^{−kn} and
/// frequencies by 2^k, so every measure and multiplier identity is exact.
pub fn dilate_pow2(f: &SampledFunction, k: i32) -> Result<SampledFunction> {
    Ok(SampledFunction {
        geometry: f.geometry.rescaled(k)?,
        samples: f.samples.clone(),
    })
}

/// f(2^k ·) on the same box, reading f as the cell-wise constant function of
/// its samples. Expansion (k < 0) replicates cells and needs f to vanish
/// outside the central 2^{k} fraction of the box; compression (k > 0) needs f
/// constant on aligned blocks of 2^k cells.
pub fn dilate_pow2_in_place(f: &SampledFunction, k: i32, tol: f64) -> Result<SampledFunction> {
    let g = &f.geometry;
    if k == 0 {
        return Ok(f.clone());
    }
    let m = 1usize
        .checked_shl(k.unsigned_abs())
        .filter(|&m| m <= g.points / 2)
        .ok_or_else(|| Error::DomainOverflow {
            k,
            reason: "dilation factor exceeds half the grid".into(),
        })?;
    let c = (g.points / 2) as i64;
    let peak = f.sup_norm();
    let axis_len = if g.n == 1 { 1 } else { g.points };
    let flat = |a: usize, b: usize| a * axis_len + b;
    let mut out = vec![Complex64::zero(); g.len()];
    let axes_b = if g.n == 1 { 1 } else { g.points };

    if k < 0 {
        let lo = c - (g.points / (2 * m)) as i64;
        let hi = c + (g.points / (2 * m)) as i64;
        let inside = |i: usize| (lo..hi).contains(&(i as i64));
        for a in 0..g.points {
            for b in 0..axes_b {
                if !(inside(a) && (g.n == 1 || inside(b))) && f.samples[flat(a, b)].norm() > tol * peak {
                    return Err(Error::DomainOverflow {
                        k,
                        reason: "expanded support would leave the box".into(),
                    });
                }
            }
        }
        let src = |i: usize| (c + (i as i64 - c).div_euclid(m as i64)) as usize;
        for a in 0..g.points {
            for b in 0..axes_b {
                let sb = if g.n == 1 { 0 } else { src(b) };
                out[flat(a, b)] = f.samples[flat(src(a), sb)];
            }
        }
    } else {
        let block = |i: usize| (i as i64 - c).div_euclid(m as i64);
        for a in 0..g.points {
            for b in 0..axes_b {
                let a0 = (c + block(a) * m as i64) as usize;
                let b0 = if g.n == 1 { 0 } else { (c + block(b) * m as i64) as usize };
                if (f.samples[flat(a, b)] - f.samples[flat(a0, b0)]).norm() > tol * peak {
                    return Err(Error::DomainOverflow {
                        k,
                        reason: "input is not constant on aligned blocks, compression would alias".into(),
                    });
                }
            }
        }
        let src = |i: usize| c + (i as i64 - c) * m as i64;
        let valid = |v: i64| (0..g.points as i64).contains(&v);
        for a in 0..g.points {
            for b in 0..axes_b {
                let sa = src(a);
                let sb = if g.n == 1 { 0 } else { src(b) };
                if valid(sa) && valid(sb) {
                    out[flat(a, b)] = f.samples[flat(sa as usize, sb as usize)];
                }
            }
        }
    }
    Ok(SampledFunction {
        geometry: g.clone(),
        samples: out,
    })
}

/// The canonical bump exp(1 − 1/(1 − t²)) on |t| < 1, equal to 1 at t = 0.
pub fn canonical_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Spectral support of the annulus family: 49/64 ≤ |ξ| ≤ 63/64.
pub const ANNULUS_INNER: (i64, i64) = (49, 64);
pub const ANNULUS_OUTER: (i64, i64) = (63, 64);

pub fn annulus_geometry() -> Geometry {
    Geometry::new(1, 1 << 16, rat(4096, 1)).unwrap()
}

/// A Schwartz function whose transform is a smooth radial bump on the annulus
/// a ≤ |ξ| ≤ b; a single Littlewood–Paley block for the telescoping families.
pub fn annulus_function(geometry: Geometry, a: f64, b: f64) -> SampledFunction {
    let c = 0.5 * (a + b);
    let w = 0.5 * (b - a);
    SpectralFunction::from_symbol(geometry, |xi| {
        Complex64::new(canonical_bump((xi[0].hypot(xi[1]) - c) / w), 0.0)
    })
    .to_physical()
}

pub fn default_annulus_function(geometry: Geometry) -> SampledFunction {
    let (a0, a1) = ANNULUS_INNER;
    let (b0, b1) = ANNULUS_OUTER;
    annulus_function(geometry, a0 as f64 / a1 as f64, b0 as f64 / b1 as f64)
}

pub fn modulation_geometry() -> Geometry {
    Geometry::new(1, 1 << 18, rat(4096, 1)).unwrap()
}

fn check_eps(eps: &Rational) -> Result<f64> {
    if !eps.is_positive() || *eps >= rat(1, 10) {
        return Err(Error::DegenerateInput(format!(
            "bump radius {} must lie in (0, 1/10)",
            format_rational(eps)
        )));
    }
    Ok(rational_to_f64(eps))
}

/// f̂(ξ) = Σ_k a_k ψ(ξ − 2^k e₁), k = 1..a.len(), with ψ the canonical bump of radius ε.
pub fn modulated_bump(geometry: Geometry, a: &[Complex64], eps: &Rational) -> Result<SampledFunction> {
    let e = check_eps(eps)?;
    let top = a.len() as i32;
    if top > 0 && (2f64.powi(top) + e) >= geometry.nyquist() {
        return Err(Error::DomainOverflow {
            k: top,
            reason: format!(
                "shift 2^{top} plus bump radius exceeds the Nyquist frequency {}",
                geometry.nyquist()
            ),
        });
    }
    let spec = SpectralFunction::from_symbol(geometry, |xi| {
        let mut acc = Complex64::zero();
        for (idx, ak) in a.iter().enumerate() {
            let shift = 2f64.powi(idx as i32 + 1);
            let d = (xi[0] - shift).hypot(xi[1]);
            if d < e {
                acc += ak * canonical_bump(d / e);
            }
        }
        acc
    });
    Ok(spec.to_physical())
}

/// The inverse transform ψ^∨ of the unshifted bump of radius ε.
pub fn bump_inverse(geometry: Geometry, eps: &Rational) -> Result<SampledFunction> {
    let e = check_eps(eps)?;
    Ok(SpectralFunction::from_symbol(geometry, |xi| {
        Complex64::new(canonical_bump(xi[0].hypot(xi[1]) / e), 0.0)
    })
    .to_physical())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSpec {
    pub family: String,
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    1
}

impl BankSpec {
    pub fn new(family: &str, count: usize, seed: u64, n: usize) -> Self {
        Self {
            family: family.to_string(),
            count,
            seed,
            geometry: None,
            n,
        }
    }

    pub fn resolved_geometry(&self) -> Geometry {
        match (&self.geometry, self.family.as_str()) {
            (Some(g), _) => g.clone(),
            (None, "remark31") if self.n == 1 => annulus_geometry(),
            _ => Geometry::desk(self.n),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Bank {
    pub spec: BankSpec,
    pub members: Vec<SampledFunction>,
}

pub const BANK_FAMILIES: [&str; 4] = ["gaussian-orbit", "random-bandlimited", "indicator-sums", "remark31"];

pub fn function_bank(spec: &BankSpec) -> Result<Bank> {
    let g = spec.resolved_geometry();
    g.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let members: Vec<SampledFunction> = match spec.family.as_str() {
        "gaussian-orbit" => (0..spec.count)
            .map(|k| {
                let sigma = 2f64.powi(k as i32 - (spec.count as i32) / 2);
                SampledFunction::from_real_fn(g.clone(), |x| {
                    (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * sigma * sigma)).exp()
                })
            })
            .collect(),
        "random-bandlimited" => (0..spec.count)
            .map(|_| random_packet_sum(&g, &mut rng))
            .collect(),
        "indicator-sums" => (0..spec.count)
            .map(|_| random_indicator_sum(&g, &mut rng))
            .collect(),
        "remark31" => {
            let f0 = default_annulus_function(g.clone());
            (0..spec.count)
                .map(|k| dilate_pow2(&f0, k as i32))
                .collect::<Result<_>>()?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown bank family {other:?}; expected one of {BANK_FAMILIES:?}"
            )))
        }
    };
    for m in &members {
        let t = m.tail_defect();
        if t > DEFAULT_TAIL_TOLERANCE {
            return Err(Error::UnresolvedTail { leakage: t });
        }
    }
    Ok(Bank {
        spec: spec.clone(),
        members,
    })
}

/// A sum of one to three Gaussian wave packets centred in the inner eighth of
/// the box; numerically band-limited well below Nyquist on the desk grids.
fn random_packet_sum(g: &Geometry, rng: &mut ChaCha8Rng) -> SampledFunction {
    let l = g.half_period_f64();
    let count = rng.gen_range(1..=3);
    let packets: Vec<([f64; 2], f64, [f64; 2], Complex64)> = (0..count)
        .map(|_| {
            let mut centre = [0.0; 2];
            let mut freq = [0.0; 2];
            for d in 0..g.n {
                centre[d] = rng.gen_range(-l / 8.0..l / 8.0);
                freq[d] = rng.gen_range(-4.0..4.0);
            }
            let sigma = 2f64.powf(rng.gen_range(-1.0..1.0));
            let amp = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
            (centre, sigma, freq, amp)
        })
        .collect();
    SampledFunction::from_fn(g.clone(), |x| {
        packets
            .iter()
            .map(|(c, sigma, w, amp)| {
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                let phase = w[0] * x[0] + w[1] * x[1];
                amp * Complex64::from_polar((-d2 / (2.0 * sigma * sigma)).exp(), phase)
            })
            .sum()
    })
}

/// Integer-valued sums of one to four cell-aligned boxes inside the central half.
fn random_indicator_sum(g: &Geometry, rng: &mut ChaCha8Rng) -> SampledFunction {
    let lo = g.points / 4;
    let hi = 3 * g.points / 4;
    let boxes: Vec<([usize; 2], [usize; 2], f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let mut start = [0usize; 2];
            let mut end = [1usize; 2];
            for d in 0..g.n {
                let a = rng.gen_range(lo..hi);
                let b = rng.gen_range(lo..hi);
                start[d] = a.min(b);
                end[d] = a.max(b) + 1;
            }
            (start, end, rng.gen_range(1..=5) as f64)
        })
        .collect();
    let mut out = SampledFunction::zeros(g.clone());
    for (flat, z) in out.samples.iter_mut().enumerate() {
        let idx = g.axis_indices(flat);
        for (s, e, h) in &boxes {
            if (0..g.n).all(|d| idx[d] >= s[d] && idx[d] < e[d]) {
                *z += Complex64::new(*h, 0.0);
            }
        }
    }
    out
}

const MAGIC: &[u8; 4] = b"LLSF";

/// Binary container: magic, then n, N and L as length-prefixed rational strings,
/// then the samples as little-endian (re, im) pairs of 64-bit floats.
pub fn write_binary(f: &SampledFunction, mut w: impl Write) -> Result<()> {
    w.write_all(MAGIC)?;
    let g = &f.geometry;
    for field in [g.n.to_string(), g.points.to_string(), format_rational(&g.half_period)] {
        w.write_all(&(field.len() as u32).to_le_bytes())?;
        w.write_all(field.as_bytes())?;
    }
    for z in &f.samples {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<SampledFunction> {
    let bad = |m: &str| Error::Parse {
        what: "function container",
        input: m.to_string(),
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut fields = Vec::with_capacity(3);
    for _ in 0..3 {
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let len = u32::from_le_bytes(len) as usize;
        if len > 4096 {
            return Err(bad("header field too long"));
        }
        let mut buf = vec![0u8; len];
        r.read_exact(&mut buf)?;
        fields.push(String::from_utf8(buf).map_err(|_| bad("header is not utf-8"))?);
    }
    let as_usize = |s: &str| {
        parse_rational(s)?
            .to_integer()
            .to_usize()
            .ok_or_else(|| bad("header integer out of range"))
    };
    let geometry = Geometry::new(as_usize(&fields[0])?, as_usize(&fields[1])?, parse_rational(&fields[2])?)?;
    let mut samples = Vec::with_capacity(geometry.len());
    let mut buf = [0u8; 16];
    for _ in 0..geometry.len() {
        r.read_exact(&mut buf)?;
        let re = f64::from_le_bytes(buf[..8].try_into().unwrap());
        let im = f64::from_le_bytes(buf[8..].try_into().unwrap());
        samples.push(Complex64::new(re, im));
    }
    SampledFunction::new(geometry, samples)
}

pub const CSV_MAX_POINTS: usize = 1 << 16;

/// CSV with columns x[, y], re, im; the geometry is recorded in a leading comment row.
pub fn write_csv(f: &SampledFunction, w: impl Write) -> Result<()> {
    if f.geometry.len() > CSV_MAX_POINTS {
        return Err(Error::Config(format!(
            "CSV export is limited to {CSV_MAX_POINTS} points, use the binary container"
        )));
    }
    let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
    let g = &f.geometry;
    wr.write_record(["# n", &g.n.to_string(), "N", &g.points.to_string(), "L", &format_rational(&g.half_period)])?;
    if g.n == 1 {
        wr.write_record(["x", "re", "im"])?;
    } else {
        wr.write_record(["x", "y", "re", "im"])?;
    }
    for (i, z) in f.samples.iter().enumerate() {
        let x = g.coordinate(i);
        let mut rec = vec![format!("{:e}", x[0])];
        if g.n == 2 {
            rec.push(format!("{:e}", x[1]));
        }
        rec.push(format!("{:e}", z.re));
        rec.push(format!("{:e}", z.im));
        wr.write_record(&rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<SampledFunction> {
    let bad = |m: &str| Error::Parse {
        what: "function csv",
        input: m.to_string(),
    };
    let mut rd = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(r);
    let mut records = rd.records();
    let head = records.next().ok_or_else(|| bad("empty file"))??;
    if head.len() < 6 || &head[0] != "# n" {
        return Err(bad("missing geometry row"));
    }
    let n: usize = head[1].parse().map_err(|_| bad("n"))?;
    let points: usize = head[3].parse().map_err(|_| bad("N"))?;
    let geometry = Geometry::new(n, points, parse_rational(&head[5])?)?;
    records.next().ok_or_else(|| bad("missing column header"))??;
    let mut samples = Vec::with_capacity(geometry.len());
    for rec in records {
        let rec = rec?;
        let k = rec.len();
        if k < 2 {
            return Err(bad("short row"));
        }
        let re: f64 = rec[k - 2].parse().map_err(|_| bad("re"))?;
        let im: f64 = rec[k - 1].parse().map_err(|_| bad("im"))?;
        samples.push(Complex64::new(re, im));
    }
    SampledFunction::new(geometry, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn small(n: usize) -> Geometry {
        Geometry::new(n, if n == 1 { 64 } else { 16 }, rat(8, 1)).unwrap()
    }

    fn random_function(g: &Geometry, seed: u64) -> SampledFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..g.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SampledFunction::new(g.clone(), samples).unwrap()
    }

    fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn constant_has_single_zero_mode() {
        for n in [1, 2] {
            let g = small(n);
            let f = SampledFunction::from_real_fn(g.clone(), |_| 1.0);
            let c = f.to_spectral();
            assert!((c.coeffs[0].re - g.total_measure()).abs() < 1e-9);
            assert!(c.coeffs[1..].iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn pure_exponential_sits_at_k_one() {
        let g = small(1);
        let l = g.half_period_f64();
        let f = SampledFunction::from_fn(g.clone(), |x| Complex64::from_polar(1.0, PI * x[0] / l));
        let c = f.to_spectral();
        for (i, z) in c.coeffs.iter().enumerate() {
            if i == 1 {
                assert!((z.norm() - g.total_measure()).abs() < 1e-9);
            } else {
                assert!(z.norm() < 1e-9, "index {i}: {z}");
            }
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        for n in [1, 2] {
            let g = small(n);
            let f = random_function(&g, 7 + n as u64);
            let c = f.to_spectral();
            assert!((f.l2_norm() - c.l2_norm()).abs() <= 1e-12 * f.l2_norm());
            let back = c.to_physical();
            assert!(rel_diff(&back.samples, &f.samples) < 1e-12);
        }
    }

    #[test]
    fn transform_is_linear() {
        let g = small(2);
        let f = random_function(&g, 1);
        let h = random_function(&g, 2);
        let (a, b) = (Complex64::new(0.5, -2.0), Complex64::new(-1.25, 0.75));
        let lhs = f.combine(&h, |x, y| a * x + b * y).unwrap().to_spectral();
        let (cf, ch) = (f.to_spectral(), h.to_spectral());
        let rhs: Vec<Complex64> = cf.coeffs.iter().zip(&ch.coeffs).map(|(x, y)| a * x + b * y).collect();
        assert!(rel_diff(&lhs.coeffs, &rhs) < 1e-12);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = Geometry::new(1, 512, rat(16, 1)).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] / 2.0).exp());
        let c = f.to_spectral();
        for i in 0..g.points {
            let xi = g.frequency_vector(i)[0];
            let exact = (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp();
            assert!((c.coeffs[i].re - exact).abs() < 1e-12, "{i}");
        }
    }

    #[test]
    fn rescaled_dilation_is_a_bijection() {
        let g = small(2);
        let f = random_function(&g, 3);
        for k in -4..=4 {
            let d = dilate_pow2(&f, k).unwrap();
            assert_eq!(d.geometry.half_period_f64(), g.half_period_f64() * 2f64.powi(-k));
            assert_eq!(dilate_pow2(&d, -k).unwrap(), f);
        }
        assert!(dilate_pow2(&f, 100).is_err());
    }

    #[test]
    fn in_place_dilation_of_indicator() {
        let g = Geometry::new(1, 64, rat(16, 1)).unwrap();
        let h = g.spacing();
        let ind = |a: f64, b: f64| SampledFunction::from_real_fn(g.clone(), move |x| if x[0] >= a - 1e-12 && x[0] < b - 1e-12 { 1.0 } else { 0.0 });
        let f = ind(0.0, 1.0);
        let d = dilate_pow2_in_place(&f, -1, 0.0).unwrap();
        assert_eq!(d, ind(0.0, 2.0));
        let count = |f: &SampledFunction| f.samples.iter().filter(|z| z.re != 0.0).count() as f64 * h;
        assert_eq!(count(&d), 2.0 * count(&f));
        assert_eq!(dilate_pow2_in_place(&d, 1, 0.0).unwrap(), f);
        assert_eq!(dilate_pow2_in_place(&f, 0, 0.0).unwrap(), f);
    }

    #[test]
    fn in_place_dilation_rejects_overflow_and_aliasing() {
        let g = Geometry::new(1, 64, rat(16, 1)).unwrap();
        let wide = SampledFunction::from_real_fn(g.clone(), |x| if x[0].abs() < 12.0 { 1.0 } else { 0.0 });
        assert!(matches!(dilate_pow2_in_place(&wide, -1, 0.0), Err(Error::DomainOverflow { .. })));
        let rough = random_function(&g, 5);
        assert!(matches!(dilate_pow2_in_place(&rough, 1, 0.0), Err(Error::DomainOverflow { .. })));
    }

    #[test]
    fn in_place_round_trip_two_dimensions() {
        let g = Geometry::new(2, 32, rat(8, 1)).unwrap();
        let centred = SampledFunction::from_fn(g.clone(), |x| {
            if x[0].abs() < 1.9 && x[1].abs() < 1.9 {
                Complex64::new(1.0 + x[0], x[1])
            } else {
                Complex64::zero()
            }
        });
        for k in 1..=2 {
            let e = dilate_pow2_in_place(&centred, -k, 0.0).unwrap();
            assert_eq!(dilate_pow2_in_place(&e, k, 0.0).unwrap(), centred);
        }
    }

    #[test]
    fn annulus_function_support() {
        let g = Geometry::new(1, 4096, rat(256, 1)).unwrap();
        let f = default_annulus_function(g.clone());
        let c = f.to_spectral();
        let peak = c.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, z) in c.coeffs.iter().enumerate() {
            let r = g.abs_frequency(i);
            if !(0.75..1.0).contains(&r) {
                assert!(z.norm() <= 1e-12 * peak, "coefficient at |xi|={r}");
            }
        }
        assert!(f.samples.iter().all(|z| z.im.abs() < 1e-12 * f.sup_norm()));
    }

    #[test]
    fn modulated_bump_examples() {
        let g = Geometry::new(1, 1 << 15, rat(4096, 1)).unwrap();
        let eps = rat(3, 32);
        let zero = modulated_bump(g.clone(), &[Complex64::zero(); 3], &eps).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
        let single = modulated_bump(g.clone(), &[Complex64::new(1.0, 0.0)], &eps).unwrap();
        let psi = bump_inverse(g.clone(), &eps).unwrap();
        let peak = psi.sup_norm();
        for (a, b) in single.samples.iter().zip(&psi.samples) {
            assert!((a.norm() - b.norm()).abs() < 1e-6 * peak);
        }
        let spec = modulated_bump(g.clone(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)], &eps)
            .unwrap()
            .to_spectral();
        let top = spec.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, z) in spec.coeffs.iter().enumerate() {
            let xi = g.frequency_vector(i)[0];
            if (xi - 2.0).abs() >= 3.0 / 32.0 && (xi - 4.0).abs() >= 3.0 / 32.0 {
                assert!(z.norm() <= 1e-12 * top);
            }
        }
        assert!(modulated_bump(g.clone(), &[Complex64::new(1.0, 0.0)], &rat(1, 10)).is_err());
        let many = vec![Complex64::new(1.0, 0.0); 10];
        assert!(matches!(modulated_bump(g, &many, &eps), Err(Error::DomainOverflow { .. })));
    }

    #[test]
    fn banks_are_reproducible_and_tail_clean() {
        for n in [1, 2] {
            for fam in ["gaussian-orbit", "random-bandlimited", "indicator-sums"] {
                let spec = BankSpec::new(fam, 5, 42, n);
                let a = function_bank(&spec).unwrap();
                let b = function_bank(&spec).unwrap();
                assert_eq!(a.members.len(), 5);
                for (x, y) in a.members.iter().zip(&b.members) {
                    let bits = |f: &SampledFunction| f.samples.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
                    assert_eq!(bits(x), bits(y));
                    assert!(x.tail_defect() <= DEFAULT_TAIL_TOLERANCE);
                }
            }
        }
        assert!(function_bank(&BankSpec::new("nope", 1, 0, 1)).is_err());
    }

    #[test]
    fn remark_bank_member_is_tail_clean() {
        let bank = function_bank(&BankSpec::new("remark31", 1, 0, 1)).unwrap();
        assert_eq!(bank.members.len(), 1);
        assert!(bank.members[0].tail_defect() < DEFAULT_TAIL_TOLERANCE);
    }

    #[test]
    fn binary_and_csv_round_trip() {
        let g = small(2);
        let f = random_function(&g, 9);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(read_binary(&buf[..]).unwrap(), f);
        let mut csv_buf = Vec::new();
        write_csv(&f, &mut csv_buf).unwrap();
        let back = read_csv(&csv_buf[..]).unwrap();
        assert_eq!(back.geometry, f.geometry);
        assert!(rel_diff(&back.samples, &f.samples) < 1e-14);
        assert!(read_binary(&b"XXXX"[..]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_identity(seed in 0u64..1000, n in 1usize..=2) {
            let g = small(n);
            let f = random_function(&g, seed);
            let back = f.to_spectral().to_physical();
            prop_assert!(rel_diff(&back.samples, &f.samples) < 1e-12);
        }
    }
}
