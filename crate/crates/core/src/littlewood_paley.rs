//! Dyadic multiplier families and the block operators Δ_j.
//!
//! All families are built from one frozen profile ψ₀: equal to 1 on |ξ| ≤ 1,
//! vanishing on |ξ| ≥ 3/2, with a C^∞ transition in between. The telescoping
//! differences ψ₀(2^{−j}ξ) − ψ₀(2^{1−j}ξ) equal 1 on 3·2^{j−2} ≤ |ξ| ≤ 2^j.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{format_rational, rational_to_f64, Homogeneity, Rational};
use crate::grid::{Geometry, SampledFunction, SpectralFunction};

/// Relative L² error above which a reconstruction is refused.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-9;
pub const MIN_BANDS: usize = 6;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Smooth rise from 0 at r = lo to 1 at r = hi.
fn rise(r: f64, lo: f64, hi: f64) -> f64 {
    smooth_step((r - lo) / (hi - lo))
}

/// The frozen profile ψ₀ as a function of |ξ|.
pub fn psi0(r: f64) -> f64 {
    1.0 - rise(r, 1.0, 1.5)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    Inhomogeneous,
    Homogeneous,
    /// φ = 1 on 1−ε ≤ |ξ| ≤ 1+2ε with support in 1/2+ε ≤ |ξ| ≤ 2−2ε, so that
    /// single dyadic frequencies 2^k ± ε·2^k are seen by exactly one block.
    Necessity {
        #[serde(with = "crate::exponents::rational_serde")]
        eps: Rational,
        mode: Homogeneity,
    },
}

impl FamilyKind {
    pub fn homogeneity(&self) -> Homogeneity {
        match self {
            FamilyKind::Inhomogeneous => Homogeneity::Inhomogeneous,
            FamilyKind::Homogeneous => Homogeneity::Homogeneous,
            FamilyKind::Necessity { mode, .. } => *mode,
        }
    }

    pub fn id(&self) -> String {
        match self {
            FamilyKind::Inhomogeneous => "psi-telescoping-inhom".into(),
            FamilyKind::Homogeneous => "phi-telescoping-hom".into(),
            FamilyKind::Necessity { eps, mode } => {
                let m = match mode {
                    Homogeneity::Inhomogeneous => "inhom",
                    Homogeneity::Homogeneous => "hom",
                };
                format!("phi-flat-eps{}-{m}", format_rational(eps))
            }
        }
    }

    fn eps(&self) -> f64 {
        match self {
            FamilyKind::Necessity { eps, .. } => rational_to_f64(eps),
            _ => 0.0,
        }
    }

    /// The unit profile φ of the homogeneous block j = 0.
    fn unit_block(&self, r: f64) -> f64 {
        match self {
            FamilyKind::Necessity { .. } => {
                let e = self.eps();
                let up = |x: f64| rise(x, 0.5 + e, 1.0 - e);
                if r < 1.0 + 2.0 * e {
                    up(r)
                } else {
                    1.0 - up(0.5 * r)
                }
            }
            _ => psi0(r) - psi0(2.0 * r),
        }
    }

    /// The low-pass profile: the inhomogeneous block j = 0.
    fn low_pass(&self, r: f64) -> f64 {
        match self {
            FamilyKind::Necessity { .. } => {
                if r < 1.0 {
                    1.0
                } else {
                    self.unit_block(r)
                }
            }
            _ => psi0(r),
        }
    }

    /// Largest radius at which blocks j_min.. already sum to one.
    fn flat_from(&self, j_min: i32) -> f64 {
        let s = 2f64.powi(j_min);
        match self {
            FamilyKind::Necessity { .. } => s * (1.0 - self.eps()),
            _ => 0.75 * s,
        }
    }

    /// Radius up to which blocks ..=j_max already sum to one.
    fn flat_to(&self, j_max: i32) -> f64 {
        let s = 2f64.powi(j_max);
        match self {
            FamilyKind::Necessity { .. } => s * (1.0 + 2.0 * self.eps()),
            _ => s,
        }
    }

    fn validate(&self) -> Result<()> {
        if let FamilyKind::Necessity { eps, .. } = self {
            let e = rational_to_f64(eps);
            if !(e > 0.0 && e < 0.25) {
                return Err(Error::DegenerateInput(format!(
                    "flat-top width {} must lie in (0, 1/4)",
                    format_rational(eps)
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierFamily {
    pub kind: FamilyKind,
    pub j_min: i32,
    pub j_max: i32,
    /// max |Σ_j ψ_j − 1| over the grid frequencies (nonzero ones if homogeneous).
    pub partition_defect: f64,
}

impl MultiplierFamily {
    pub fn id(&self) -> String {
        self.kind.id()
    }

    pub fn j_range(&self) -> (i32, i32) {
        (self.j_min, self.j_max)
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    pub fn homogeneity(&self) -> Homogeneity {
        self.kind.homogeneity()
    }

    /// ψ_j(ξ) as a function of r = |ξ|; zero outside j_range.
    pub fn symbol(&self, j: i32, r: f64) -> f64 {
        if j < self.j_min || j > self.j_max {
            return 0.0;
        }
        let x = r * 2f64.powi(-j);
        match self.homogeneity() {
            Homogeneity::Inhomogeneous if j == 0 => self.kind.low_pass(x),
            _ => self.kind.unit_block(x),
        }
    }

    pub fn partition_sum(&self, r: f64) -> f64 {
        self.bands().map(|j| self.symbol(j, r)).sum()
    }

    /// Annulus containing the support of ψ_j.
    pub fn support(&self, j: i32) -> (f64, f64) {
        let s = 2f64.powi(j);
        let e = self.kind.eps();
        let (lo, hi) = match self.kind {
            FamilyKind::Necessity { .. } => (0.5 + e, 2.0 - 2.0 * e),
            _ => (0.5, 1.5),
        };
        if self.homogeneity() == Homogeneity::Inhomogeneous && j == 0 {
            (0.0, hi)
        } else {
            (lo * s, hi * s)
        }
    }

    /// Relative spectral mass of f̂ not reproduced by Σ_j ψ_j; the zero mode
    /// is excluded for homogeneous families.
    pub fn truncation_defect(&self, spec: &SpectralFunction) -> f64 {
        let g = &spec.geometry;
        let skip_zero = self.homogeneity() == Homogeneity::Homogeneous;
        let (mut miss, mut total) = (0.0, 0.0);
        for (i, c) in spec.coeffs.iter().enumerate() {
            if skip_zero && i == 0 {
                continue;
            }
            let w = c.norm_sqr();
            let d = 1.0 - self.partition_sum(g.abs_frequency(i));
            miss += w * d * d;
            total += w;
        }
        if total == 0.0 {
            0.0
        } else {
            (miss / total).sqrt()
        }
    }

    /// Symbols sampled along the first frequency axis, one column per band.
    pub fn write_symbols_csv(&self, geometry: &Geometry, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["xi".to_string()];
        header.extend(self.bands().map(|j| format!("j={j}")));
        wr.write_record(&header)?;
        let step = geometry.freq_step();
        for k in 0..=geometry.points / 2 {
            let xi = k as f64 * step;
            let mut rec = vec![format!("{xi:e}")];
            rec.extend(self.bands().map(|j| format!("{:e}", self.symbol(j, xi))));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// The default band range that reproduces every grid frequency.
pub fn covering_range(kind: &FamilyKind, geometry: &Geometry) -> (i32, i32) {
    let top = geometry.max_abs_freq();
    let mut j_max = 0;
    while kind.flat_to(j_max) < top {
        j_max += 1;
    }
    let j_min = match kind.homogeneity() {
        Homogeneity::Inhomogeneous => 0,
        Homogeneity::Homogeneous => {
            let bottom = geometry.freq_step();
            let mut j = j_max;
            while kind.flat_from(j) > bottom {
                j -= 1;
            }
            j
        }
    };
    (j_min, j_max)
}

/// Builds the family over [`covering_range`]. A grid counts as resolved when
/// its frequencies span at least `MIN_BANDS` octaves; an inhomogeneous
/// family on such a grid whose spectrum fits in fewer bands (a strongly
/// expanded box) is padded with empty bands above the Nyquist frequency.
pub fn build_family(kind: FamilyKind, geometry: &Geometry) -> Result<MultiplierFamily> {
    let (j_min, mut j_max) = covering_range(&kind, geometry);
    let octaves = (geometry.max_abs_freq() / geometry.freq_step()).log2().floor() as usize;
    if kind.homogeneity() == Homogeneity::Inhomogeneous && octaves >= MIN_BANDS {
        j_max = j_max.max(MIN_BANDS as i32 - 1);
    }
    with_j_range(kind, geometry, j_min, j_max)
}

/// A family with an explicit band range; the partition defect is measured on
/// the grid, so a range that misses frequencies shows up there.
pub fn with_j_range(kind: FamilyKind, geometry: &Geometry, j_min: i32, j_max: i32) -> Result<MultiplierFamily> {
    kind.validate()?;
    geometry.validate()?;
    let j_min = if kind.homogeneity() == Homogeneity::Inhomogeneous { 0 } else { j_min };
    let bands = (j_max - j_min + 1).max(0) as usize;
    if bands < MIN_BANDS {
        return Err(Error::GridTooCoarse { bands });
    }
    let mut fam = MultiplierFamily {
        kind,
        j_min,
        j_max,
        partition_defect: 0.0,
    };
    let skip_zero = fam.homogeneity() == Homogeneity::Homogeneous;
    let mut radii: Vec<f64> = (0..geometry.len())
        .filter(|i| !(skip_zero && *i == 0))
        .map(|i| geometry.abs_frequency(i))
        .collect();
    radii.sort_unstable_by(f64::total_cmp);
    radii.dedup();
    fam.partition_defect = radii
        .par_iter()
        .map(|r| (fam.partition_sum(*r) - 1.0).abs())
        .reduce(|| 0.0, f64::max);
    Ok(fam)
}

/// Δ_j f = (ψ_j f̂)^∨.
pub fn band(f: &SampledFunction, j: i32, fam: &MultiplierFamily) -> Result<SampledFunction> {
    check_band(j, fam)?;
    Ok(band_of_spectrum(&f.to_spectral(), j, fam))
}

fn check_band(j: i32, fam: &MultiplierFamily) -> Result<()> {
    if j < fam.j_min || j > fam.j_max {
        return Err(Error::BandOutOfRange {
            j,
            min: fam.j_min,
            max: fam.j_max,
        });
    }
    Ok(())
}

fn band_of_spectrum(spec: &SpectralFunction, j: i32, fam: &MultiplierFamily) -> SampledFunction {
    let g = &spec.geometry;
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = fam.symbol(j, g.abs_frequency(i));
            if m == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                c * m
            }
        })
        .collect();
    SpectralFunction {
        geometry: g.clone(),
        coeffs,
    }
    .to_physical()
}

/// All blocks of f over the family range, with the bookkeeping every norm
/// report carries.
#[derive(Clone, Debug)]
pub struct BandDecomposition {
    pub family_id: String,
    pub j_min: i32,
    pub j_max: i32,
    pub bands: Vec<SampledFunction>,
    pub truncation_defect: f64,
    pub tail_defect: f64,
    /// Mean of f, dropped by homogeneous families.
    pub mean: Complex64,
}

impl BandDecomposition {
    pub fn new(f: &SampledFunction, fam: &MultiplierFamily) -> Self {
        let spec = f.to_spectral();
        let js: Vec<i32> = fam.bands().collect();
        let bands = js.par_iter().map(|j| band_of_spectrum(&spec, *j, fam)).collect();
        Self {
            family_id: fam.id(),
            j_min: fam.j_min,
            j_max: fam.j_max,
            bands,
            truncation_defect: fam.truncation_defect(&spec),
            tail_defect: f.tail_defect(),
            mean: f.mean(),
        }
    }

    pub fn band(&self, j: i32) -> Option<&SampledFunction> {
        if j < self.j_min || j > self.j_max {
            return None;
        }
        self.bands.get((j - self.j_min) as usize)
    }

    pub fn magnitudes(&self) -> Vec<(i32, Vec<f64>)> {
        self.bands.iter().zip(self.j_min..).map(|(b, j)| (j, b.abs_values())).collect()
    }

    /// Blocks whose sup exceeds `rel_floor` times the largest block sup.
    pub fn active(&self, rel_floor: f64) -> Vec<i32> {
        let sups: Vec<f64> = self.bands.iter().map(|b| b.sup_norm()).collect();
        let top = sups.iter().copied().fold(0.0, f64::max);
        sups.iter()
            .zip(self.j_min..)
            .filter(|(s, _)| top > 0.0 && **s > rel_floor * top)
            .map(|(_, j)| j)
            .collect()
    }
}

/// Σ_j Δ_j f. Equals f, or f minus its mean for homogeneous families.
pub fn reconstruct(f: &SampledFunction, fam: &MultiplierFamily) -> Result<SampledFunction> {
    let dec = BandDecomposition::new(f, fam);
    let g = f.geometry.clone();
    let mut sum = vec![Complex64::new(0.0, 0.0); g.len()];
    for b in &dec.bands {
        for (s, z) in sum.iter_mut().zip(&b.samples) {
            *s += z;
        }
    }
    let target: Vec<Complex64> = match fam.homogeneity() {
        Homogeneity::Inhomogeneous => f.samples.clone(),
        Homogeneity::Homogeneous => f.samples.iter().map(|z| z - dec.mean).collect(),
    };
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let err: f64 = sum.iter().zip(&target).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let leakage = if norm == 0.0 { err } else { err / norm };
    if leakage > RECONSTRUCTION_TOLERANCE {
        return Err(Error::UnresolvedTail { leakage });
    }
    SampledFunction::new(g, sum)
}
