//! Triebel–Lizorkin–Lorentz, Besov–Lorentz, Sobolev–Lorentz and W^{k,p,q}
//! quasi-norms of sampled functions.

use std::fmt;

use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{format_rational, rational_to_f64, ExtendedExponent, Homogeneity, Rational};
use crate::grid::{SampledFunction, SpectralFunction};
use crate::littlewood_paley::{build_family, BandDecomposition, FamilyKind, MultiplierFamily, RECONSTRUCTION_TOLERANCE};
use crate::lorentz::{is_degenerate, lorentz_norm, mixed_norm_magnitudes, LevelSetProfile, MixedOrder};

/// Relative size of f̂(0) tolerated by negative-order Riesz potentials.
pub const MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    F,
    B,
    H,
    W,
    /// Plain Lorentz space L^{p,q}; s must be 0.
    L,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Scale::F => "F",
            Scale::B => "B",
            Scale::H => "H",
            Scale::W => "W",
            Scale::L => "L",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub scale: Scale,
    #[serde(with = "crate::exponents::rational_serde")]
    pub s: Rational,
    pub p: ExtendedExponent,
    pub q: ExtendedExponent,
    #[serde(default = "ExtendedExponent::infinity")]
    pub r: ExtendedExponent,
    pub homogeneous: bool,
}

impl SpaceSpec {
    pub fn new(scale: Scale, s: Rational, p: ExtendedExponent, q: ExtendedExponent, r: ExtendedExponent, homogeneous: bool) -> Result<Self> {
        let spec = Self { scale, s, p, q, r, homogeneous };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidTuple(format!("{self}: {m}")));
        match self.scale {
            Scale::F if self.p.is_infinite() => bad("F needs p < inf".into()),
            Scale::H if self.p.is_infinite() || self.p == ExtendedExponent::one() => bad("H needs 1 < p < inf".into()),
            Scale::W if !self.s.is_integer() || !self.s.is_positive() => bad("W needs a positive integer order".into()),
            Scale::L if !self.s.is_zero() => bad("L carries no smoothness".into()),
            _ => Ok(()),
        }
    }

    pub fn homogeneity(&self) -> Homogeneity {
        if self.homogeneous {
            Homogeneity::Homogeneous
        } else {
            Homogeneity::Inhomogeneous
        }
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dot = if self.homogeneous { "hom " } else { "" };
        match self.scale {
            Scale::F | Scale::B => write!(f, "{dot}{}^{{{},{}}}_{{{},{}}}", self.scale, format_rational(&self.s), self.r, self.p, self.q),
            _ => write!(f, "{dot}{}^{{{}}}_{{{},{}}}", self.scale, format_rational(&self.s), self.p, self.q),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    pub family_id: Option<String>,
    pub j_range: Option<(i32, i32)>,
    pub truncation_defect: f64,
    pub tail_defect: f64,
    /// The homogeneous evaluation dropped a nonzero mean.
    pub mean_stripped: bool,
    /// The value is +∞ only because L^{∞,q} = {0} for q < ∞.
    pub degenerate: bool,
}

impl NormResult {
    fn plain(value: f64, f: &SampledFunction, mean_stripped: bool, degenerate: bool) -> Self {
        Self {
            value,
            family_id: None,
            j_range: None,
            truncation_defect: 0.0,
            tail_defect: f.tail_defect(),
            mean_stripped,
            degenerate,
        }
    }
}

fn nonzero_mean(f: &SampledFunction) -> bool {
    f.mean().norm() > MEAN_TOLERANCE * f.sup_norm()
}

fn dyadic_norm(dec: &BandDecomposition, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, r: &ExtendedExponent, order: MixedOrder, homogeneous: bool) -> Result<NormResult> {
    if dec.truncation_defect > RECONSTRUCTION_TOLERANCE {
        return Err(Error::UnresolvedTail { leakage: dec.truncation_defect });
    }
    let sf = rational_to_f64(s);
    let cell = dec.bands.first().map_or(1.0, |b| b.geometry.cell_volume());
    let weighted: Vec<Vec<f64>> = dec
        .bands
        .iter()
        .zip(dec.j_min..)
        .map(|(b, j)| {
            let w = 2f64.powf(j as f64 * sf);
            b.samples.iter().map(|z| w * z.norm()).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = weighted.iter().map(|v| v.as_slice()).collect();
    let value = mixed_norm_magnitudes(&refs, cell, p, q, r, order);
    let degenerate = p.is_infinite() && !q.is_infinite() && value.is_infinite();
    Ok(NormResult {
        value,
        family_id: Some(dec.family_id.clone()),
        j_range: Some((dec.j_min, dec.j_max)),
        truncation_defect: dec.truncation_defect,
        tail_defect: dec.tail_defect,
        mean_stripped: homogeneous && dec.mean.norm() > MEAN_TOLERANCE * dec.bands.iter().map(|b| b.sup_norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE),
        degenerate,
    })
}

/// ‖{2^{js} Δ_j f}‖_{L^{p,q}(ℓ^r)} over a cached decomposition.
pub fn tl_norm_of(dec: &BandDecomposition, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, r: &ExtendedExponent, homogeneous: bool) -> Result<NormResult> {
    if p.is_infinite() {
        return Err(Error::InvalidTuple("F needs p < inf".into()));
    }
    dyadic_norm(dec, s, p, q, r, MixedOrder::LorentzOfLr, homogeneous)
}

/// ‖{2^{js} Δ_j f}‖_{ℓ^r(L^{p,q})} over a cached decomposition.
pub fn besov_norm_of(dec: &BandDecomposition, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, r: &ExtendedExponent, homogeneous: bool) -> Result<NormResult> {
    dyadic_norm(dec, s, p, q, r, MixedOrder::LrOfLorentz, homogeneous)
}

pub fn tl_norm(f: &SampledFunction, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, r: &ExtendedExponent, fam: &MultiplierFamily) -> Result<NormResult> {
    let hom = fam.homogeneity() == Homogeneity::Homogeneous;
    tl_norm_of(&BandDecomposition::new(f, fam), s, p, q, r, hom)
}

pub fn besov_norm(f: &SampledFunction, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, r: &ExtendedExponent, fam: &MultiplierFamily) -> Result<NormResult> {
    let hom = fam.homogeneity() == Homogeneity::Homogeneous;
    besov_norm_of(&BandDecomposition::new(f, fam), s, p, q, r, hom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    /// J^s: multiplier (1 + |ξ|²)^{s/2}.
    Bessel,
    /// Λ^s: multiplier |ξ|^s, with the zero mode set to 0 for s ≠ 0.
    Riesz,
}

#[derive(Clone, Debug)]
pub struct PotentialImage {
    pub function: SampledFunction,
    /// A nonzero mean was annihilated by the Riesz multiplier.
    pub mean_dropped: bool,
}

pub fn potential(f: &SampledFunction, s: &Rational, kind: PotentialKind) -> Result<PotentialImage> {
    if s.is_zero() {
        return Ok(PotentialImage { function: f.clone(), mean_dropped: false });
    }
    let sf = rational_to_f64(s);
    let spec = f.to_spectral();
    let scale = spec.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mean_dropped = kind == PotentialKind::Riesz && spec.zero_mode().norm() > MEAN_TOLERANCE * scale;
    if mean_dropped && s.is_negative() {
        return Err(Error::MeanModeViolation { mean: f.mean().norm() });
    }
    let g = spec.geometry.clone();
    let coeffs = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = g.abs_frequency(i);
            let m = match kind {
                PotentialKind::Bessel => (1.0 + r * r).powf(0.5 * sf),
                PotentialKind::Riesz if i == 0 => 0.0,
                PotentialKind::Riesz => r.powf(sf),
            };
            c * m
        })
        .collect();
    Ok(PotentialImage {
        function: SpectralFunction { geometry: g, coeffs }.to_physical(),
        mean_dropped,
    })
}

fn lorentz_result(f: &SampledFunction, p: &ExtendedExponent, q: &ExtendedExponent, mean_stripped: bool) -> NormResult {
    let prof = LevelSetProfile::of(f);
    NormResult::plain(lorentz_norm(&prof, p, q), f, mean_stripped, is_degenerate(&prof, p, q))
}

/// ‖J^s f‖_{L^{p,q}}, or ‖Λ^s f‖_{L^{p,q}} in homogeneous mode.
pub fn sobolev_lorentz_norm(f: &SampledFunction, s: &Rational, p: &ExtendedExponent, q: &ExtendedExponent, homogeneous: bool) -> Result<NormResult> {
    if p.is_infinite() || *p == ExtendedExponent::one() {
        return Err(Error::ExponentMismatch(format!("Sobolev-Lorentz norms need 1 < p < inf, got p = {p}")));
    }
    let kind = if homogeneous { PotentialKind::Riesz } else { PotentialKind::Bessel };
    let img = potential(f, s, kind)?;
    let stripped = homogeneous && !s.is_zero() && nonzero_mean(f);
    Ok(lorentz_result(&img.function, p, q, stripped))
}

/// Multi-indices α with |α| = m in n ≤ 2 variables.
fn multi_indices(n: usize, m: u32) -> Vec<[u32; 2]> {
    if n == 1 {
        vec![[m, 0]]
    } else {
        (0..=m).map(|a| [a, m - a]).collect()
    }
}

/// D^α f computed spectrally as (iξ)^α f̂.
pub fn derivative(f: &SampledFunction, alpha: [u32; 2]) -> SampledFunction {
    if alpha == [0, 0] {
        return f.clone();
    }
    f.to_spectral()
        .map_symbol(|xi| {
            let mut m = Complex64::new(1.0, 0.0);
            for (x, a) in xi.iter().zip(alpha) {
                m *= (Complex64::new(0.0, *x)).powu(a);
            }
            m
        })
        .to_physical()
}

/// Σ_{|α| ≤ k} ‖D^α f‖_{L^{p,q}}; only |α| = k in homogeneous mode.
pub fn wk_norm(f: &SampledFunction, k: u32, p: &ExtendedExponent, q: &ExtendedExponent, homogeneous: bool) -> Result<NormResult> {
    if k == 0 {
        return Err(Error::InvalidTuple("W needs a positive integer order".into()));
    }
    let orders: Vec<u32> = if homogeneous { vec![k] } else { (0..=k).collect() };
    let mut value = 0.0;
    let mut degenerate = false;
    for m in orders {
        for alpha in multi_indices(f.geometry.n, m) {
            let d = derivative(f, alpha);
            let prof = LevelSetProfile::of(&d);
            degenerate |= is_degenerate(&prof, p, q);
            value += lorentz_norm(&prof, p, q);
        }
    }
    Ok(NormResult::plain(value, f, homogeneous && nonzero_mean(f), degenerate))
}

/// The default family for a homogeneity mode on f's grid.
pub fn default_family(f: &SampledFunction, homogeneous: bool) -> Result<MultiplierFamily> {
    let kind = if homogeneous { FamilyKind::Homogeneous } else { FamilyKind::Inhomogeneous };
    build_family(kind, &f.geometry)
}

/// Evaluates any supported space, with the default family for F and B.
pub fn evaluate_space(f: &SampledFunction, space: &SpaceSpec) -> Result<NormResult> {
    space.validate()?;
    match space.scale {
        Scale::F | Scale::B => {
            let fam = default_family(f, space.homogeneous)?;
            let dec = BandDecomposition::new(f, &fam);
            evaluate_with(&dec, f, space)
        }
        _ => evaluate_with_plain(f, space),
    }
}

fn evaluate_with_plain(f: &SampledFunction, space: &SpaceSpec) -> Result<NormResult> {
    match space.scale {
        Scale::H => sobolev_lorentz_norm(f, &space.s, &space.p, &space.q, space.homogeneous),
        Scale::W => wk_norm(f, space.s.to_integer().to_u32().unwrap_or(0), &space.p, &space.q, space.homogeneous),
        Scale::L => Ok(lorentz_result(f, &space.p, &space.q, false)),
        Scale::F | Scale::B => unreachable!("dyadic scales need a decomposition"),
    }
}

/// Evaluates a space reusing a decomposition built with the matching family.
pub fn evaluate_with(dec: &BandDecomposition, f: &SampledFunction, space: &SpaceSpec) -> Result<NormResult> {
    match space.scale {
        Scale::F => tl_norm_of(dec, &space.s, &space.p, &space.q, &space.r, space.homogeneous),
        Scale::B => besov_norm_of(dec, &space.s, &space.p, &space.q, &space.r, space.homogeneous),
        _ => evaluate_with_plain(f, space),
    }
}

/// Evaluates many spaces on one function, sharing one decomposition per mode.
pub fn evaluate_spaces(f: &SampledFunction, spaces: &[SpaceSpec]) -> Result<Vec<NormResult>> {
    let mut decs: [Option<BandDecomposition>; 2] = [None, None];
    let mut out = Vec::with_capacity(spaces.len());
    for space in spaces {
        space.validate()?;
        if matches!(space.scale, Scale::F | Scale::B) {
            let slot = usize::from(space.homogeneous);
            if decs[slot].is_none() {
                decs[slot] = Some(BandDecomposition::new(f, &default_family(f, space.homogeneous)?));
            }
            out.push(evaluate_with(decs[slot].as_ref().unwrap(), f, space)?);
        } else {
            out.push(evaluate_with_plain(f, space)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::rat;
    use crate::grid::{annulus_geometry, default_annulus_function, dilate_pow2, function_bank, BankSpec, Geometry};
    use crate::littlewood_paley::with_j_range;
    use crate::lorentz::lorentz_norm_of;
    use crate::oracle;

    fn e(a: i64, b: i64) -> ExtendedExponent {
        ExtendedExponent::ratio(a, b)
    }

    fn inf() -> ExtendedExponent {
        ExtendedExponent::infinity()
    }

    fn fam(g: &Geometry, hom: bool) -> MultiplierFamily {
        build_family(if hom { FamilyKind::Homogeneous } else { FamilyKind::Inhomogeneous }, g).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn space_spec_preconditions() {
        assert!(SpaceSpec::new(Scale::F, rat(1, 1), inf(), inf(), e(2, 1), false).is_err());
        assert!(SpaceSpec::new(Scale::H, rat(1, 1), e(1, 1), e(2, 1), inf(), false).is_err());
        assert!(SpaceSpec::new(Scale::W, rat(1, 2), e(2, 1), e(2, 1), inf(), false).is_err());
        assert!(SpaceSpec::new(Scale::W, rat(0, 1), e(2, 1), e(2, 1), inf(), false).is_err());
        assert!(SpaceSpec::new(Scale::L, rat(1, 1), e(2, 1), e(2, 1), inf(), false).is_err());
        let ok = SpaceSpec::new(Scale::B, rat(-1, 2), inf(), inf(), e(1, 1), true).unwrap();
        let json = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<SpaceSpec>(&json).unwrap(), ok);
    }

    #[test]
    fn single_annulus_norms_are_exact() {
        let g = Geometry::desk(1);
        let f = default_annulus_function(g.clone());
        for hom in [false, true] {
            let fm = fam(&g, hom);
            for (p, q) in [(e(2, 1), e(2, 1)), (e(3, 2), e(4, 1)), (e(4, 1), inf())] {
                let base = lorentz_norm_of(&f, &p, &q);
                for s in [rat(0, 1), rat(3, 2), rat(-1, 1)] {
                    for r in [e(1, 1), e(2, 1), inf()] {
                        let tl = tl_norm(&f, &s, &p, &q, &r, &fm).unwrap();
                        let b = besov_norm(&f, &s, &p, &q, &r, &fm).unwrap();
                        assert!(rel(tl.value, base) < 1e-10, "{} {}", tl.value, base);
                        assert!(rel(b.value, base) < 1e-10);
                        assert_eq!(tl.family_id.as_deref(), Some(fm.id().as_str()));
                        assert!(tl.truncation_defect >= 0.0 && tl.tail_defect >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn dilated_annulus_follows_scaling_law() {
        let f = default_annulus_function(annulus_geometry());
        let (p, q, r) = (e(3, 2), e(3, 1), e(2, 1));
        let base = lorentz_norm_of(&f, &p, &q);
        for k in 1..=4 {
            let d = dilate_pow2(&f, k).unwrap();
            for hom in [false, true] {
                let fm = fam(&d.geometry, hom);
                let s = rat(5, 4);
                let expect = 2f64.powf(k as f64 * (1.25 - 1.0 / 1.5)) * base;
                let b = besov_norm(&d, &s, &p, &q, &r, &fm).unwrap();
                let t = tl_norm(&d, &s, &p, &q, &r, &fm).unwrap();
                assert!(rel(b.value, expect) < 1e-9);
                assert!(rel(t.value, expect) < 1e-9);
            }
        }
    }

    #[test]
    fn l2_case_is_close_to_plancherel() {
        let bank = function_bank(&BankSpec::new("random-bandlimited", 6, 3, 1)).unwrap();
        for f in &bank.members {
            let fm = fam(&f.geometry, false);
            let two = e(2, 1);
            let v = tl_norm(f, &rat(0, 1), &two, &two, &two, &fm).unwrap().value;
            let l2 = f.l2_norm();
            assert!(v <= l2 * (1.0 + 1e-12) && v >= l2 / 2f64.sqrt() * (1.0 - 1e-12), "{v} {l2}");
        }
    }

    #[test]
    fn zero_function_has_zero_norms() {
        let g = Geometry::desk(2);
        let f = SampledFunction::zeros(g.clone());
        for hom in [false, true] {
            let fm = fam(&g, hom);
            assert_eq!(tl_norm(&f, &rat(1, 1), &e(2, 1), &e(2, 1), &e(2, 1), &fm).unwrap().value, 0.0);
            assert_eq!(besov_norm(&f, &rat(1, 1), &inf(), &e(2, 1), &e(2, 1), &fm).unwrap().value, 0.0);
        }
    }

    #[test]
    fn besov_r_ordering_and_f_to_b_with_unit_constant() {
        let bank = function_bank(&BankSpec::new("random-bandlimited", 6, 8, 1)).unwrap();
        for f in &bank.members {
            for hom in [false, true] {
                let dec = BandDecomposition::new(f, &fam(&f.geometry, hom));
                for (p, q) in [(e(2, 1), e(1, 1)), (e(3, 1), inf()), (e(3, 2), e(3, 2))] {
                    let s = rat(1, 2);
                    let b_inf = besov_norm_of(&dec, &s, &p, &q, &inf(), hom).unwrap().value;
                    let b_one = besov_norm_of(&dec, &s, &p, &q, &e(1, 1), hom).unwrap().value;
                    let f_inf = tl_norm_of(&dec, &s, &p, &q, &inf(), hom).unwrap().value;
                    assert!(b_inf <= b_one * (1.0 + 1e-12));
                    assert!(b_inf <= f_inf * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn unresolved_family_is_refused() {
        let bank = function_bank(&BankSpec::new("random-bandlimited", 1, 5, 1)).unwrap();
        let f = &bank.members[0];
        let narrow = with_j_range(FamilyKind::Inhomogeneous, &f.geometry, 0, 5).unwrap();
        let two = e(2, 1);
        match tl_norm(f, &rat(0, 1), &two, &two, &two, &narrow) {
            Err(Error::UnresolvedTail { leakage }) => assert!(leakage > 1e-9),
            other => {
                let v = other.unwrap();
                assert!(v.truncation_defect <= RECONSTRUCTION_TOLERANCE);
            }
        }
    }

    #[test]
    fn degenerate_lorentz_index_is_flagged() {
        let g = Geometry::desk(1);
        let f = default_annulus_function(g.clone());
        let v = besov_norm(&f, &rat(0, 1), &inf(), &e(2, 1), &inf(), &fam(&g, false)).unwrap();
        assert!(v.value.is_infinite() && v.degenerate);
    }

    #[test]
    fn potentials() {
        let g = Geometry::desk(1);
        let gauss = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp());
        let id = potential(&gauss, &rat(0, 1), PotentialKind::Riesz).unwrap();
        assert_eq!(id.function, gauss);

        let k0 = 7;
        let xi0 = k0 as f64 * g.freq_step();
        let wave = SampledFunction::from_fn(g.clone(), |x| Complex64::from_polar(1.0, xi0 * x[0]));
        let lifted = potential(&wave, &rat(2, 1), PotentialKind::Riesz).unwrap().function;
        for (a, b) in lifted.samples.iter().zip(&wave.samples) {
            // Roundoff in empty modes is amplified by |ξ|² ≤ 2·10⁵.
            assert!((a - b * xi0 * xi0).norm() < 1e-9);
        }

        let j2 = potential(&gauss, &rat(2, 1), PotentialKind::Bessel).unwrap().function;
        let lap = oracle::laplacian_fd(&gauss);
        for ((a, f), l) in j2.samples.iter().zip(&gauss.samples).zip(&lap) {
            assert!((a.re - (f.re - l)).abs() < 1e-8);
        }

        let there = potential(&gauss, &rat(3, 2), PotentialKind::Bessel).unwrap().function;
        let back = potential(&there, &rat(-3, 2), PotentialKind::Bessel).unwrap().function;
        for (a, b) in back.samples.iter().zip(&gauss.samples) {
            assert!((a - b).norm() < 1e-10);
        }

        assert!(matches!(potential(&gauss, &rat(-1, 1), PotentialKind::Riesz), Err(Error::MeanModeViolation { .. })));
        let centred = gauss.combine(&gauss, |a, _| a - gauss.mean()).unwrap();
        let up = potential(&centred, &rat(1, 1), PotentialKind::Riesz).unwrap();
        assert!(!up.mean_dropped);
        assert!(potential(&gauss, &rat(1, 1), PotentialKind::Riesz).unwrap().mean_dropped);
        let down = potential(&up.function, &rat(-1, 1), PotentialKind::Riesz).unwrap().function;
        for (a, b) in down.samples.iter().zip(&centred.samples) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn sobolev_lorentz_basics() {
        let g = Geometry::desk(1);
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp());
        let (p, q) = (e(3, 1), e(2, 1));
        let h0 = sobolev_lorentz_norm(&f, &rat(0, 1), &p, &q, false).unwrap();
        assert!(rel(h0.value, lorentz_norm_of(&f, &p, &q)) < 1e-15);
        assert!(matches!(sobolev_lorentz_norm(&f, &rat(1, 1), &e(1, 1), &q, false), Err(Error::ExponentMismatch(_))));
        assert!(sobolev_lorentz_norm(&f, &rat(1, 1), &p, &q, true).unwrap().mean_stripped);

        let w = wk_norm(&f, 1, &e(2, 1), &e(2, 1), true).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt().sqrt();
        assert!(rel(w.value, exact) < 1e-8, "{} {}", w.value, exact);
        let full = wk_norm(&f, 1, &e(2, 1), &e(2, 1), false).unwrap();
        assert!(rel(full.value, exact + f.l2_norm()) < 1e-8);
    }

    #[test]
    fn w_norm_sums_all_mixed_derivatives_in_two_dimensions() {
        let g = Geometry::desk(2);
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0] - 2.0 * x[1] * x[1]).exp());
        let two = e(2, 1);
        let direct: f64 = [[2, 0], [1, 1], [0, 2]].iter().map(|a| lorentz_norm_of(&derivative(&f, *a), &two, &two)).sum();
        let w = wk_norm(&f, 2, &two, &two, true).unwrap();
        assert!(rel(w.value, direct) < 1e-14);
    }

    #[test]
    fn shared_decompositions_match_direct_evaluation() {
        let bank = function_bank(&BankSpec::new("gaussian-orbit", 3, 1, 1)).unwrap();
        let f = &bank.members[1];
        let spaces = vec![
            SpaceSpec::new(Scale::F, rat(1, 2), e(2, 1), e(3, 1), e(2, 1), false).unwrap(),
            SpaceSpec::new(Scale::B, rat(1, 2), e(2, 1), e(3, 1), e(2, 1), true).unwrap(),
            SpaceSpec::new(Scale::H, rat(1, 2), e(2, 1), e(3, 1), inf(), false).unwrap(),
            SpaceSpec::new(Scale::W, rat(1, 1), e(2, 1), e(2, 1), inf(), true).unwrap(),
            SpaceSpec::new(Scale::L, rat(0, 1), e(2, 1), e(1, 1), inf(), false).unwrap(),
        ];
        let batch = evaluate_spaces(f, &spaces).unwrap();
        for (space, got) in spaces.iter().zip(&batch) {
            assert_eq!(&evaluate_space(f, space).unwrap(), got);
        }
    }
}
