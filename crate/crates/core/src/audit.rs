//! Empirical checks of the inequalities: exact scaling laws, interpolation
//! ratio audits over function banks, necessity witnesses along dilation and
//! modulation orbits, and the two standalone lemmas (sequence interpolation
//! and the Bernstein bound).

use std::io::Write;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{
    common_necessary, format_rational, int, rat, rational_serde, rational_to_f64, star_values, ExtendedExponent,
    Homogeneity, ParamTuple, Rational,
};
use crate::grid::{
    annulus_geometry, bump_inverse, default_annulus_function, dilate_pow2, modulated_bump, modulation_geometry, Bank,
    BankSpec, Geometry, SampledFunction,
};
use crate::littlewood_paley::{build_family, FamilyKind};
use crate::lorentz::{holder_defect, lorentz_norm_of, lr_norm};
use crate::predicates::{evaluate, Verdict};
use crate::spaces::{evaluate_space, evaluate_spaces, tl_norm, NormResult, Scale, SpaceSpec};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Dilation orbit used for scale-invariance checks: k ∈ [−ORBIT, ORBIT].
pub const ORBIT: i32 = 3;

/// Radius of the bumps in the modulation family and the flat half-width of
/// the necessity multipliers that isolate them.
pub fn modulation_bump_radius() -> Rational {
    rat(3, 32)
}

pub fn modulation_flat_width() -> Rational {
    rat(1, 8)
}

/// Largest edge-to-peak ratio accepted for a norm inside a ratio audit. Looser
/// than the input tolerance: potentials with symbols that are not smooth at
/// the origin, such as |ξ|^s, decay only polynomially.
pub const AUDIT_TAIL_TOLERANCE: f64 = 1e-2;

/// Relative floor below which a Fourier coefficient is outside the support.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

fn pow2(x: f64) -> f64 {
    x.exp2()
}

/// (predicted, computed) norm of f0(2^k ·) for the single-annulus function
/// f0. The inhomogeneous law is 2^{−kn/p}‖f0‖_{L^{p,q}} for k ≤ 0 and
/// 2^{k(s−n/p)}‖f0‖_{L^{p,q}} for k ≥ 1; the homogeneous law is the second
/// form for every k.
pub fn dilation_norm_law(f0: &SampledFunction, k: i32, space: &SpaceSpec) -> Result<(f64, f64)> {
    if !matches!(space.scale, Scale::F | Scale::B) {
        return Err(Error::Config(format!("the dilation law is stated for F and B, not {}", space.scale)));
    }
    let n = f0.geometry.n as f64;
    let np = n * space.p.reciprocal_f64();
    let base = lorentz_norm_of(f0, &space.p, &space.q);
    let predicted = if k <= 0 && !space.homogeneous {
        pow2(-(k as f64) * np) * base
    } else {
        pow2(k as f64 * (rational_to_f64(&space.s) - np)) * base
    };
    let computed = evaluate_space(&dilate_pow2(f0, k)?, space)?.value;
    Ok((predicted, computed))
}

/// ‖{2^{js} a_j}_{j≥1}‖_{ℓ^r} ‖ψ^∨‖_{L^{p,q}}, the Triebel–Lizorkin norm of the
/// modulated bump family under the necessity multipliers.
pub fn modulation_norm_law(
    a: &[Complex64],
    s: &Rational,
    p: &ExtendedExponent,
    q: &ExtendedExponent,
    r: &ExtendedExponent,
    geometry: &Geometry,
) -> Result<f64> {
    let psi = bump_inverse(geometry.clone(), &modulation_bump_radius())?;
    let sf = rational_to_f64(s);
    let weighted: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, ai)| pow2((i as f64 + 1.0) * sf) * ai.norm())
        .collect();
    Ok(lr_norm(&weighted, r) * lorentz_norm_of(&psi, p, q))
}

fn necessity_family_kind() -> FamilyKind {
    FamilyKind::Necessity {
        eps: modulation_flat_width(),
        mode: Homogeneity::Homogeneous,
    }
}

/// Computed homogeneous F norm of the modulated bump with coefficients a.
pub fn modulation_norm(
    a: &[Complex64],
    s: &Rational,
    p: &ExtendedExponent,
    q: &ExtendedExponent,
    r: &ExtendedExponent,
    geometry: &Geometry,
) -> Result<NormResult> {
    let f = modulated_bump(geometry.clone(), a, &modulation_bump_radius())?;
    let fam = build_family(necessity_family_kind(), geometry)?;
    tl_norm(&f, s, p, q, r, &fam)
}

/// X, X1, X2 and θ of ‖f‖_X ≲ ‖f‖_{X1}^{1−θ} ‖f‖_{X2}^θ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub target: SpaceSpec,
    pub left: SpaceSpec,
    pub right: SpaceSpec,
    #[serde(with = "rational_serde")]
    pub theta: Rational,
}

fn scaling_exponent(space: &SpaceSpec, n: u32) -> Rational {
    &space.s - int(n as i64) * space.p.reciprocal()
}

fn scales_homogeneously(space: &SpaceSpec) -> bool {
    space.homogeneous || space.scale == Scale::L
}

impl TripleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_positive() && self.theta < Rational::one()) {
            return Err(Error::InvalidTuple(format!("theta = {} is not in (0, 1)", format_rational(&self.theta))));
        }
        for s in [&self.target, &self.left, &self.right] {
            s.validate()?;
        }
        Ok(())
    }

    /// (s − n/p) − [(1−θ)(s1 − n/p1) + θ(s2 − n/p2)]; zero exactly when the
    /// inequality is invariant under dyadic dilation.
    pub fn scaling_gap(&self, n: u32) -> Rational {
        let one = Rational::one();
        scaling_exponent(&self.target, n)
            - (&one - &self.theta) * scaling_exponent(&self.left, n)
            - &self.theta * scaling_exponent(&self.right, n)
    }

    pub fn is_scale_invariant(&self, n: u32) -> bool {
        [&self.target, &self.left, &self.right].iter().all(|s| scales_homogeneously(s)) && self.scaling_gap(n).is_zero()
    }
}

fn usable(res: &NormResult, what: &str) -> Result<f64> {
    if res.tail_defect > AUDIT_TAIL_TOLERANCE {
        return Err(Error::DegenerateInput(format!("{what}: tail defect {:e}", res.tail_defect)));
    }
    if !res.value.is_finite() {
        return Err(Error::DegenerateInput(format!("{what}: infinite norm")));
    }
    Ok(res.value)
}

fn triple_norms(f: &SampledFunction, spec: &TripleSpec) -> Result<Vec<NormResult>> {
    evaluate_spaces(f, &[spec.target.clone(), spec.left.clone(), spec.right.clone()])
}

fn ratio_from(norms: &[NormResult], theta: f64) -> Result<f64> {
    let x = usable(&norms[0], "target")?;
    let x1 = usable(&norms[1], "first factor")?;
    let x2 = usable(&norms[2], "second factor")?;
    if x1 == 0.0 || x2 == 0.0 {
        return Err(Error::DegenerateInput("a factor norm vanishes".into()));
    }
    Ok(x / (x1.powf(1.0 - theta) * x2.powf(theta)))
}

/// ‖f‖_X / (‖f‖_{X1}^{1−θ} ‖f‖_{X2}^θ).
pub fn interpolation_ratio(f: &SampledFunction, spec: &TripleSpec) -> Result<f64> {
    spec.validate()?;
    ratio_from(&triple_norms(f, spec)?, rational_to_f64(&spec.theta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditStatus {
    /// The tuple is covered by a proven sufficient condition.
    Supported,
    /// The tuple sits in an unresolved region; a bounded ratio is evidence only.
    Evidence,
    /// No catalog statement was attached to the audit.
    Unclaimed,
}

/// A catalog statement the audit is meant to support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub theorem_id: String,
    pub tuple: ParamTuple,
}

impl Claim {
    pub fn status(&self) -> Result<AuditStatus> {
        let v = evaluate(&self.theorem_id, &self.tuple)?;
        Ok(match v.sufficient {
            Verdict::True => AuditStatus::Supported,
            Verdict::Open => AuditStatus::Evidence,
            _ => AuditStatus::Unclaimed,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionRatio {
    pub index: usize,
    pub ratio: Option<f64>,
    /// max/min of the ratio over the dilation orbit, when the triple is scale invariant
    pub orbit_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub triple: TripleSpec,
    pub bank: BankSpec,
    pub seed: u64,
    pub geometry: Geometry,
    pub status: AuditStatus,
    pub family_ids: Vec<Option<String>>,
    pub j_ranges: Vec<Option<(i32, i32)>>,
    pub per_function: Vec<FunctionRatio>,
    pub sup_ratio: f64,
    pub orbit_spread: Option<f64>,
    pub max_truncation_defect: f64,
    pub max_tail_defect: f64,
    pub version: String,
}

impl AuditReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "ratio", "orbit_spread", "skipped"])?;
        for r in &self.per_function {
            wr.write_record([
                r.index.to_string(),
                r.ratio.map_or(String::new(), |v| format!("{v:.17e}")),
                r.orbit_spread.map_or(String::new(), |v| format!("{v:.17e}")),
                r.skipped.clone().unwrap_or_default(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

struct MemberOutcome {
    row: FunctionRatio,
    norms: Option<Vec<NormResult>>,
}

fn audit_member(index: usize, f: &SampledFunction, spec: &TripleSpec, theta: f64, invariant: bool) -> MemberOutcome {
    let first = triple_norms(f, spec).and_then(|norms| ratio_from(&norms, theta).map(|r| (r, norms)));
    let (ratio, norms) = match first {
        Ok(v) => v,
        Err(e) => {
            return MemberOutcome {
                row: FunctionRatio { index, ratio: None, orbit_spread: None, skipped: Some(e.to_string()) },
                norms: None,
            }
        }
    };
    let orbit_spread = if invariant {
        let orbit: Result<Vec<f64>> = (-ORBIT..=ORBIT)
            .filter(|k| *k != 0)
            .map(|k| interpolation_ratio(&dilate_pow2(f, k)?, spec))
            .collect();
        orbit.ok().map(|rs| {
            let hi = rs.iter().copied().fold(ratio, f64::max);
            let lo = rs.iter().copied().fold(ratio, f64::min);
            hi / lo
        })
    } else {
        None
    };
    MemberOutcome {
        row: FunctionRatio { index, ratio: Some(ratio), orbit_spread, skipped: None },
        norms: Some(norms),
    }
}

/// Interpolation ratios over a bank. Degenerate members are skipped and
/// reported, never allowed to abort the batch. Parallel over members with
/// results kept in bank order.
pub fn ratio_audit(bank: &Bank, spec: &TripleSpec, claim: Option<&Claim>) -> Result<AuditReport> {
    spec.validate()?;
    let geometry = bank
        .members
        .first()
        .map(|m| m.geometry.clone())
        .unwrap_or_else(|| bank.spec.resolved_geometry());
    let n = geometry.n as u32;
    let invariant = spec.is_scale_invariant(n);
    let theta = rational_to_f64(&spec.theta);
    let outcomes: Vec<MemberOutcome> = bank
        .members
        .par_iter()
        .enumerate()
        .map(|(i, f)| audit_member(i, f, spec, theta, invariant))
        .collect();
    let first_norms = outcomes.iter().find_map(|o| o.norms.as_ref());
    let family_ids = first_norms.map_or(vec![None; 3], |ns| ns.iter().map(|r| r.family_id.clone()).collect());
    let j_ranges = first_norms.map_or(vec![None; 3], |ns| ns.iter().map(|r| r.j_range).collect());
    let all_norms = || outcomes.iter().filter_map(|o| o.norms.as_ref()).flatten();
    let max_truncation_defect = all_norms().map(|r| r.truncation_defect).fold(0.0, f64::max);
    let max_tail_defect = all_norms().map(|r| r.tail_defect).fold(0.0, f64::max);
    let per_function: Vec<FunctionRatio> = outcomes.into_iter().map(|o| o.row).collect();
    let sup_ratio = per_function.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
    let orbit_spread = invariant.then(|| per_function.iter().filter_map(|r| r.orbit_spread).fold(1.0, f64::max));
    let status = match claim {
        Some(c) => c.status()?,
        None => AuditStatus::Unclaimed,
    };
    Ok(AuditReport {
        triple: spec.clone(),
        bank: bank.spec.clone(),
        seed: bank.spec.seed,
        geometry,
        status,
        family_ids,
        j_ranges,
        per_function,
        sup_ratio,
        orbit_spread,
        max_truncation_defect,
        max_tail_defect,
        version: VERSION.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// k = 0, 1, 2, ...: compression, spectrum pushed to high frequencies
    Up,
    /// k = 0, −1, −2, ...: expansion, spectrum pushed to low frequencies
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WitnessFamily {
    /// Dilates of the single-annulus function, interpolation ratio.
    Dilation { direction: Direction },
    /// Modulated bumps with 2^{j s1} a_j ≡ 1, embedding ratio of slot 1 into slot 2.
    Modulation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub tuple: ParamTuple,
    pub scale: Scale,
    pub homogeneous: bool,
    pub family: WitnessFamily,
    pub geometry: Geometry,
    pub family_id: Option<String>,
    pub j_range: Option<(i32, i32)>,
    /// Dilation index k or number of modulated bumps N.
    pub indices: Vec<i32>,
    pub ratios: Vec<f64>,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
    /// Largest deviation of log2(ratio) from the fitted line.
    pub residual: f64,
    pub monotone: bool,
    pub passed: bool,
    pub version: String,
}

impl WitnessReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "ratio", "log2_ratio"])?;
        for (i, r) in self.indices.iter().zip(&self.ratios) {
            wr.write_record([i.to_string(), format!("{r:.17e}"), format!("{:.17e}", r.log2())])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Least-squares slope of y on x and the largest absolute residual.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (my + slope * (a - mx))).abs())
        .fold(0.0, f64::max);
    (slope, residual)
}

/// Predicted growth rate of the interpolation ratio along the dilation
/// orbit of the single-annulus function.
pub fn dilation_growth_exponent(t: &ParamTuple, mode: Homogeneity, direction: Direction) -> Rational {
    let st = star_values(t);
    let n = int(t.n as i64);
    let smooth_side = (&t.s - &n * t.p.reciprocal()) - (&st.s_star - &n * &st.p_star_recip);
    match (mode, direction) {
        (_, Direction::Up) => smooth_side,
        (Homogeneity::Homogeneous, Direction::Down) => -smooth_side,
        (Homogeneity::Inhomogeneous, Direction::Down) => &n * (t.p.reciprocal() - &st.p_star_recip),
    }
}

pub const WITNESS_TOLERANCE: f64 = 0.05;
pub const WITNESS_MAX_RESIDUAL: f64 = 1e-2;
pub const WITNESS_MIN_STEPS: usize = 5;

fn tuple_spaces(t: &ParamTuple, scale: Scale, homogeneous: bool) -> Result<[SpaceSpec; 3]> {
    Ok([
        SpaceSpec::new(scale, t.s.clone(), t.p.clone(), t.q.clone(), t.r.clone(), homogeneous)?,
        SpaceSpec::new(scale, t.s1.clone(), t.p1.clone(), t.q1.clone(), t.r1.clone(), homogeneous)?,
        SpaceSpec::new(scale, t.s2.clone(), t.p2.clone(), t.q2.clone(), t.r2.clone(), homogeneous)?,
    ])
}

/// Searches for blow-up of the inequality along an explicit family. Unless
/// `force` is set, the tuple must fail the necessary condition the family
/// is designed to expose.
pub fn necessity_witness(
    t: &ParamTuple,
    scale: Scale,
    homogeneous: bool,
    family: WitnessFamily,
    steps: usize,
    force: bool,
) -> Result<WitnessReport> {
    t.validate()?;
    if !matches!(scale, Scale::F | Scale::B) {
        return Err(Error::Config(format!("witness families act on F and B, not {scale}")));
    }
    let mode = if homogeneous { Homogeneity::Homogeneous } else { Homogeneity::Inhomogeneous };
    let (indices, ratios, predicted, geometry, first): (Vec<i32>, Vec<f64>, Rational, Geometry, NormResult) = match family {
        WitnessFamily::Dilation { direction } => {
            if !force && common_necessary(t, mode) {
                return Err(Error::Config("the tuple satisfies the common necessary condition".into()));
            }
            let [x, x1, x2] = tuple_spaces(t, scale, homogeneous)?;
            let spec = TripleSpec { target: x, left: x1, right: x2, theta: t.theta.clone() };
            let f0 = default_annulus_function(annulus_geometry());
            let sign = if direction == Direction::Up { 1 } else { -1 };
            let ks: Vec<i32> = (0..=steps as i32).map(|i| sign * i).collect();
            let theta = rational_to_f64(&t.theta);
            let evals: Vec<Result<(f64, NormResult)>> = ks
                .par_iter()
                .map(|k| {
                    let norms = triple_norms(&dilate_pow2(&f0, *k)?, &spec)?;
                    Ok((ratio_from(&norms, theta)?, norms[0].clone()))
                })
                .collect();
            let evals: Vec<(f64, NormResult)> = evals.into_iter().collect::<Result<_>>()?;
            let first = evals[0].1.clone();
            (
                ks.iter().map(|k| k.abs()).collect(),
                evals.into_iter().map(|e| e.0).collect(),
                dilation_growth_exponent(t, mode, direction),
                f0.geometry.clone(),
                first,
            )
        }
        WitnessFamily::Modulation => {
            if !force && !(t.s1 == t.s2 && t.r1 > t.r2) {
                return Err(Error::Config("the modulation witness needs s1 = s2 and r1 > r2".into()));
            }
            if scale != Scale::F || !homogeneous {
                return Err(Error::Config("the modulation witness uses homogeneous F".into()));
            }
            let g = modulation_geometry();
            let s = rational_to_f64(&t.s1);
            let ns: Vec<i32> = (1..=steps as i32).collect();
            let evals: Vec<Result<(f64, NormResult)>> = ns
                .par_iter()
                .map(|&count| {
                    let a: Vec<Complex64> = (1..=count).map(|j| Complex64::new(pow2(-(j as f64) * s), 0.0)).collect();
                    let src = modulation_norm(&a, &t.s1, &t.p1, &t.q1, &t.r1, &g)?;
                    let dst = modulation_norm(&a, &t.s2, &t.p2, &t.q2, &t.r2, &g)?;
                    Ok((dst.value / src.value, dst))
                })
                .collect();
            let evals: Vec<(f64, NormResult)> = evals.into_iter().collect::<Result<_>>()?;
            let first = evals[0].1.clone();
            (
                ns,
                evals.into_iter().map(|e| e.0).collect(),
                t.r2.reciprocal() - t.r1.reciprocal(),
                g,
                first,
            )
        }
    };
    let xs: Vec<f64> = match family {
        WitnessFamily::Dilation { .. } => indices.iter().map(|k| *k as f64).collect(),
        WitnessFamily::Modulation => indices.iter().map(|n| (*n as f64).log2()).collect(),
    };
    let ys: Vec<f64> = ratios.iter().map(|r| r.log2()).collect();
    let (fitted, residual) = fit_line(&xs, &ys);
    let predicted_exponent = rational_to_f64(&predicted);
    let monotone = ratios.windows(2).all(|w| w[1] > w[0]);
    let passed = predicted_exponent > 0.0
        && ratios.len() > WITNESS_MIN_STEPS
        && monotone
        && (fitted - predicted_exponent).abs() <= WITNESS_TOLERANCE * predicted_exponent
        && residual < WITNESS_MAX_RESIDUAL;
    Ok(WitnessReport {
        tuple: t.clone(),
        scale,
        homogeneous,
        family,
        geometry,
        family_id: first.family_id,
        j_range: first.j_range,
        indices,
        ratios,
        fitted_exponent: fitted,
        predicted_exponent,
        residual,
        monotone,
        passed,
        version: VERSION.to_string(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDefect {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

impl SequenceDefect {
    pub fn holds(&self) -> bool {
        self.lhs <= self.constant * self.rhs
    }
}

/// C(θ, δ) = 1/(1 − 2^{−θδ}) + 1/(1 − 2^{−(1−θ)δ}): split the sum at the index
/// where the two weighted bounds cross and sum the two geometric tails.
pub fn sequence_constant(theta: f64, delta: f64) -> f64 {
    1.0 / (1.0 - pow2(-theta * delta)) + 1.0 / (1.0 - pow2(-(1.0 - theta) * delta))
}

/// Both sides of Σ_j 2^{js*}|a_j| ≤ C (sup_j 2^{js1}|a_j|)^{1−θ} (sup_j 2^{js2}|a_j|)^θ
/// for a finitely supported sequence given as (j, a_j) pairs.
pub fn sequence_interp_defect(a: &[(i32, f64)], s1: &Rational, s2: &Rational, theta: &Rational) -> Result<SequenceDefect> {
    if s1 == s2 {
        return Err(Error::EqualSmoothness);
    }
    let th = rational_to_f64(theta);
    let (f1, f2) = (rational_to_f64(s1), rational_to_f64(s2));
    let fs = (1.0 - th) * f1 + th * f2;
    let weighted = |s: f64| a.iter().map(move |(j, v)| pow2(*j as f64 * s) * v.abs());
    let lhs = weighted(fs).sum();
    let sup1 = weighted(f1).fold(0.0, f64::max);
    let sup2 = weighted(f2).fold(0.0, f64::max);
    Ok(SequenceDefect {
        lhs,
        rhs: sup1.powf(1.0 - th) * sup2.powf(th),
        constant: sequence_constant(th, (f2 - f1).abs()),
    })
}

/// Frequencies carrying coefficients above the support floor.
fn spectral_support(f: &SampledFunction) -> Result<Vec<[f64; 2]>> {
    let spec = f.to_spectral();
    let g = &spec.geometry;
    let top = spec.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::DegenerateInput("zero function".into()));
    }
    let edge = (g.points / 2) as i64;
    let mut pts = Vec::new();
    for (i, c) in spec.coeffs.iter().enumerate() {
        if c.norm() > SUPPORT_TOLERANCE * top {
            let [a, b] = g.axis_indices(i);
            if g.signed_index(a).abs() >= edge - 1 || (g.n == 2 && g.signed_index(b).abs() >= edge - 1) {
                return Err(Error::NotBandLimited("spectrum reaches the Nyquist frequency".into()));
            }
            pts.push(g.frequency_vector(i));
        }
    }
    Ok(pts)
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Diameter of a planar point set through its convex hull.
fn diameter(mut pts: Vec<[f64; 2]>) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return match pts.as_slice() {
            [a, b] => (a[0] - b[0]).hypot(a[1] - b[1]),
            _ => 0.0,
        };
    }
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], *p) <= 0.0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    let mut best = 0.0f64;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    best
}

/// Spectral diameter, floored at one frequency step so that a single
/// exponential still has a positive width.
pub fn spectral_diameter(f: &SampledFunction) -> Result<f64> {
    let d = diameter(spectral_support(f)?);
    Ok(d.max(f.geometry.freq_step()))
}

/// ‖f‖_∞ / (d^{n/p} ‖f‖_{L^{p,q}}) with d the spectral diameter.
pub fn bernstein_defect(f: &SampledFunction, p: &ExtendedExponent, q: &ExtendedExponent) -> Result<f64> {
    if p.is_infinite() {
        return Err(Error::ExponentMismatch("the Bernstein bound needs p < inf".into()));
    }
    let d = spectral_diameter(f)?;
    let norm = lorentz_norm_of(f, p, q);
    Ok(f.sup_norm() / (d.powf(f.geometry.n as f64 * p.reciprocal_f64()) * norm))
}

/// Largest Hölder defect over consecutive bank members.
pub fn holder_audit(
    bank: &Bank,
    exps: [&ExtendedExponent; 6],
) -> Result<f64> {
    let [p, p1, p2, q, q1, q2] = exps;
    let defects: Vec<f64> = bank
        .members
        .windows(2)
        .map(|w| holder_defect(&w[0], &w[1], p, p1, p2, q, q1, q2))
        .collect::<Result<_>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{function_bank, SpectralFunction};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(a: i64, b: i64) -> ExtendedExponent {
        ExtendedExponent::ratio(a, b)
    }

    fn inf() -> ExtendedExponent {
        ExtendedExponent::infinity()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn dilation_law_examples() {
        let f0 = default_annulus_function(annulus_geometry());
        let b = SpaceSpec::new(Scale::B, rat(1, 1), e(2, 1), e(3, 1), inf(), false).unwrap();
        let base = lorentz_norm_of(&f0, &e(2, 1), &e(3, 1));
        let (pred0, comp0) = dilation_norm_law(&f0, 0, &b).unwrap();
        assert_eq!(pred0, base);
        assert!(rel(comp0, pred0) < 1e-9);
        let (pred3, comp3) = dilation_norm_law(&f0, 3, &b).unwrap();
        assert!(rel(pred3, 2f64.powf(1.5) * base) < 1e-15);
        assert!(rel(comp3, pred3) < 1e-9);
        for k in [-3, -1] {
            let (p, c) = dilation_norm_law(&f0, k, &b).unwrap();
            assert!(rel(c, p) < 1e-9, "k={k}: {c} vs {p}");
        }
    }

    #[test]
    fn modulation_law_single_and_flat_patterns() {
        let g = modulation_geometry();
        let (p, q) = (e(2, 1), e(3, 1));
        let psi = lorentz_norm_of(&bump_inverse(g.clone(), &modulation_bump_radius()).unwrap(), &p, &q);
        let one = [Complex64::new(1.0, 0.0)];
        let s = rat(1, 2);
        let pred = modulation_norm_law(&one, &s, &p, &q, &e(2, 1), &g).unwrap();
        assert!(rel(pred, 2f64.sqrt() * psi) < 1e-14);
        let comp = modulation_norm(&one, &s, &p, &q, &e(2, 1), &g).unwrap().value;
        assert!(rel(comp, pred) < 1e-6, "{comp} {pred}");
        let ones = [Complex64::new(1.0, 0.0); 4];
        let flat = modulation_norm_law(&ones, &rat(0, 1), &p, &q, &e(3, 1), &g).unwrap();
        assert!(rel(flat, 4f64.powf(1.0 / 3.0) * psi) < 1e-14);
        let comp = modulation_norm(&ones, &rat(0, 1), &p, &q, &e(3, 1), &g).unwrap().value;
        assert!(rel(comp, flat) < 1e-6);
    }

    fn desk_triple() -> TripleSpec {
        let f = |s: Rational, p: i64| SpaceSpec::new(Scale::F, s, e(p, 1), e(2, 1), e(2, 1), true).unwrap();
        TripleSpec { target: f(rat(1, 4), 4), left: f(rat(0, 1), 2), right: f(rat(1, 1), 2), theta: rat(1, 2) }
    }

    #[test]
    fn identical_triple_has_unit_ratio_and_homogeneity() {
        let bank = function_bank(&BankSpec::new("random-bandlimited", 2, 5, 1)).unwrap();
        let x = SpaceSpec::new(Scale::B, rat(1, 2), e(3, 1), e(2, 1), e(4, 1), false).unwrap();
        let t = TripleSpec { target: x.clone(), left: x.clone(), right: x, theta: rat(1, 3) };
        let f = &bank.members[0];
        assert!(rel(interpolation_ratio(f, &t).unwrap(), 1.0) < 1e-14);
        let spec = desk_triple();
        let r = interpolation_ratio(f, &spec).unwrap();
        let r3 = interpolation_ratio(&f.scaled(Complex64::new(-3.0, 0.0)), &spec).unwrap();
        assert!(rel(r3, r) < 1e-12);
    }

    #[test]
    fn scale_invariant_audit_has_flat_orbits() {
        let bank = function_bank(&BankSpec::new("random-bandlimited", 4, 11, 1)).unwrap();
        let spec = desk_triple();
        assert!(spec.is_scale_invariant(1));
        let t = ParamTuple {
            n: 1,
            s: rat(1, 4),
            s1: rat(0, 1),
            s2: rat(1, 1),
            p: e(4, 1),
            p1: e(2, 1),
            p2: e(2, 1),
            q: e(2, 1),
            q1: e(2, 1),
            q2: e(2, 1),
            r: e(2, 1),
            r1: e(2, 1),
            r2: e(2, 1),
            theta: rat(1, 2),
        };
        let claim = Claim { theorem_id: "interp-f-hom".into(), tuple: t };
        let report = ratio_audit(&bank, &spec, Some(&claim)).unwrap();
        assert_eq!(report.status, AuditStatus::Supported);
        assert!(report.sup_ratio.is_finite() && report.sup_ratio > 0.0);
        assert!(report.orbit_spread.unwrap() < 1.0 + 1e-9);
        assert_eq!(report.per_function.len(), 4);
        let again = ratio_audit(&bank, &spec, Some(&claim)).unwrap();
        assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5);
    }

    #[test]
    fn degenerate_member_is_skipped() {
        let mut bank = function_bank(&BankSpec::new("random-bandlimited", 2, 1, 1)).unwrap();
        bank.members.push(SampledFunction::zeros(bank.members[0].geometry.clone()));
        let report = ratio_audit(&bank, &desk_triple(), None).unwrap();
        assert!(report.per_function[2].ratio.is_none());
        assert!(report.per_function[2].skipped.is_some());
        assert_eq!(report.status, AuditStatus::Unclaimed);
    }

    fn violating_tuple() -> ParamTuple {
        // s* - s = -1/2 < 0 = n/p* - n/p
        ParamTuple {
            n: 1,
            s: rat(1, 1),
            s1: rat(0, 1),
            s2: rat(1, 1),
            p: e(2, 1),
            p1: e(2, 1),
            p2: e(2, 1),
            q: e(2, 1),
            q1: e(2, 1),
            q2: e(2, 1),
            r: e(2, 1),
            r1: e(2, 1),
            r2: e(2, 1),
            theta: rat(1, 2),
        }
    }

    #[test]
    fn dilation_witness_grows_at_predicted_rate() {
        let t = violating_tuple();
        let w = necessity_witness(&t, Scale::B, false, WitnessFamily::Dilation { direction: Direction::Up }, 6, false).unwrap();
        assert_eq!(w.predicted_exponent, 0.5);
        assert!(w.passed, "{w:?}");
        assert!(w.monotone);
        let mut csv = Vec::new();
        w.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 8);
        let ok = ParamTuple { s: rat(1, 4), ..t };
        assert!(matches!(
            necessity_witness(&ok, Scale::B, false, WitnessFamily::Dilation { direction: Direction::Up }, 6, false),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn witness_soundness_on_both_branches() {
        // n/p* - n/p < 0: only the expanding direction can blow up
        let t = ParamTuple { s: rat(-1, 1), p: e(1, 1), ..violating_tuple() };
        assert!(!common_necessary(&t, Homogeneity::Inhomogeneous));
        let up = dilation_growth_exponent(&t, Homogeneity::Inhomogeneous, Direction::Up);
        let down = dilation_growth_exponent(&t, Homogeneity::Inhomogeneous, Direction::Down);
        assert!(up.is_positive() || down.is_positive());
        let w = necessity_witness(&t, Scale::B, false, WitnessFamily::Dilation { direction: Direction::Down }, 5, false).unwrap();
        assert!(w.passed, "{w:?}");
    }

    #[test]
    fn modulation_witness_for_fine_index_embedding() {
        let t = ParamTuple { s1: rat(1, 2), s2: rat(1, 2), r1: inf(), r2: e(1, 1), ..violating_tuple() };
        let w = necessity_witness(&t, Scale::F, true, WitnessFamily::Modulation, 6, false).unwrap();
        assert_eq!(w.predicted_exponent, 1.0);
        assert!(w.passed, "{w:?}");
    }

    #[test]
    fn sequence_lemma_examples() {
        let (s1, s2, th) = (rat(0, 1), rat(1, 1), rat(1, 2));
        let single = sequence_interp_defect(&[(3, 2.5)], &s1, &s2, &th).unwrap();
        assert!(rel(single.lhs, single.rhs) < 1e-15);
        assert!(single.holds());
        for m in [0, 1, 5, 20, 40] {
            let a: Vec<(i32, f64)> = (0..=m).map(|j| (j, pow2(-(j as f64) * 0.5))).collect();
            let d = sequence_interp_defect(&a, &s1, &s2, &th).unwrap();
            assert!(rel(d.lhs, (m + 1) as f64) < 1e-12);
            assert!(rel(d.rhs, pow2(m as f64 * 0.25)) < 1e-12);
            assert!(d.holds());
        }
        assert!(matches!(sequence_interp_defect(&[(0, 1.0)], &s1, &s1, &th), Err(Error::EqualSmoothness)));
    }

    #[test]
    fn sequence_constant_dominates_sharp_oracle_and_random_sequences() {
        let c = sequence_constant(0.5, 1.0);
        let sharp = oracle::sharp_sequence_constant(0.5, 1.0);
        assert!(sharp <= c && sharp > 0.5 * c, "{sharp} {c}");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = 0.0f64;
        for _ in 0..2000 {
            let len = rng.gen_range(1..12);
            let a: Vec<(i32, f64)> = (0..len).map(|_| (rng.gen_range(-10..10), rng.gen_range(0.0..1.0))).collect();
            let d = sequence_interp_defect(&a, &rat(0, 1), &rat(1, 1), &rat(1, 2)).unwrap();
            worst = worst.max(d.lhs / d.rhs);
        }
        assert!(worst <= sharp * (1.0 + 1e-9));
    }

    #[test]
    fn bernstein_pure_exponential_and_dilation_invariance() {
        let g = Geometry::desk(1);
        let xi = 5.0 * g.freq_step();
        let (p, q) = (e(2, 1), e(4, 1));
        let wave = SampledFunction::from_fn(g.clone(), |x| Complex64::from_polar(2.0, xi * x[0]));
        let d = bernstein_defect(&wave, &p, &q).unwrap();
        // |f| = 2 on a box of measure 2L, d floored at one step π/L
        let expect = 1.0 / ((0.5f64).powf(0.25) * (2.0 * std::f64::consts::PI).sqrt());
        assert!(rel(d, expect) < 1e-12, "{d} {expect}");
        let bump = crate::grid::annulus_function(annulus_geometry(), 0.25, 1.0);
        let d0 = bernstein_defect(&bump, &p, &q).unwrap();
        for k in 1..=4 {
            let dk = bernstein_defect(&dilate_pow2(&bump, k).unwrap(), &p, &q).unwrap();
            assert!(rel(dk, d0) < 1e-12);
        }
        let full = SpectralFunction::from_symbol(Geometry::desk(1), |_| Complex64::new(1.0, 0.0)).to_physical();
        assert!(matches!(bernstein_defect(&full, &p, &q), Err(Error::NotBandLimited(_))));
    }

    #[test]
    fn diameter_of_planar_sets() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.3, 0.3], [1.0, 1.0]];
        assert!((diameter(pts) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(diameter(vec![[2.0, 0.0]]), 0.0);
    }

    #[test]
    fn holder_audit_is_reproducible() {
        let bank = function_bank(&BankSpec::new("indicator-sums", 5, 4, 1)).unwrap();
        let (p, p1, p2) = (e(2, 1), e(4, 1), e(4, 1));
        let (q, q1, q2) = (e(2, 1), e(4, 1), e(4, 1));
        let a = holder_audit(&bank, [&p, &p1, &p2, &q, &q1, &q2]).unwrap();
        let b = holder_audit(&bank, [&p, &p1, &p2, &q, &q1, &q2]).unwrap();
        assert!(a.is_finite());
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
