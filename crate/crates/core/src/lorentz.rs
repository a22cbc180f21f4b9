//! Level-set profiles and closed-form Lorentz quasi-norms on step functions.
//!
//! With values v₁ < … < v_M and tails μᵢ = |{|f| ≥ vᵢ}|, the quasi-norm
//! ‖f‖_{p,q}^q = p ∫₀^∞ α^{q−1} μ_f(α)^{q/p} dα equals
//! (p/q) Σᵢ μᵢ^{q/p}(vᵢ^q − v_{i−1}^q) = (p/q) Σᵢ vᵢ^q (μᵢ^{q/p} − μ_{i+1}^{q/p}).
//! The second form is evaluated, with the tail increments computed from the
//! exact cell counts so that no cancellation occurs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{format_rational, ExtendedExponent, Rational};
use crate::grid::SampledFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetProfile {
    pub values: Vec<f64>,
    pub tail_measures: Vec<f64>,
    pub counts: Vec<u64>,
    pub cell_volume: f64,
}

impl LevelSetProfile {
    /// Profile of the cell-wise constant function with the given magnitudes.
    pub fn from_magnitudes(magnitudes: &[f64], cell_volume: f64) -> Self {
        let mut vals: Vec<f64> = magnitudes.iter().copied().filter(|v| *v > 0.0).collect();
        vals.sort_unstable_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for v in vals {
            if values.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                values.push(v);
                counts.push(1);
            }
        }
        let mut tail_measures = vec![0.0; values.len()];
        let mut acc: u64 = 0;
        for i in (0..values.len()).rev() {
            acc += counts[i];
            tail_measures[i] = acc as f64 * cell_volume;
        }
        Self {
            values,
            tail_measures,
            counts,
            cell_volume,
        }
    }

    pub fn of(f: &SampledFunction) -> Self {
        Self::from_magnitudes(&f.abs_values(), f.geometry.cell_volume())
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// μ_f(α) = |{|f| > α}|, right-continuous in α.
    pub fn distribution(&self, alpha: f64) -> f64 {
        let i = self.values.partition_point(|v| *v <= alpha);
        self.tail_measures.get(i).copied().unwrap_or(0.0)
    }

    pub fn essential_sup(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["value", "tail_measure"])?;
        for (v, m) in self.values.iter().zip(&self.tail_measures) {
            wr.write_record([format!("{v:e}"), format!("{m:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// μᵢ^γ − μ_{i+1}^γ with μ_{i+1} = μᵢ − cᵢ, free of cancellation.
fn tail_increment(mu: f64, c: f64, gamma: f64) -> f64 {
    let ratio = c / mu;
    if ratio >= 1.0 {
        return mu.powf(gamma);
    }
    -mu.powf(gamma) * (gamma * (-ratio).ln_1p()).exp_m1()
}

/// The Lorentz quasi-norm of a step profile. For p = ∞ and q < ∞ the space is
/// {0}: the result is +∞ for a nonzero profile (see [`is_degenerate`]).
pub fn lorentz_norm(prof: &LevelSetProfile, p: &ExtendedExponent, q: &ExtendedExponent) -> f64 {
    if prof.is_empty() {
        return 0.0;
    }
    if p.is_infinite() {
        return if q.is_infinite() {
            prof.essential_sup()
        } else {
            f64::INFINITY
        };
    }
    let inv_p = p.reciprocal_f64();
    if q.is_infinite() {
        return prof
            .values
            .iter()
            .zip(&prof.tail_measures)
            .map(|(v, m)| v * m.powf(inv_p))
            .fold(0.0, f64::max);
    }
    let qf = q.to_f64();
    let gamma = qf * inv_p;
    let top = prof.essential_sup();
    let mut sum = 0.0;
    for i in 0..prof.values.len() {
        let c = prof.counts[i] as f64 * prof.cell_volume;
        let inc = if p == q { c } else { tail_increment(prof.tail_measures[i], c, gamma) };
        sum += (prof.values[i] / top).powf(qf) * inc;
    }
    top * (sum / gamma).powf(1.0 / qf)
}

pub fn is_degenerate(prof: &LevelSetProfile, p: &ExtendedExponent, q: &ExtendedExponent) -> bool {
    p.is_infinite() && !q.is_infinite() && !prof.is_empty()
}

/// As [`lorentz_norm`], but refuses the degenerate p = ∞, q < ∞ case.
pub fn lorentz_norm_finite(prof: &LevelSetProfile, p: &ExtendedExponent, q: &ExtendedExponent) -> Result<f64> {
    if is_degenerate(prof, p, q) {
        return Err(Error::ConventionViolation);
    }
    Ok(lorentz_norm(prof, p, q))
}

pub fn lorentz_norm_of(f: &SampledFunction, p: &ExtendedExponent, q: &ExtendedExponent) -> f64 {
    lorentz_norm(&LevelSetProfile::of(f), p, q)
}

/// (p/q)^{1/q} m^{1/p}: the quasi-norm of an indicator of measure m.
pub fn indicator_norm(m: f64, p: &ExtendedExponent, q: &ExtendedExponent) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    match (p.is_infinite(), q.is_infinite()) {
        (true, true) => 1.0,
        (true, false) => f64::INFINITY,
        (false, true) => m.powf(p.reciprocal_f64()),
        (false, false) => {
            let (pf, qf) = (p.to_f64(), q.to_f64());
            (pf / qf).powf(1.0 / qf) * m.powf(1.0 / pf)
        }
    }
}

/// ℓ^r norm of nonnegative entries, scaled to avoid overflow.
pub fn lr_norm(values: &[f64], r: &ExtendedExponent) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 || r.is_infinite() {
        return top;
    }
    let rf = r.to_f64();
    top * values.iter().map(|v| (v / top).powf(rf)).sum::<f64>().powf(1.0 / rf)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedOrder {
    LorentzOfLr,
    LrOfLorentz,
}

/// Pointwise ℓ^r of equally sized magnitude arrays.
pub fn pointwise_lr(seq: &[&[f64]], r: &ExtendedExponent) -> Vec<f64> {
    let len = seq.first().map_or(0, |s| s.len());
    let mut out = vec![0.0f64; len];
    if r.is_infinite() {
        for s in seq {
            for (o, v) in out.iter_mut().zip(s.iter()) {
                *o = o.max(*v);
            }
        }
        return out;
    }
    let rf = r.to_f64();
    let mut top = vec![0.0f64; len];
    for s in seq {
        for (t, v) in top.iter_mut().zip(s.iter()) {
            *t = t.max(*v);
        }
    }
    for s in seq {
        for ((o, v), t) in out.iter_mut().zip(s.iter()).zip(&top) {
            if *t > 0.0 {
                *o += (v / t).powf(rf);
            }
        }
    }
    for (o, t) in out.iter_mut().zip(&top) {
        *o = if *t > 0.0 { t * o.powf(1.0 / rf) } else { 0.0 };
    }
    out
}

pub fn mixed_norm_magnitudes(
    seq: &[&[f64]],
    cell_volume: f64,
    p: &ExtendedExponent,
    q: &ExtendedExponent,
    r: &ExtendedExponent,
    order: MixedOrder,
) -> f64 {
    match order {
        MixedOrder::LorentzOfLr => {
            let agg = pointwise_lr(seq, r);
            lorentz_norm(&LevelSetProfile::from_magnitudes(&agg, cell_volume), p, q)
        }
        MixedOrder::LrOfLorentz => {
            let norms: Vec<f64> = seq
                .iter()
                .map(|s| lorentz_norm(&LevelSetProfile::from_magnitudes(s, cell_volume), p, q))
                .collect();
            lr_norm(&norms, r)
        }
    }
}

pub fn mixed_norm(
    fs: &[SampledFunction],
    p: &ExtendedExponent,
    q: &ExtendedExponent,
    r: &ExtendedExponent,
    order: MixedOrder,
) -> Result<f64> {
    let Some(first) = fs.first() else {
        return Ok(0.0);
    };
    if fs.iter().any(|f| f.geometry != first.geometry) {
        return Err(Error::GridMismatch);
    }
    let mags: Vec<Vec<f64>> = fs.iter().map(|f| f.abs_values()).collect();
    let refs: Vec<&[f64]> = mags.iter().map(|m| m.as_slice()).collect();
    Ok(mixed_norm_magnitudes(&refs, first.geometry.cell_volume(), p, q, r, order))
}

/// ‖fg‖_{p,q} / (‖f‖_{p1,q1} ‖g‖_{p2,q2}) under 1/p = 1/p1 + 1/p2, 1/q ≤ 1/q1 + 1/q2.
#[allow(clippy::too_many_arguments)]
pub fn holder_defect(
    f: &SampledFunction,
    g: &SampledFunction,
    p: &ExtendedExponent,
    p1: &ExtendedExponent,
    p2: &ExtendedExponent,
    q: &ExtendedExponent,
    q1: &ExtendedExponent,
    q2: &ExtendedExponent,
) -> Result<f64> {
    let sum_p: Rational = p1.reciprocal() + p2.reciprocal();
    if p.reciprocal() != &sum_p {
        return Err(Error::ExponentMismatch(format!(
            "1/p = {} but 1/p1 + 1/p2 = {}",
            format_rational(p.reciprocal()),
            format_rational(&sum_p)
        )));
    }
    let sum_q: Rational = q1.reciprocal() + q2.reciprocal();
    if q.reciprocal() > &sum_q {
        return Err(Error::ExponentMismatch(format!(
            "1/q = {} exceeds 1/q1 + 1/q2 = {}",
            format_rational(q.reciprocal()),
            format_rational(&sum_q)
        )));
    }
    let prod = f.combine(g, |a, b| a * b)?;
    let num = lorentz_norm_of(&prod, p, q);
    let den = lorentz_norm_of(f, p1, q1) * lorentz_norm_of(g, p2, q2);
    if den == 0.0 {
        return Err(Error::DegenerateInput("a Hölder factor has zero norm".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::rat;
    use crate::grid::{dilate_pow2, Geometry};
    use crate::oracle;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(num: i64, den: i64) -> ExtendedExponent {
        ExtendedExponent::ratio(num, den)
    }

    fn inf() -> ExtendedExponent {
        ExtendedExponent::infinity()
    }

    /// The literal (p/q) Σ μᵢ^{q/p}(vᵢ^q − v_{i−1}^q) form.
    fn literal_form(prof: &LevelSetProfile, p: f64, q: f64) -> f64 {
        let mut prev = 0.0f64;
        let mut sum = 0.0;
        for (v, m) in prof.values.iter().zip(&prof.tail_measures) {
            sum += m.powf(q / p) * (v.powf(q) - prev.powf(q));
            prev = *v;
        }
        (p / q * sum).powf(1.0 / q)
    }

    fn random_simple(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        let levels = rng.gen_range(1..=6);
        let heights: Vec<f64> = (0..levels).map(|_| rng.gen_range(0.1..5.0)).collect();
        (0..len)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { heights[rng.gen_range(0..levels)] })
            .collect()
    }

    #[test]
    fn profile_examples() {
        let mags = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0];
        let prof = LevelSetProfile::from_magnitudes(&mags, 0.25);
        assert_eq!(prof.values, vec![1.0]);
        assert_eq!(prof.tail_measures, vec![2.0]);
        assert!(LevelSetProfile::from_magnitudes(&[0.0; 4], 1.0).is_empty());
        let two = [1.0, 1.0, 3.0, 0.0];
        let prof = LevelSetProfile::from_magnitudes(&two, 1.0);
        assert_eq!(prof.values, vec![1.0, 3.0]);
        assert_eq!(prof.tail_measures, vec![3.0, 1.0]);
        assert_eq!(prof.distribution(0.5), 3.0);
        assert_eq!(prof.distribution(1.0), 1.0);
        assert_eq!(prof.distribution(3.0), 0.0);
    }

    #[test]
    fn indicator_examples() {
        let one = LevelSetProfile::from_magnitudes(&[1.0], 1.0);
        assert!((lorentz_norm(&one, &e(2, 1), &e(1, 1)) - 2.0).abs() < 1e-15);
        let eight = LevelSetProfile::from_magnitudes(&[1.0; 8], 1.0);
        assert!((lorentz_norm(&eight, &e(3, 1), &e(3, 1)) - 2.0).abs() < 1e-15);
        let four = LevelSetProfile::from_magnitudes(&[1.0; 4], 1.0);
        assert!((lorentz_norm(&four, &e(2, 1), &inf()) - 2.0).abs() < 1e-15);
        assert_eq!(lorentz_norm(&four, &inf(), &inf()), 1.0);
        assert_eq!(lorentz_norm(&four, &inf(), &e(2, 1)), f64::INFINITY);
        assert!(is_degenerate(&four, &inf(), &e(2, 1)));
        assert!(matches!(lorentz_norm_finite(&four, &inf(), &e(2, 1)), Err(Error::ConventionViolation)));
        let empty = LevelSetProfile::from_magnitudes(&[], 1.0);
        assert_eq!(lorentz_norm_finite(&empty, &inf(), &e(2, 1)).unwrap(), 0.0);
    }

    #[test]
    fn indicator_formula_matches_quadrature_oracle() {
        for (p, q) in [(e(2, 1), e(1, 1)), (e(3, 2), e(4, 1)), (e(4, 1), e(3, 2)), (e(1, 1), e(1, 1))] {
            for m in [0.25, 1.0, 3.5] {
                let cells = (m / 0.25) as usize;
                let mags = vec![1.0; cells];
                let quad = oracle::lorentz_by_quadrature(&mags, 0.25, p.to_f64(), q.to_f64());
                let closed = indicator_norm(m, &p, &q);
                assert!((quad - closed).abs() <= 1e-9 * closed, "{p} {q} {m}: {quad} vs {closed}");
                let prof = LevelSetProfile::from_magnitudes(&mags, 0.25);
                assert!((lorentz_norm(&prof, &p, &q) - closed).abs() <= 1e-12 * closed);
            }
        }
    }

    #[test]
    fn closed_form_agrees_with_literal_form_and_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let mags = random_simple(&mut rng, 200);
            let cell = rng.gen_range(0.01..2.0);
            let prof = LevelSetProfile::from_magnitudes(&mags, cell);
            for (p, q) in [(e(2, 1), e(1, 1)), (e(3, 2), e(3, 1)), (e(5, 1), e(2, 1)), (e(1, 1), e(7, 2))] {
                let closed = lorentz_norm(&prof, &p, &q);
                let lit = literal_form(&prof, p.to_f64(), q.to_f64());
                assert!((closed - lit).abs() <= 1e-12 * lit);
                let quad = oracle::lorentz_by_quadrature(&mags, cell, p.to_f64(), q.to_f64());
                assert!((closed - quad).abs() <= 1e-9 * quad, "{p} {q} {cell} {mags:?}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn weak_type_is_sup_over_profile() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let mags = random_simple(&mut rng, 100);
            let prof = LevelSetProfile::from_magnitudes(&mags, 0.5);
            let p = e(3, 1);
            let direct = oracle::weak_norm_by_scan(&mags, 0.5, 3.0);
            let closed = lorentz_norm(&prof, &p, &inf());
            assert!((closed - direct).abs() <= 1e-12 * closed);
        }
    }

    #[test]
    fn unit_constant_embedding_fails_above_p() {
        let m = LevelSetProfile::from_magnitudes(&[1.0; 4], 1.0);
        let (p, q1) = (e(1, 1), e(3, 1));
        assert!(lorentz_norm(&m, &p, &inf()) > lorentz_norm(&m, &p, &q1));
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let prof = LevelSetProfile::from_magnitudes(&random_simple(&mut rng, 80), 0.5);
            let p = e(3, 1);
            for (lo, hi) in [(e(1, 1), e(2, 1)), (e(3, 2), e(3, 1)), (e(2, 1), inf()), (e(3, 1), inf())] {
                assert!(lorentz_norm(&prof, &p, &hi) <= lorentz_norm(&prof, &p, &lo) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn lpp_is_lebesgue() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let mags = random_simple(&mut rng, 300);
            let prof = LevelSetProfile::from_magnitudes(&mags, 0.125);
            for p in [e(1, 1), e(3, 2), e(2, 1), e(3, 1)] {
                let pf = p.to_f64();
                let plain = (mags.iter().map(|v| v.powf(pf)).sum::<f64>() * 0.125).powf(1.0 / pf);
                assert!((lorentz_norm(&prof, &p, &p) - plain).abs() <= 1e-12 * plain);
            }
        }
    }

    #[test]
    fn dilation_law_on_rescaled_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [1usize, 2] {
            let g = Geometry::new(n, if n == 1 { 256 } else { 32 }, rat(8, 1)).unwrap();
            let mags = random_simple(&mut rng, g.len());
            let f = SampledFunction::new(g, mags.iter().map(|v| Complex64::new(*v, 0.0)).collect()).unwrap();
            for (p, q) in [(e(2, 1), e(1, 1)), (e(3, 2), inf()), (e(4, 1), e(4, 1))] {
                let base = lorentz_norm_of(&f, &p, &q);
                for k in -4..=4 {
                    let d = dilate_pow2(&f, k).unwrap();
                    let expect = base * 2f64.powf(-(k as f64) * n as f64 / p.to_f64());
                    assert!((lorentz_norm_of(&d, &p, &q) - expect).abs() <= 1e-12 * expect);
                }
            }
        }
    }

    #[test]
    fn mixed_norm_examples() {
        let g = Geometry::new(1, 64, rat(4, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mk = |rng: &mut ChaCha8Rng| {
            SampledFunction::new(
                g.clone(),
                (0..64).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
            )
            .unwrap()
        };
        let f = mk(&mut rng);
        let (p, q, r) = (e(3, 1), e(2, 1), e(3, 2));
        let single = lorentz_norm_of(&f, &p, &q);
        for order in [MixedOrder::LorentzOfLr, MixedOrder::LrOfLorentz] {
            let v = mixed_norm(std::slice::from_ref(&f), &p, &q, &r, order).unwrap();
            assert!((v - single).abs() <= 1e-14 * single);
        }

        let seq: Vec<SampledFunction> = (0..3).map(|_| mk(&mut rng)).collect();
        let half = rat(1, 2);
        let powered: Vec<SampledFunction> = seq
            .iter()
            .map(|f| SampledFunction::new(g.clone(), f.samples.iter().map(|z| Complex64::new(z.norm().sqrt(), 0.0)).collect()).unwrap())
            .collect();
        for order in [MixedOrder::LorentzOfLr, MixedOrder::LrOfLorentz] {
            let lhs = mixed_norm(&powered, &p.divided_by(&half).unwrap(), &q.divided_by(&half).unwrap(), &r.divided_by(&half).unwrap(), order).unwrap();
            let rhs = mixed_norm(&seq, &p, &q, &r, order).unwrap().sqrt();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "{order:?}: {lhs} vs {rhs}");
            let one = mixed_norm(&seq, &p, &q, &e(1, 1), order).unwrap();
            let sup = mixed_norm(&seq, &p, &q, &inf(), order).unwrap();
            assert!(one >= sup);
        }

        let other = SampledFunction::zeros(Geometry::new(1, 32, rat(4, 1)).unwrap());
        assert!(matches!(mixed_norm(&[f, other], &p, &q, &r, MixedOrder::LorentzOfLr), Err(Error::GridMismatch)));
    }

    #[test]
    fn holder_examples() {
        let g = Geometry::new(1, 64, rat(4, 1)).unwrap();
        let f = SampledFunction::from_real_fn(g.clone(), |x| (-x[0] * x[0]).exp());
        let one = SampledFunction::from_real_fn(g.clone(), |_| 1.0);
        let d = holder_defect(&f, &one, &e(2, 1), &e(2, 1), &inf(), &e(3, 1), &e(3, 1), &inf()).unwrap();
        assert!((d - 1.0).abs() < 1e-14);

        let ind = SampledFunction::from_real_fn(g.clone(), |x| if x[0].abs() < 1.0 { 1.0 } else { 0.0 });
        let m = 2.0;
        let (p, p1, p2, q, q1, q2) = (e(1, 1), e(2, 1), e(2, 1), e(1, 1), e(2, 1), e(2, 1));
        let expect = indicator_norm(m, &p, &q) / (indicator_norm(m, &p1, &q1) * indicator_norm(m, &p2, &q2));
        let got = holder_defect(&ind, &ind, &p, &p1, &p2, &q, &q1, &q2).unwrap();
        assert!((got - expect).abs() < 1e-12 * expect);

        assert!(matches!(
            holder_defect(&ind, &ind, &e(2, 1), &e(2, 1), &e(2, 1), &q, &q1, &q2),
            Err(Error::ExponentMismatch(_))
        ));
        assert!(matches!(
            holder_defect(&ind, &ind, &p, &p1, &p2, &e(1, 1), &inf(), &inf()),
            Err(Error::ExponentMismatch(_))
        ));
    }

    #[test]
    fn profile_csv_export() {
        let prof = LevelSetProfile::from_magnitudes(&[1.0, 3.0, 3.0], 0.5);
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("value,tail_measure"));
    }

    fn arb_profile() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (prop::collection::vec(0u32..6, 1..60), 0.05f64..3.0)
            .prop_map(|(levels, cell)| (levels.into_iter().map(|l| l as f64 * 0.7).collect(), cell))
    }

    fn arb_pq() -> impl Strategy<Value = (ExtendedExponent, ExtendedExponent)> {
        ((1i64..=8, 1i64..=4), (0i64..=8, 1i64..=4)).prop_map(|((pn, pd), (qn, qd))| {
            let p = ExtendedExponent::finite(rat(pn.max(pd), pd)).unwrap();
            let q = if qn == 0 { inf() } else { ExtendedExponent::finite(rat(qn.max(qd), qd)).unwrap() };
            (p, q)
        })
    }

    proptest! {
        #[test]
        fn homogeneity((mags, cell) in arb_profile(), (p, q) in arb_pq(), c in 0.01f64..50.0) {
            let prof = LevelSetProfile::from_magnitudes(&mags, cell);
            let scaled: Vec<f64> = mags.iter().map(|v| v * c).collect();
            let prof_c = LevelSetProfile::from_magnitudes(&scaled, cell);
            let a = lorentz_norm(&prof_c, &p, &q);
            let b = c * lorentz_norm(&prof, &p, &q);
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn fine_index_embedding((mags, cell) in arb_profile(), (p, q1) in arb_pq(), (_, q2) in arb_pq()) {
            // Sharp constant (q₁/p)^{1/q₁ − 1/q₂}; it exceeds 1 once q₁ > p.
            let prof = LevelSetProfile::from_magnitudes(&mags, cell);
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            let c = (lo.to_f64() / p.to_f64()).powf(lo.reciprocal_f64() - hi.reciprocal_f64());
            prop_assert!(lorentz_norm(&prof, &p, &hi) <= c * lorentz_norm(&prof, &p, &lo) * (1.0 + 1e-12));
        }
    }
}
