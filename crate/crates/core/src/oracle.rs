//! Independent numerical routes used to cross-check the closed forms.
//!
//! Nothing here shares code with the production paths: norms are recomputed
//! from raw magnitudes by blind quadrature or brute force.

use crate::grid::SampledFunction;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    let mut outer = [(0.0, 0.0); 2];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let (l, r) = (f(c - x), f(c + x));
        if i < 2 {
            outer[i] = (l, r);
        }
        kron += KRONROD_WEIGHTS[i] * (l + r);
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * (l + r);
        }
    }
    // A jump between the outermost node and an endpoint is invisible to
    // both rules, so the endpoint value is compared with the linear
    // extrapolation from the two outermost nodes.
    let t = (1.0 - GK_NODES[0]) / (GK_NODES[0] - GK_NODES[1]);
    let gap = (f(a) - outer[0].0 - t * (outer[0].0 - outer[1].0)).abs()
        + (f(b) - outer[0].1 - t * (outer[0].1 - outer[1].1)).abs();
    let err = ((kron - gauss) * h).abs() + gap * h * (1.0 - GK_NODES[0]);
    (kron * h, err)
}

/// Adaptive Gauss–Kronrod with an absolute tolerance per accepted interval.
/// Jumps are located by bisection, so no breakpoints need to be known. An
/// interval is accepted only when both halves agree with the whole as well,
/// which guards against a jump hiding between the nodes.
pub fn adaptive_quadrature(f: &impl Fn(f64) -> f64, a: f64, b: f64, leaf_tol: f64) -> f64 {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (whole, err) = gk15(f, lo, hi);
        let (left, err_l) = gk15(f, lo, mid);
        let (right, err_r) = gk15(f, mid, hi);
        let split = left + right;
        let agreed = err <= leaf_tol && err_l + err_r <= leaf_tol && (whole - split).abs() <= leaf_tol;
        if agreed || depth >= 90 {
            total += split;
        } else {
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

/// ‖f‖_{p,q} from p ∫₀^∞ α^{q−1} |{|f| > α}|^{q/p} dα, finite p and q.
pub fn lorentz_by_quadrature(magnitudes: &[f64], cell_volume: f64, p: f64, q: f64) -> f64 {
    let mut sorted: Vec<f64> = magnitudes.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let top = sorted.last().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return 0.0;
    }
    let total = sorted.len() as f64 * cell_volume;
    let gamma = q / p;
    let mu = |u: f64| {
        let above = sorted.len() - sorted.partition_point(|v| *v <= u * top);
        above as f64 * cell_volume / total
    };
    let integrand = |u: f64| u.powf(q - 1.0) * mu(u).powf(gamma);
    let integral = adaptive_quadrature(&integrand, 0.0, 1.0, 1e-15);
    top * total.powf(1.0 / p) * (p * integral).powf(1.0 / q)
}

/// sup_α α |{|f| > α}|^{1/p}, scanning every sample value by brute force.
pub fn weak_norm_by_scan(magnitudes: &[f64], cell_volume: f64, p: f64) -> f64 {
    magnitudes
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| {
            let count = magnitudes.iter().filter(|w| *w >= v).count();
            v * (count as f64 * cell_volume).powf(1.0 / p)
        })
        .fold(0.0, f64::max)
}

/// Sharp constant of Σ 2^{js*}|a_j| ≤ C (sup 2^{js1}|a_j|)^{1−θ} (sup 2^{js2}|a_j|)^θ
/// for δ = |s2 − s1|. The extremal sequences are a_j = min(A 2^{−js1}, B 2^{−js2}),
/// so the constant is the supremum over the crossover offset x ∈ [0, 1) of
/// Σ_j min(2^{(j−x)θδ}, 2^{−(j−x)(1−θ)δ}), found here by a brute-force scan.
pub fn sharp_sequence_constant(theta: f64, delta: f64) -> f64 {
    let (up, down) = (theta * delta, (1.0 - theta) * delta);
    let span = (60.0 / up.min(down)).ceil() as i64 + 2;
    (0..=4000)
        .map(|i| {
            let x = i as f64 / 4000.0;
            (-span..=span)
                .map(|j| {
                    let t = j as f64 - x;
                    (t * up).exp2().min((-t * down).exp2())
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Sixth-order central finite-difference Laplacian of the real part.
pub fn laplacian_fd(f: &SampledFunction) -> Vec<f64> {
    const W: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let g = &f.geometry;
    let np = g.points as isize;
    let h2 = g.spacing() * g.spacing();
    let at = |a: isize, b: isize| {
        let (a, b) = (a.rem_euclid(np) as usize, b.rem_euclid(np) as usize);
        f.samples[if g.n == 1 { a } else { a * g.points + b }].re
    };
    (0..g.len())
        .map(|flat| {
            let (a, b) = if g.n == 1 { (flat as isize, 0) } else { ((flat / g.points) as isize, (flat % g.points) as isize) };
            let mut acc = W[0] * at(a, b) * g.n as f64;
            for (k, w) in W.iter().enumerate().skip(1) {
                let k = k as isize;
                acc += w * (at(a + k, b) + at(a - k, b));
                if g.n == 2 {
                    acc += w * (at(a, b + k) + at(a, b - k));
                }
            }
            acc / h2
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_of_smooth_and_step_integrands() {
        let v = adaptive_quadrature(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-15);
        assert!((v - 2.0).abs() < 1e-13);
        let step = adaptive_quadrature(&|x: f64| if x > 0.3 { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-15);
        assert!((step - 0.7).abs() < 1e-12);
    }
}
