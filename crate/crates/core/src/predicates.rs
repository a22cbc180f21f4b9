//! The parameter-region conditions of the interpolation, embedding and
//! Gagliardo–Nirenberg statements, evaluated in exact rational arithmetic.
//!
//! Every statement is a list of labelled clauses together with a role:
//! sufficient conditions, necessary conditions ("only if") or a full
//! characterisation. Standing hypotheses (exponent ranges and the shape of
//! the fine indices) are applicability guards, so `false` always means that
//! the condition fails and never that the tuple is out of scope.
//!
//! Embedding statements read the source space from slot 1 and the target
//! from slot 2 of the tuple; `s`, `p`, `q`, `r` and `θ` are ignored there.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{
    common_necessary, int, rat, star_values, ExtendedExponent, Homogeneity, ParamTuple, Rational,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    True,
    False,
    /// Inside the necessary region but not covered by any proven sufficient
    /// condition. Numerical audits can only add evidence here.
    Open,
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Open => "open",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// The clauses are sufficient.
    Sufficient,
    /// The clauses are necessary; sufficiency comes from a delegate, if any.
    Necessary,
    /// The clauses characterise the region.
    Characterization,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionVerdict {
    pub theorem_id: String,
    pub applicable: bool,
    pub matched_clauses: Vec<String>,
    /// Clauses of the delegate statement that establish sufficiency.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sufficiency_via: Vec<String>,
    pub sufficient: Verdict,
    pub necessary_region_member: Verdict,
    pub iff_holds: Verdict,
}

/// Exact quantities shared by all clauses. Exponents are kept as reciprocals.
struct Ctx {
    n: Rational,
    theta: Rational,
    s: Rational,
    s1: Rational,
    s2: Rational,
    ss: Rational,
    p: Rational,
    p1: Rational,
    p2: Rational,
    ps: Rational,
    q: Rational,
    q1: Rational,
    q2: Rational,
    qs: Rational,
    r: Rational,
    r1: Rational,
    r2: Rational,
    rs: Rational,
    /// s* − s
    gs: Rational,
    /// n/p* − n/p
    gp: Rational,
    /// n/p2 − n/p1
    jump: Rational,
    /// n/p1 − n/p2, the integrability drop of an embedding
    drop: Rational,
}

impl Ctx {
    fn new(t: &ParamTuple) -> Self {
        let st = star_values(t);
        let n = int(t.n as i64);
        let rc = |e: &ExtendedExponent| e.reciprocal().clone();
        let (p, p1, p2) = (rc(&t.p), rc(&t.p1), rc(&t.p2));
        Ctx {
            gs: &st.s_star - &t.s,
            gp: &n * (&st.p_star_recip - &p),
            jump: &n * (&p2 - &p1),
            drop: &n * (&p1 - &p2),
            n,
            theta: t.theta.clone(),
            s: t.s.clone(),
            s1: t.s1.clone(),
            s2: t.s2.clone(),
            ss: st.s_star,
            p,
            p1,
            p2,
            ps: st.p_star_recip,
            q: rc(&t.q),
            q1: rc(&t.q1),
            q2: rc(&t.q2),
            qs: st.q_star_recip,
            r: rc(&t.r),
            r1: rc(&t.r1),
            r2: rc(&t.r2),
            rs: st.r_star_recip,
        }
    }

    fn inhom(&self) -> bool {
        self.gs >= self.gp && !self.gp.is_negative()
    }

    fn hom(&self) -> bool {
        self.gs == self.gp && !self.gp.is_negative()
    }

    /// s2 − s1 ≠ n/p2 − n/p1
    fn off_line(&self) -> bool {
        &self.s2 - &self.s1 != self.jump
    }

    fn strict_inhom(&self) -> bool {
        self.gs > self.gp && self.gp.is_positive()
    }

    fn on_line_positive(&self) -> bool {
        self.gs == self.gp && self.gp.is_positive()
    }

    fn emb_gap(&self) -> Rational {
        &self.s1 - &self.s2
    }
}

/// Exponent comparison a ≤ b through reciprocals.
fn le(a: &Rational, b: &Rational) -> bool {
    a >= b
}

fn finite(x: &Rational) -> bool {
    x.is_positive()
}

/// 1 < p < ∞
fn open_range(x: &Rational) -> bool {
    x.is_positive() && *x < Rational::one()
}

fn all_finite(c: &Ctx) -> bool {
    finite(&c.p) && finite(&c.p1) && finite(&c.p2)
}

fn all_open(c: &Ctx) -> bool {
    open_range(&c.p) && open_range(&c.p1) && open_range(&c.p2)
}

fn anywhere(_: &Ctx) -> bool {
    true
}

fn q_target_star(c: &Ctx) -> bool {
    c.q == c.qs
}

fn r_target_star(c: &Ctx) -> bool {
    c.r == c.rs
}

/// r = 1 with r1 = r2 = ∞
fn r_limit(c: &Ctx) -> bool {
    c.r.is_one() && c.r1.is_zero() && c.r2.is_zero()
}

/// q = 1 with q1 = q2 = ∞
fn q_limit(c: &Ctx) -> bool {
    c.q.is_one() && c.q1.is_zero() && c.q2.is_zero()
}

/// 1/p = (1−θ)/p1 + θ(1/p2 − s2/n), the scaling relation of the
/// Gagliardo–Nirenberg inequalities.
fn gn_relation(c: &Ctx) -> bool {
    let one = Rational::one();
    c.p == (&one - &c.theta) * &c.p1 + &c.theta * (&c.p2 - &c.s2 / &c.n)
}

/// 1/p1 ≠ 1/p2 − s2/n
fn gn_nondegenerate(c: &Ctx) -> bool {
    c.p1 != &c.p2 - &c.s2 / &c.n
}

/// Shape shared by both Gagliardo–Nirenberg statements: plain Lebesgue
/// smoothness in the target and first factor, s2 > 0, 1 < p ≤ ∞, and the
/// target fine index 1 for finite p (∞ otherwise).
fn gn_shape(c: &Ctx) -> bool {
    let q_ok = if c.p.is_zero() { c.q.is_zero() } else { c.q.is_one() };
    c.s.is_zero() && c.s1.is_zero() && c.s2.is_positive() && c.p < Rational::one() && q_ok && c.q2.is_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Envelope {
    None,
    Interpolation(Homogeneity),
    Embedding(Homogeneity),
}

type Pred = fn(&Ctx) -> bool;

pub struct Theorem {
    pub id: &'static str,
    pub role: Role,
    pub summary: &'static str,
    /// True when the statement is invariant under exchanging the endpoints.
    pub symmetric: bool,
    domain: Pred,
    /// Where the converse direction of a characterisation is asserted.
    converse_domain: Pred,
    clauses: Vec<(&'static str, Pred)>,
    /// Hand-derived closed form of a characterised region, an independent
    /// route to the same set as the clause list.
    closed_form: Option<Pred>,
    delegate: Option<&'static str>,
    /// Known necessary region of a sufficiency statement.
    necessary: Option<Pred>,
    envelope: Envelope,
}

impl Theorem {
    fn new(id: &'static str, role: Role, summary: &'static str, domain: Pred) -> Self {
        Theorem {
            id,
            role,
            summary,
            symmetric: false,
            domain,
            converse_domain: anywhere,
            clauses: Vec::new(),
            closed_form: None,
            delegate: None,
            necessary: None,
            envelope: Envelope::None,
        }
    }

    fn clause(mut self, label: &'static str, pred: Pred) -> Self {
        self.clauses.push((label, pred));
        self
    }

    fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    fn converse_on(mut self, d: Pred) -> Self {
        self.converse_domain = d;
        self
    }

    fn closed_form(mut self, f: Pred) -> Self {
        self.closed_form = Some(f);
        self
    }

    fn delegate(mut self, id: &'static str) -> Self {
        self.delegate = Some(id);
        self
    }

    fn necessary(mut self, f: Pred) -> Self {
        self.necessary = Some(f);
        self
    }

    fn envelope(mut self, e: Envelope) -> Self {
        self.envelope = e;
        self
    }

    pub fn clause_labels(&self) -> Vec<&'static str> {
        self.clauses.iter().map(|(l, _)| *l).collect()
    }

    pub fn delegate_id(&self) -> Option<&'static str> {
        self.delegate
    }
}

use Homogeneity::{Homogeneous as Hom, Inhomogeneous as Inhom};

fn build_catalog() -> Vec<Theorem> {
    use Role::*;
    let mut v = Vec::new();

    // Embeddings between Triebel-Lizorkin-Lorentz and Besov-Lorentz spaces.
    v.push(
        Theorem::new("embed-f-inhom", Characterization, "F(s1,r1;p1,q1) into F(s2,r2;p2,q2), inhomogeneous, 1 <= p1,p2 < inf", |c| {
            finite(&c.p1) && finite(&c.p2)
        })
        .clause("(i)", |c| c.s1 == c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2) && le(&c.r1, &c.r2))
        .clause("(ii)", |c| c.s1 > c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2))
        .clause("(iii)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.q1, &c.q2))
        .clause("(iv)", |c| c.emb_gap() > c.drop && c.drop.is_positive())
        .closed_form(|c| {
            let g = c.emb_gap();
            g >= c.drop
                && !c.drop.is_negative()
                && (c.p1 != c.p2 || (le(&c.q1, &c.q2) && (c.s1 != c.s2 || le(&c.r1, &c.r2))))
                && (!(g == c.drop && c.drop.is_positive()) || le(&c.q1, &c.q2))
        })
        .envelope(Envelope::Embedding(Inhom)),
    );
    v.push(
        Theorem::new("embed-b-inhom", Characterization, "B(s1,r1;p1,q1) into B(s2,r2;p2,q2), inhomogeneous; sufficiency also for p_i = q_i = inf", anywhere)
            .converse_on(|c| finite(&c.p1) && finite(&c.p2))
            .clause("(i)", |c| c.s1 == c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2) && le(&c.r1, &c.r2))
            .clause("(ii)", |c| c.s1 > c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2))
            .clause("(iii)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.r1, &c.r2))
            .clause("(iv)", |c| c.emb_gap() > c.drop && c.drop.is_positive())
            .closed_form(|c| {
                let g = c.emb_gap();
                g >= c.drop
                    && !c.drop.is_negative()
                    && (c.p1 != c.p2 || (le(&c.q1, &c.q2) && (c.s1 != c.s2 || le(&c.r1, &c.r2))))
                    && (!(g == c.drop && c.drop.is_positive()) || le(&c.r1, &c.r2))
            })
            .envelope(Envelope::Embedding(Inhom)),
    );
    // Jawerth embeddings for the plain scales q_i = p_i, composed with the
    // trivial monotone embeddings in the free sequence indices.
    let plain = |c: &Ctx| finite(&c.p1) && finite(&c.p2) && c.q1 == c.p1 && c.q2 == c.p2;
    v.push(
        Theorem::new("embed-jawerth-ff", Sufficient, "F(s1,r1;p1) into F(s2,r2;p2), homogeneous, plain Lebesgue scale", plain)
            .clause("(main)", |c| c.emb_gap() == c.drop && c.drop.is_positive())
            .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-jawerth-fb", Sufficient, "F(s1,r1;p1) into B(s2,r2;p2) for r2 >= p1, homogeneous, plain Lebesgue scale", plain)
            .clause("(main)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.p1, &c.r2))
            .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-jawerth-bb", Sufficient, "B(s1,r1;p1) into B(s2,r2;p2) for r1 <= r2, homogeneous, plain Lebesgue scale", plain)
            .clause("(main)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.r1, &c.r2))
            .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-f-hom", Characterization, "homogeneous F into F, 1 < p1,p2 < inf", |c| {
            open_range(&c.p1) && open_range(&c.p2)
        })
        .clause("(i)", |c| c.s1 == c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2) && le(&c.r1, &c.r2))
        .clause("(ii)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.q1, &c.q2))
        .closed_form(|c| {
            c.emb_gap() == c.drop
                && !c.drop.is_negative()
                && le(&c.q1, &c.q2)
                && (!c.drop.is_zero() || le(&c.r1, &c.r2))
        })
        .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-b-hom", Sufficient, "homogeneous B into B, 1 <= p1,p2 <= inf", anywhere)
            .clause("(i)", |c| c.s1 == c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2) && le(&c.r1, &c.r2))
            .clause("(ii)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.r1, &c.r2))
            .necessary(|c| c.emb_gap() == c.drop && !c.drop.is_negative() && le(&c.r1, &c.r2))
            .envelope(Envelope::Embedding(Hom)),
    );
    let open_pair = |c: &Ctx| open_range(&c.p1) && open_range(&c.p2);
    v.push(
        Theorem::new("embed-hom-f-to-b", Sufficient, "homogeneous F(s1,r1;p1,q1) into B(s2,r2;p2,q2) for q1 <= r2", open_pair)
            .clause("(main)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.q1, &c.r2))
            .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-hom-b-to-f", Sufficient, "homogeneous B(s1,r1;p1,q1) into F(s2,r2;p2,q2) for r1 <= q2", open_pair)
            .clause("(main)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.r1, &c.q2))
            .envelope(Envelope::Embedding(Hom)),
    );
    v.push(
        Theorem::new("embed-h-inhom", Characterization, "inhomogeneous Sobolev-Lorentz H(s1;p1,q1) into H(s2;p2,q2)", open_pair)
            .clause("(i)", |c| c.s1 >= c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q2))
            .clause("(ii)", |c| c.emb_gap() == c.drop && c.drop.is_positive() && le(&c.q1, &c.q2))
            .clause("(iii)", |c| c.emb_gap() > c.drop && c.drop.is_positive())
            .closed_form(|c| {
                let g = c.emb_gap();
                g >= c.drop && !c.drop.is_negative() && ((c.p1 != c.p2 && g != c.drop) || le(&c.q1, &c.q2))
            })
            .envelope(Envelope::Embedding(Inhom)),
    );
    v.push(
        Theorem::new("embed-h-hom", Characterization, "homogeneous Sobolev-Lorentz embedding", open_pair)
            .clause("(main)", |c| c.emb_gap() == c.drop && !c.drop.is_negative() && le(&c.q1, &c.q2))
            .closed_form(|c| !(c.emb_gap() != c.drop || c.drop.is_negative() || c.q1 < c.q2))
            .envelope(Envelope::Embedding(Hom)),
    );

    // Necessary condition shared by every interpolation inequality.
    v.push(
        Theorem::new("common-inhom", Necessary, "s* - s >= n/p* - n/p >= 0", anywhere)
            .clause("(main)", Ctx::inhom)
            .symmetric(),
    );
    v.push(
        Theorem::new("common-hom", Necessary, "s* - s = n/p* - n/p >= 0", anywhere)
            .clause("(main)", Ctx::hom)
            .symmetric(),
    );

    // Triebel-Lizorkin-Lorentz interpolation, inhomogeneous.
    v.push(
        Theorem::new("interp-f-inhom", Sufficient, "inhomogeneous F interpolation, 1 <= p,p1,p2 < inf", all_finite)
            .clause("(i)", |c| c.inhom() && le(&c.qs, &c.q) && le(&c.rs, &c.r))
            .clause("(ii)", |c| {
                c.inhom() && c.s1 == c.s2 && c.ps == c.p && c.p1 != c.p2 && le(&c.r1, &c.r) && le(&c.r2, &c.r)
            })
            .clause("(iii)", |c| c.inhom() && c.s1 != c.s2 && c.ps == c.p && le(&c.qs, &c.q))
            .clause("(iv)", |c| c.inhom() && c.ss > c.s && le(&c.qs, &c.q))
            .clause("(v)", |c| c.inhom() && c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
            .clause("(vi)", |c| c.inhom() && c.strict_inhom())
            .clause("(vii)", |c| c.inhom() && c.on_line_positive() && c.off_line())
            .necessary(Ctx::inhom)
            .envelope(Envelope::Interpolation(Inhom))
            .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-inhom-star", Characterization, "inhomogeneous F interpolation with q = q*, r = r*", |c| {
            all_finite(c) && q_target_star(c) && r_target_star(c)
        })
        .clause("(main)", Ctx::inhom)
        .closed_form(|c| c.gs >= c.gp && c.gp >= Rational::zero())
        .delegate("interp-f-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-inhom-r1", Characterization, "inhomogeneous F interpolation with r = 1, r1 = r2 = inf, q = q*", |c| {
            all_open(c) && r_limit(c) && q_target_star(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2)
        .clause("(ii)", |c| c.ss > c.s && c.inhom())
        .closed_form(|c| c.inhom() && (c.ss != c.s || c.s1 != c.s2))
        .delegate("interp-f-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-inhom-q1", Necessary, "inhomogeneous F interpolation with q = 1, q1 = q2 = inf, r = r*", |c| {
            all_open(c) && q_limit(c) && r_target_star(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.p1 != c.p2 && c.off_line())
        .clause("(ii)", |c| c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
        .clause("(iii)", |c| c.on_line_positive() && c.off_line())
        .clause("(iv)", Ctx::strict_inhom)
        .delegate("interp-f-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-inhom-q1r1", Necessary, "inhomogeneous F interpolation with q = r = 1, q_i = r_i = inf", |c| {
            all_open(c) && q_limit(c) && r_limit(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2 && c.p1 != c.p2 && c.off_line())
        .clause("(ii)", |c| c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
        .clause("(iii)", |c| c.on_line_positive() && c.off_line())
        .clause("(iv)", Ctx::strict_inhom)
        .delegate("interp-f-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );

    // Triebel-Lizorkin-Lorentz interpolation, homogeneous.
    v.push(
        Theorem::new("interp-f-hom", Sufficient, "homogeneous F interpolation, 1 < p,p1,p2 < inf", all_open)
            .clause("(i)", |c| c.hom() && le(&c.qs, &c.q) && le(&c.rs, &c.r))
            .clause("(ii)", |c| {
                c.hom() && c.s == c.s1 && c.s1 == c.s2 && c.p1 != c.p2 && le(&c.r1, &c.r) && le(&c.r2, &c.r)
            })
            .clause("(iii)", |c| c.hom() && c.ss == c.s && c.s1 != c.s2 && le(&c.qs, &c.q))
            .clause("(iv)", |c| c.hom() && c.ss > c.s && le(&c.qs, &c.q))
            .clause("(v)", |c| c.hom() && c.ss > c.s && c.off_line())
            .necessary(Ctx::hom)
            .envelope(Envelope::Interpolation(Hom))
            .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-hom-star", Characterization, "homogeneous F interpolation with q = q*, r = r*", |c| {
            all_open(c) && q_target_star(c) && r_target_star(c)
        })
        .clause("(main)", Ctx::hom)
        .closed_form(|c| c.gs == c.gp && c.gs >= Rational::zero())
        .delegate("interp-f-hom")
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-hom-r1", Characterization, "homogeneous F interpolation with r = 1, r1 = r2 = inf, q = q*", |c| {
            all_open(c) && r_limit(c) && q_target_star(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2)
        .clause("(ii)", Ctx::on_line_positive)
        .closed_form(|c| c.hom() && (c.ss != c.s || c.s1 != c.s2))
        .delegate("interp-f-hom")
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-hom-q1", Necessary, "homogeneous F interpolation with q = 1, q1 = q2 = inf, r = r*", |c| {
            all_open(c) && q_limit(c) && r_target_star(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.p1 != c.p2 && c.off_line())
        .clause("(ii)", |c| c.on_line_positive() && c.off_line())
        .delegate("interp-f-hom")
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-hom-q1r1", Necessary, "homogeneous F interpolation with q = r = 1, q_i = r_i = inf", |c| {
            all_open(c) && q_limit(c) && r_limit(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2 && c.p1 != c.p2 && c.off_line())
        .clause("(ii)", |c| c.on_line_positive() && c.off_line())
        .delegate("interp-f-hom")
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-f-hom-limiting", Sufficient, "homogeneous F interpolation with r = 1, r1 = r2 = inf, 1 <= p,p1,p2 < inf", |c| {
            all_finite(c) && r_limit(c)
        })
        .clause("(i)", |c| {
            c.ss == c.s
                && c.s1 != c.s2
                && [&c.p, &c.p1, &c.p2, &c.q, &c.q1, &c.q2].iter().all(|x| x.is_one())
        })
        .clause("(ii)", |c| c.on_line_positive() && c.off_line())
        .necessary(Ctx::hom)
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );

    // Besov-Lorentz interpolation.
    v.push(
        Theorem::new("interp-b-inhom", Sufficient, "inhomogeneous B interpolation, 1 <= p,p1,p2 <= inf", anywhere)
            .clause("(i)", |c| c.inhom() && le(&c.qs, &c.q) && le(&c.rs, &c.r))
            .clause("(ii)", |c| c.inhom() && c.ps == c.p && c.p1 != c.p2 && le(&c.rs, &c.r))
            .clause("(iii)", |c| c.inhom() && c.ps > c.p && le(&c.rs, &c.r))
            .clause("(iv)", |c| {
                c.inhom() && c.s1 != c.s2 && c.p == c.p1 && c.p1 == c.p2 && le(&c.q1, &c.q) && le(&c.q2, &c.q)
            })
            .clause("(v)", |c| c.inhom() && c.ss > c.s && c.ps == c.p && le(&c.qs, &c.q))
            .clause("(vi)", |c| c.inhom() && c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
            .clause("(vii)", |c| c.inhom() && c.strict_inhom())
            .clause("(viii)", |c| c.inhom() && c.on_line_positive() && c.off_line())
            .necessary(Ctx::inhom)
            .envelope(Envelope::Interpolation(Inhom))
            .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-hom", Sufficient, "homogeneous B interpolation, 1 <= p,p1,p2 <= inf", anywhere)
            .clause("(i)", |c| c.hom() && le(&c.qs, &c.q) && le(&c.rs, &c.r))
            .clause("(ii)", |c| c.hom() && c.ss == c.s && c.p1 != c.p2 && le(&c.rs, &c.r))
            .clause("(iii)", |c| c.hom() && c.ss > c.s && le(&c.rs, &c.r))
            .clause("(iv)", |c| {
                c.hom() && c.ss == c.s && c.s1 != c.s2 && c.p1 == c.p2 && le(&c.q1, &c.q) && le(&c.q2, &c.q)
            })
            .clause("(v)", |c| c.hom() && c.ss > c.s && c.off_line())
            .necessary(Ctx::hom)
            .envelope(Envelope::Interpolation(Hom))
            .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-inhom-star", Characterization, "inhomogeneous B interpolation with q = q*, r = r*", |c| {
            q_target_star(c) && r_target_star(c)
        })
        .clause("(main)", Ctx::inhom)
        .closed_form(|c| c.gs >= c.gp && c.gp >= Rational::zero())
        .delegate("interp-b-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-hom-star", Characterization, "homogeneous B interpolation with q = q*, r = r*", |c| {
            q_target_star(c) && r_target_star(c)
        })
        .clause("(main)", Ctx::hom)
        .closed_form(|c| c.gs == c.gp && c.gs >= Rational::zero())
        .delegate("interp-b-hom")
        .envelope(Envelope::Interpolation(Hom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-inhom-q1", Characterization, "inhomogeneous B interpolation with q = 1, q1 = q2 = inf, r = r*, 1 < p < inf, 1 < p1,p2 <= inf", |c| {
            open_range(&c.p) && c.p1 < Rational::one() && c.p2 < Rational::one() && q_limit(c) && r_target_star(c)
        })
        .clause("(i)", |c| c.ss >= c.s && c.ps == c.p && c.p1 != c.p2)
        .clause("(ii)", |c| c.gs >= c.gp && c.gp.is_positive())
        .closed_form(|c| c.inhom() && (c.ps != c.p || c.p1 != c.p2))
        .delegate("interp-b-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-inhom-r1", Necessary, "inhomogeneous B interpolation with r = 1, r1 = r2 = inf, q = q*", |c| {
            all_open(c) && r_limit(c) && q_target_star(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2 && c.off_line())
        .clause("(ii)", |c| c.ss > c.s && c.ps == c.p)
        .clause("(iii)", |c| c.on_line_positive() && c.off_line())
        .clause("(iv)", Ctx::strict_inhom)
        .delegate("interp-b-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );
    v.push(
        Theorem::new("interp-b-inhom-q1r1", Necessary, "inhomogeneous B interpolation with q = r = 1, q_i = r_i = inf", |c| {
            all_open(c) && q_limit(c) && r_limit(c)
        })
        .clause("(i)", |c| c.ss == c.s && c.ps == c.p && c.s1 != c.s2 && c.p1 != c.p2 && c.off_line())
        .clause("(ii)", |c| c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
        .clause("(iii)", |c| c.on_line_positive() && c.off_line())
        .clause("(iv)", Ctx::strict_inhom)
        .delegate("interp-b-inhom")
        .envelope(Envelope::Interpolation(Inhom))
        .symmetric(),
    );

    // Sobolev-Lorentz interpolation; the r indices play no role.
    v.push(
        Theorem::new("interp-h-inhom", Sufficient, "inhomogeneous Sobolev-Lorentz interpolation, 1 < p,p1,p2 < inf", all_open)
            .clause("(i)", |c| c.inhom() && le(&c.qs, &c.q))
            .clause("(ii)", |c| c.inhom() && c.s1 == c.s2 && c.ps == c.p && c.p1 != c.p2)
            .clause("(iii)", |c| c.inhom() && c.ss > c.s && c.ps == c.p && c.p1 != c.p2)
            .clause("(iv)", |c| c.inhom() && c.strict_inhom())
            .clause("(v)", |c| c.inhom() && c.on_line_positive() && c.off_line())
            .necessary(Ctx::inhom)
            .envelope(Envelope::Interpolation(Inhom))
            .symmetric(),
    );
    v.push(
        Theorem::new("interp-h-hom", Sufficient, "homogeneous Sobolev-Lorentz interpolation, 1 < p,p1,p2 < inf", all_open)
            .clause("(i)", |c| c.hom() && le(&c.qs, &c.q))
            .clause("(ii)", |c| c.hom() && c.s == c.s1 && c.s1 == c.s2 && c.p1 != c.p2)
            .clause("(iii)", |c| c.hom() && c.ss > c.s && c.off_line())
            .necessary(Ctx::hom)
            .envelope(Envelope::Interpolation(Hom))
            .symmetric(),
    );

    // Gagliardo-Nirenberg inequalities: target L^{p,q}, first factor
    // L^{p1,q1}, second factor of smoothness s2 > 0.
    v.push(
        Theorem::new("gn-besov", Sufficient, "L(p,q) <= L(p1,q1)^(1-theta) B(s2,inf;p2,inf)^theta", |c| {
            let q1_ok = if c.p1.is_one() { c.q1.is_one() } else { c.q1.is_zero() };
            gn_shape(c) && q1_ok && c.r2.is_zero()
        })
        .clause("(relation)", |c| gn_relation(c) && gn_nondegenerate(c))
        .envelope(Envelope::Interpolation(Hom)),
    );
    v.push(
        Theorem::new("gn-weak", Sufficient, "L(p,q) <= L(p1,inf)^(1-theta) H(s2;p2,inf)^theta, 1 < p2 < inf", |c| {
            gn_shape(c) && c.q1.is_zero() && open_range(&c.p2)
        })
        .clause("(i)", |c| gn_relation(c) && gn_nondegenerate(c) && (c.p1 < Rational::one() || c.s2 <= &c.n * &c.p2))
        .clause("(ii)", |c| gn_relation(c) && gn_nondegenerate(c) && c.p1.is_one() && c.s2 > &c.n * &c.p2)
        .envelope(Envelope::Interpolation(Hom)),
    );
    v
}

pub fn catalog() -> &'static [Theorem] {
    static CATALOG: OnceLock<Vec<Theorem>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub fn theorem(id: &str) -> Result<&'static Theorem> {
    catalog()
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::UnknownTheorem(id.to_string()))
}

pub fn theorem_ids() -> Vec<&'static str> {
    catalog().iter().map(|t| t.id).collect()
}

pub fn evaluate(id: &str, t: &ParamTuple) -> Result<ConditionVerdict> {
    let th = theorem(id)?;
    Ok(evaluate_with(th, &Ctx::new(t)))
}

fn evaluate_with(th: &Theorem, c: &Ctx) -> ConditionVerdict {
    let na = ConditionVerdict {
        theorem_id: th.id.to_string(),
        applicable: false,
        matched_clauses: Vec::new(),
        sufficiency_via: Vec::new(),
        sufficient: Verdict::NotApplicable,
        necessary_region_member: Verdict::NotApplicable,
        iff_holds: Verdict::NotApplicable,
    };
    if !(th.domain)(c) {
        return na;
    }
    let matched: Vec<String> = th
        .clauses
        .iter()
        .filter(|(_, p)| p(c))
        .map(|(l, _)| l.to_string())
        .collect();
    let hit = Verdict::from_bool(!matched.is_empty());
    let mut out = ConditionVerdict {
        applicable: true,
        matched_clauses: matched,
        ..na
    };
    match th.role {
        Role::Sufficient => {
            out.sufficient = hit;
            if let Some(nec) = th.necessary {
                out.necessary_region_member = Verdict::from_bool(nec(c));
            }
        }
        Role::Characterization => {
            out.sufficient = hit;
            if (th.converse_domain)(c) {
                out.necessary_region_member = hit;
                out.iff_holds = hit;
            }
        }
        Role::Necessary => {
            out.necessary_region_member = hit;
            if let Some(d) = th.delegate {
                let dv = evaluate_with(theorem(d).expect("delegate in catalog"), c);
                out.sufficient = if dv.sufficient.is_true() {
                    out.sufficiency_via = dv.matched_clauses.iter().map(|l| format!("{d}{l}")).collect();
                    Verdict::True
                } else if hit.is_true() {
                    Verdict::Open
                } else {
                    Verdict::False
                };
            }
        }
    }
    out
}

/// Recomputes the necessary envelope of a statement directly from the
/// tuple, without the shared clause context.
fn envelope_holds(e: Envelope, t: &ParamTuple) -> Option<bool> {
    match e {
        Envelope::None => None,
        Envelope::Interpolation(mode) => Some(common_necessary(t, mode)),
        Envelope::Embedding(mode) => {
            let n = int(t.n as i64);
            let gap = &t.s1 - &t.s2;
            let drop = &n * t.p1.reciprocal() - &n * t.p2.reciprocal();
            Some(match mode {
                Inhom => gap >= drop && drop >= Rational::zero(),
                Hom => gap == drop && drop >= Rational::zero(),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n: u32,
    pub tuples: usize,
    pub seed: u64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            n: 1,
            tuples: 10_000,
            seed: 20_240_601,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremTally {
    pub applicable: usize,
    pub sufficient: usize,
    pub open: usize,
    pub necessary: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub check: String,
    pub theorem: String,
    pub tuple: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanReport {
    pub spec: ScanSpec,
    pub tuples: usize,
    pub evaluations: usize,
    pub per_theorem: BTreeMap<String, TheoremTally>,
    pub inconsistencies: Vec<Inconsistency>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub tuple: String,
    pub theorem: String,
    pub clause: String,
    pub verdict: String,
    pub necessary: String,
}

/// Seeded draw of tuples from a small rational grid, biased towards the
/// equality cases (p* = p, s* − s = n/p* − n/p, s1 − s2 = n/p1 − n/p2) and
/// towards the fine-index shapes of the limiting statements.
pub fn scan_tuples(spec: &ScanSpec) -> Vec<ParamTuple> {
    let p_pool = [rat(0, 1), rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4), rat(1, 1)];
    let qr_pool = [rat(0, 1), rat(1, 4), rat(1, 2), rat(1, 1)];
    let s_pool = [rat(-1, 1), rat(-1, 2), rat(0, 1), rat(1, 4), rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)];
    let pos_pool = [rat(1, 4), rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1)];
    let theta_pool = [rat(1, 4), rat(1, 3), rat(1, 2), rat(2, 3), rat(3, 4)];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = int(spec.n as i64);
    let mut out = Vec::with_capacity(spec.tuples);
    let pick = |rng: &mut ChaCha8Rng, pool: &[Rational]| pool[rng.gen_range(0..pool.len())].clone();
    let ext = |r: Rational| ExtendedExponent::from_reciprocal(r).expect("pool in [0, 1]");
    while out.len() < spec.tuples {
        let theta = pick(&mut rng, &theta_pool);
        let (p1, p2) = (pick(&mut rng, &p_pool), pick(&mut rng, &p_pool));
        let one = Rational::one();
        let ps = (&one - &theta) * &p1 + &theta * &p2;
        let mut p = if rng.gen_bool(0.35) { ps.clone() } else { pick(&mut rng, &p_pool) };
        let s1 = pick(&mut rng, &s_pool);
        let mut s2 = pick(&mut rng, &s_pool);
        if rng.gen_bool(0.25) {
            s2 = &s1 - &n * (&p1 - &p2);
        }
        let mut q = [0; 3].map(|_| pick(&mut rng, &qr_pool));
        let mut r = [0; 3].map(|_| pick(&mut rng, &qr_pool));
        let shape = rng.gen_range(0..6);
        if shape == 5 {
            // Gagliardo-Nirenberg shape
            let s2g = pick(&mut rng, &pos_pool);
            let rel = (&one - &theta) * &p1 + &theta * (&p2 - &s2g / &n);
            if rng.gen_bool(0.7) && !rel.is_negative() && rel < one {
                p = rel;
            }
            q[0] = if p.is_zero() { Rational::zero() } else { one.clone() };
            q[1] = if p1.is_one() && rng.gen_bool(0.5) { one.clone() } else { Rational::zero() };
            q[2] = Rational::zero();
            r[2] = Rational::zero();
            let t = ParamTuple {
                n: spec.n,
                s: Rational::zero(),
                s1: Rational::zero(),
                s2: s2g,
                p: ext(p),
                p1: ext(p1),
                p2: ext(p2),
                q: ext(q[0].clone()),
                q1: ext(q[1].clone()),
                q2: ext(q[2].clone()),
                r: ext(r[0].clone()),
                r1: ext(r[1].clone()),
                r2: ext(r[2].clone()),
                theta,
            };
            if t.validate().is_ok() {
                out.push(t);
            }
            continue;
        }
        for (i, pi) in [&p, &p1, &p2].into_iter().enumerate() {
            if pi.is_zero() {
                q[i] = Rational::zero();
            }
        }
        let star = |a: &Rational, b: &Rational| (&one - &theta) * a + &theta * b;
        match shape {
            1 => {
                q[0] = star(&q[1], &q[2]);
                r[0] = star(&r[1], &r[2]);
            }
            2 => {
                r = [one.clone(), Rational::zero(), Rational::zero()];
                q[0] = star(&q[1], &q[2]);
            }
            3 => {
                q = [one.clone(), Rational::zero(), Rational::zero()];
                r[0] = star(&r[1], &r[2]);
            }
            4 => {
                q = [one.clone(), Rational::zero(), Rational::zero()];
                r = [one.clone(), Rational::zero(), Rational::zero()];
            }
            _ => {}
        }
        let ss = star(&s1, &s2);
        let gp = &n * (&ps - &p);
        let s = match rng.gen_range(0..6) {
            0 | 1 => &ss - &gp,
            2 => ss.clone(),
            3 => &ss - &gp - rat(1, 4),
            4 => &ss - &gp + rat(1, 4),
            _ => pick(&mut rng, &s_pool),
        };
        let t = ParamTuple {
            n: spec.n,
            s,
            s1,
            s2,
            p: ext(p),
            p1: ext(p1),
            p2: ext(p2),
            q: ext(q[0].clone()),
            q1: ext(q[1].clone()),
            q2: ext(q[2].clone()),
            r: ext(r[0].clone()),
            r1: ext(r[1].clone()),
            r2: ext(r[2].clone()),
            theta,
        };
        if t.validate().is_ok() {
            out.push(t);
        }
    }
    out
}

/// Pairs (limiting statement, r-limit statement, q-limit statement) whose
/// necessary lists must satisfy list(q = r = 1) = list(r = 1) ∩ list(q = 1).
const INTERSECTIONS: [(&str, &str, &str); 3] = [
    ("interp-f-inhom-q1r1", "interp-f-inhom-r1", "interp-f-inhom-q1"),
    ("interp-f-hom-q1r1", "interp-f-hom-r1", "interp-f-hom-q1"),
    ("interp-b-inhom-q1r1", "interp-b-inhom-r1", "interp-b-inhom-q1"),
];

/// Runs the three catalog checks on one tuple.
pub fn check_tuple(t: &ParamTuple) -> (Vec<ConditionVerdict>, Vec<Inconsistency>) {
    let c = Ctx::new(t);
    let mut bad = Vec::new();
    let mut flag = |check: &str, th: &str| {
        bad.push(Inconsistency {
            check: check.to_string(),
            theorem: th.to_string(),
            tuple: t.compact(),
        })
    };
    let verdicts: Vec<ConditionVerdict> = catalog().iter().map(|th| evaluate_with(th, &c)).collect();
    for (th, v) in catalog().iter().zip(&verdicts) {
        if !v.applicable {
            continue;
        }
        // (a) sufficiency lies inside the necessary envelope
        if v.sufficient.is_true() && envelope_holds(th.envelope, t) == Some(false) {
            flag("sufficient-outside-necessary-envelope", th.id);
        }
        // (b) no tuple both excluded and covered
        if v.sufficient.is_true() && v.necessary_region_member == Verdict::False {
            flag("sufficient-but-excluded", th.id);
        }
        if th.role == Role::Characterization {
            let clause_route = !v.matched_clauses.is_empty();
            if let Some(cf) = th.closed_form {
                if cf(&c) != clause_route {
                    flag("clause-list-vs-closed-form", th.id);
                }
            }
            if let Some(d) = th.delegate {
                let dv = evaluate_with(theorem(d).expect("delegate in catalog"), &c);
                if dv.sufficient.is_true() != clause_route {
                    flag("clause-list-vs-sufficiency-statement", th.id);
                }
            }
        }
    }
    // (c) the doubly limiting list is the intersection of the two single ones
    for (both, r_one, q_one) in INTERSECTIONS {
        let v = &verdicts[catalog().iter().position(|x| x.id == both).expect("in catalog")];
        if !v.applicable {
            continue;
        }
        let st = star_values(t);
        let with_q_star = ParamTuple {
            q: st.q_star(),
            ..t.clone()
        };
        let with_r_star = ParamTuple {
            r: st.r_star(),
            ..t.clone()
        };
        let vr = evaluate(r_one, &with_q_star).expect("in catalog");
        let vq = evaluate(q_one, &with_r_star).expect("in catalog");
        if !vr.applicable || !vq.applicable {
            flag("intersection-domain", both);
            continue;
        }
        let inter = vr.necessary_region_member.is_true() && vq.necessary_region_member.is_true();
        if v.necessary_region_member.is_true() != inter {
            flag("necessary-list-vs-intersection", both);
        }
    }
    (verdicts, bad)
}

/// Evaluates every statement on every tuple of the grid; inconsistencies are
/// collected rather than raised.
pub fn scan(spec: &ScanSpec) -> (ScanReport, Vec<ScanRow>) {
    let tuples = scan_tuples(spec);
    let results: Vec<(Vec<ConditionVerdict>, Vec<Inconsistency>, String)> = tuples
        .par_iter()
        .map(|t| {
            let (v, bad) = check_tuple(t);
            (v, bad, t.compact())
        })
        .collect();
    let mut per_theorem: BTreeMap<String, TheoremTally> = BTreeMap::new();
    let mut inconsistencies = Vec::new();
    let mut rows = Vec::new();
    let mut evaluations = 0;
    for (verdicts, bad, compact) in results {
        inconsistencies.extend(bad);
        for v in verdicts {
            evaluations += 1;
            let tally = per_theorem.entry(v.theorem_id.clone()).or_default();
            if !v.applicable {
                continue;
            }
            tally.applicable += 1;
            tally.sufficient += v.sufficient.is_true() as usize;
            tally.open += (v.sufficient == Verdict::Open) as usize;
            tally.necessary += v.necessary_region_member.is_true() as usize;
            rows.push(ScanRow {
                tuple: compact.clone(),
                theorem: v.theorem_id,
                clause: if v.matched_clauses.is_empty() {
                    "-".into()
                } else {
                    v.matched_clauses.join("+")
                },
                verdict: v.sufficient.as_str().into(),
                necessary: v.necessary_region_member.as_str().into(),
            });
        }
    }
    let report = ScanReport {
        spec: spec.clone(),
        tuples: tuples.len(),
        evaluations,
        per_theorem,
        inconsistencies,
    };
    (report, rows)
}

/// Like [`scan`], but fails on the first inconsistency.
pub fn consistency_scan(spec: &ScanSpec) -> Result<ScanReport> {
    let (report, _) = scan(spec);
    if let Some(bad) = report.inconsistencies.first() {
        return Err(Error::InconsistencyFound {
            check: bad.check.clone(),
            theorem: bad.theorem.clone(),
            tuple: bad.tuple.clone(),
        });
    }
    Ok(report)
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}
