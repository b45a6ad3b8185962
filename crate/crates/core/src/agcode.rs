//! The one-point code `C(D, 2q²P∞)` on the curve over `F_{q^3}`.
//!
//! Codewords are evaluations of `f = a y + b x² + c x + d` at the `q^5`
//! affine points. A weight is `q^5` minus the number of zeros of `f` on the
//! curve, and for `a ≠ 0` those zeros are the intersections with the parabola
//! `y = -(b x² + c x + d)/a`; for `a = 0` each root of `b x² + c x + d`
//! contributes a whole fiber of `q²` points.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{linalg, poly, Elem, Field};
use crate::intersect::{sweep_lines, sweep_parabolas, SweepMode, TraceProfiler, PARABOLA_EXHAUSTIVE_MAX_Q};
use crate::normtrace::{AffinePoint, NormTraceCurve};

/// Largest `q` for the word-by-word distribution.
pub const WEIGHTS_EXHAUSTIVE_MAX_Q: u32 = 4;
/// Largest `q` for the distribution from scalar classes and sweeps.
pub const WEIGHTS_PROJECTIVE_MAX_Q: u32 = PARABOLA_EXHAUSTIVE_MAX_Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub q: u64,
    /// Length: the number of affine points, `q^5`.
    pub n: u64,
    pub k: u64,
    /// `deg G = 2q²`.
    pub divisor_degree: u64,
}

impl CodeParams {
    pub fn designed_distance(&self) -> u64 {
        self.n - self.divisor_degree
    }
}

/// `f = a y + b x² + c x + d`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FunctionWord {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub d: Elem,
}

impl FunctionWord {
    pub fn new(a: Elem, b: Elem, c: Elem, d: Elem) -> FunctionWord {
        FunctionWord { a, b, c, d }
    }

    pub fn scaled(&self, f: &Field, lambda: Elem) -> FunctionWord {
        FunctionWord {
            a: f.mul(lambda, self.a),
            b: f.mul(lambda, self.b),
            c: f.mul(lambda, self.c),
            d: f.mul(lambda, self.d),
        }
    }
}

/// Root structure of `b x² + c x + d` (not identically zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinctRoots {
    pub count: u64,
    /// The polynomial shares a factor with its formal derivative.
    pub repeated: bool,
}

/// Distinct roots in `f` of the polynomial `(d, c, b)` (low to high), via the
/// gcd with the derivative and an explicit root search.
pub fn distinct_roots(f: &Field, b: Elem, c: Elem, d: Elem) -> DistinctRoots {
    let mut p = vec![d, c, b];
    poly::trim(&mut p);
    if p.is_empty() {
        return DistinctRoots { count: f.order() as u64, repeated: false };
    }
    let dp = poly::derivative(f, &p);
    let g = poly::gcd(f, &p, &dp);
    let repeated = poly::degree(&g).is_some_and(|deg| deg >= 1);
    DistinctRoots { count: poly::roots(f, &p).len() as u64, repeated }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prediction {
    Exact(u64),
    AtLeast(u64),
}

impl Prediction {
    pub fn admits(&self, w: u64) -> bool {
        match *self {
            Prediction::Exact(e) => w == e,
            Prediction::AtLeast(lb) => w >= lb,
        }
    }
}

/// The case a word falls in, its weight as given in the published case list,
/// and the weight derived from first principles.
///
/// The two differ only for `a ≠ 0, b = c = 0, d ≠ 0`: the zeros are the `x`
/// with `N(x) = T(-d/a)`, so the weight is `q^5 - (q² + q + 1)` when that
/// trace is nonzero and `q^5 - 1` otherwise, never `q^5 - q²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightClass {
    pub case: &'static str,
    pub published: Prediction,
    pub derived: Prediction,
}

pub struct Code {
    curve: Arc<NormTraceCurve>,
    points: Vec<AffinePoint>,
}

impl Code {
    pub fn new(curve: Arc<NormTraceCurve>) -> Result<Code> {
        if curve.r() != 3 {
            return Err(Error::RequiresCubicExtension(curve.r()));
        }
        let points = curve.enumerate_points();
        Ok(Code { curve, points })
    }

    pub fn curve(&self) -> &Arc<NormTraceCurve> {
        &self.curve
    }

    pub fn field(&self) -> &Arc<Field> {
        self.curve.field()
    }

    pub fn points(&self) -> &[AffinePoint] {
        &self.points
    }

    pub fn params(&self) -> CodeParams {
        let q = self.curve.q();
        CodeParams { q, n: self.points.len() as u64, k: 4, divisor_degree: 2 * q * q }
    }

    /// Rows: evaluations of `y, x², x, 1` in point order.
    pub fn generator_matrix(&self) -> Vec<Vec<Elem>> {
        let f = self.field();
        vec![
            self.points.iter().map(|p| p.y).collect(),
            self.points.iter().map(|p| f.square(p.x)).collect(),
            self.points.iter().map(|p| p.x).collect(),
            vec![Elem::ONE; self.points.len()],
        ]
    }

    pub fn rank(&self) -> usize {
        linalg::rank(self.field(), &self.generator_matrix())
    }

    pub fn encode(&self, fw: &FunctionWord) -> Vec<Elem> {
        let f = self.field();
        self.points
            .iter()
            .map(|p| {
                let v = f.add(f.mul(fw.a, p.y), f.mul(fw.b, f.square(p.x)));
                f.add(v, f.add(f.mul(fw.c, p.x), fw.d))
            })
            .collect()
    }

    /// Hamming weight of the materialized codeword.
    pub fn hamming_weight(&self, fw: &FunctionWord) -> u64 {
        self.encode(fw).iter().filter(|v| !v.is_zero()).count() as u64
    }

    /// Weight from the number of zeros on the curve, without building the codeword.
    pub fn weight_of(&self, fw: &FunctionWord) -> u64 {
        let f = self.field();
        let q = self.curve.q();
        let n = q.pow(5);
        let zeros = if !fw.a.is_zero() {
            let inv = f.neg(f.inv(fw.a));
            f.elements()
                .filter(|&x| {
                    let v = f.add(f.mul(f.add(f.mul(fw.b, x), fw.c), x), fw.d);
                    self.curve.norm(x) == self.curve.trace(f.mul(v, inv))
                })
                .count() as u64
        } else if fw.b.is_zero() && fw.c.is_zero() {
            if fw.d.is_zero() {
                n
            } else {
                0
            }
        } else {
            q * q * distinct_roots(f, fw.b, fw.c, fw.d).count
        };
        n - zeros
    }

    pub fn classify_weight(&self, fw: &FunctionWord) -> WeightClass {
        let q = self.curve.q();
        let n = q.pow(5);
        let q2 = q * q;
        let same = |case, p| WeightClass { case, published: p, derived: p };
        let exact = Prediction::Exact;
        let (z, b0, c0, d0) = (fw.a.is_zero(), fw.b.is_zero(), fw.c.is_zero(), fw.d.is_zero());
        match (z, b0, c0, d0) {
            (true, true, true, true) => same("1a", exact(0)),
            (true, true, true, false) => same("1b", exact(n)),
            (true, true, false, _) => same("1c", exact(n - q2)),
            (true, false, _, _) => {
                let roots = distinct_roots(self.field(), fw.b, fw.c, fw.d);
                match roots.count {
                    1 => same("1d", exact(n - q2)),
                    2 => same("1e", exact(n - 2 * q2)),
                    _ => same("1e-irreducible", exact(n)),
                }
            }
            (false, true, true, true) => same("2a", exact(n - 1)),
            (false, true, true, false) => {
                let f = self.field();
                let t = self.curve.trace(f.neg(f.div(fw.d, fw.a)));
                let derived = if t.is_zero() { n - 1 } else { n - q2 - q - 1 };
                WeightClass { case: "2b", published: exact(n - q2), derived: exact(derived) }
            }
            (false, true, false, _) => same("2c", Prediction::AtLeast(n - (q2 + q + 1))),
            (false, false, _, _) => same("2d", Prediction::AtLeast(n - (q2 + 7 * q + 1))),
        }
    }
}

/// Agreement of the weight routes over a set of words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordAudit {
    pub words: u64,
    /// Words whose codeword was also materialized.
    pub hamming_checked: u64,
    pub hamming_mismatches: u64,
    /// Words whose weight contradicts the derived prediction.
    pub derived_violations: u64,
    /// Per case: words whose weight contradicts the published prediction.
    pub published_mismatches: BTreeMap<String, u64>,
    /// Per case: words seen.
    pub cases: BTreeMap<String, u64>,
}

impl WordAudit {
    fn merge(mut self, other: WordAudit) -> WordAudit {
        self.words += other.words;
        self.hamming_checked += other.hamming_checked;
        self.hamming_mismatches += other.hamming_mismatches;
        self.derived_violations += other.derived_violations;
        for (k, v) in other.published_mismatches {
            *self.published_mismatches.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.cases {
            *self.cases.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn derived_agrees(&self) -> bool {
        self.derived_violations == 0
    }

    pub fn hamming_agrees(&self) -> bool {
        self.hamming_mismatches == 0
    }
}

/// Compares `weight_of` with the classifier and, if asked, with the
/// materialized codeword.
pub fn audit_words(code: &Code, words: &[FunctionWord], with_hamming: bool) -> WordAudit {
    words
        .par_iter()
        .fold(WordAudit::default, |mut acc, fw| {
            let w = code.weight_of(fw);
            let class = code.classify_weight(fw);
            acc.words += 1;
            *acc.cases.entry(class.case.to_string()).or_insert(0) += 1;
            if !class.derived.admits(w) {
                acc.derived_violations += 1;
            }
            if !class.published.admits(w) {
                *acc.published_mismatches.entry(class.case.to_string()).or_insert(0) += 1;
            }
            if with_hamming {
                acc.hamming_checked += 1;
                if code.hamming_weight(fw) != w {
                    acc.hamming_mismatches += 1;
                }
            }
            acc
        })
        .reduce(WordAudit::default, WordAudit::merge)
}

/// All `(q^3)^4` words, `a` slowest.
pub fn all_words(f: &Field) -> Vec<FunctionWord> {
    let n = f.order();
    let e = Elem::from_raw;
    let mut out = Vec::with_capacity((n as usize).pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out.push(FunctionWord::new(e(a), e(b), e(c), e(d)));
                }
            }
        }
    }
    out
}

pub fn sample_words(f: &Field, seed: u64, count: usize) -> Vec<FunctionWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.order();
    let mut g = || Elem::from_raw(rng.gen_range(0..n));
    (0..count).map(|_| FunctionWord::new(g(), g(), g(), g())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMode {
    /// Every word, with `d` handled through trace profiles.
    Exhaustive,
    /// One word per scalar class, from the graph sweeps and a root census.
    Projective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub q: u64,
    /// weight → number of codewords.
    pub counts: BTreeMap<u64, u64>,
}

impl WeightDistribution {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, w: u64) -> u64 {
        self.counts.get(&w).copied().unwrap_or(0)
    }

    pub fn min_nonzero_weight(&self) -> Option<u64> {
        self.counts.keys().copied().find(|&w| w > 0)
    }

    fn add(&mut self, w: u64, n: u64) {
        if n > 0 {
            *self.counts.entry(w).or_insert(0) += n;
        }
    }
}

pub fn weight_distribution(code: &Code, mode: DistributionMode) -> Result<WeightDistribution> {
    let q = code.curve.q();
    let cap = match mode {
        DistributionMode::Exhaustive => WEIGHTS_EXHAUSTIVE_MAX_Q,
        DistributionMode::Projective => WEIGHTS_PROJECTIVE_MAX_Q,
    };
    if q > cap as u64 {
        let what = match mode {
            DistributionMode::Exhaustive => "exhaustive weight distribution",
            DistributionMode::Projective => "projective weight distribution",
        };
        return Err(Error::Budget { what, q: q as u32, max: cap });
    }
    let mut dist = WeightDistribution { q, counts: BTreeMap::new() };
    match mode {
        DistributionMode::Exhaustive => exhaustive(code, &mut dist),
        DistributionMode::Projective => projective(code, &mut dist)?,
    }
    Ok(dist)
}

fn a_zero_census(code: &Code, dist: &mut WeightDistribution, all_b: bool) {
    let f = code.field();
    let q = code.curve.q();
    let big = f.order() as u64;
    let n = q.pow(5);
    let scale = if all_b { 1 } else { big - 1 };
    // a = b = 0
    dist.add(0, 1);
    dist.add(n, big - 1);
    dist.add(n - q * q, (big - 1) * big);
    // b ≠ 0: one monic representative per class unless every b is enumerated
    let bs: Vec<Elem> = if all_b { f.nonzero_elements().collect() } else { vec![Elem::ONE] };
    let by_roots: Vec<[u64; 3]> = bs
        .par_iter()
        .map(|&b| {
            let mut census = [0u64; 3];
            for c in f.elements() {
                for d in f.elements() {
                    census[distinct_roots(f, b, c, d).count as usize] += 1;
                }
            }
            census
        })
        .collect();
    for census in by_roots {
        for (roots, &words) in census.iter().enumerate() {
            dist.add(n - roots as u64 * q * q, words * scale);
        }
    }
}

fn exhaustive(code: &Code, dist: &mut WeightDistribution) {
    a_zero_census(code, dist, true);
    let f = code.field();
    let q = code.curve.q();
    let n = q.pow(5);
    let big = f.order() as u64;
    let fiber = big / q;
    let profiler = TraceProfiler::new(&code.curve, 2);
    // a ≠ 0: zeros of (a, b, c, d) = profile of (-b/a, -c/a) at T(-d/a); each
    // value of that trace is taken by q² values of d.
    let hists: Vec<BTreeMap<u64, u64>> = f
        .nonzero_elements()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let inv = f.neg(f.inv(a));
            let mut h = BTreeMap::new();
            for b in f.elements() {
                for c in f.elements() {
                    let prof = profiler.profile(&[f.mul(b, inv), f.mul(c, inv)]);
                    for &zeros in &prof {
                        *h.entry(n - zeros).or_insert(0) += fiber;
                    }
                }
            }
            h
        })
        .collect();
    for h in hists {
        for (w, c) in h {
            dist.add(w, c);
        }
    }
}

fn projective(code: &Code, dist: &mut WeightDistribution) -> Result<()> {
    a_zero_census(code, dist, false);
    let curve = &code.curve;
    let f = code.field();
    let q = curve.q();
    let n = q.pow(5);
    let big = f.order() as u64;
    // a = 1: zeros are intersections with y = B x² + C x + D over all (B, C, D)
    let parabolas = sweep_parabolas(curve, SweepMode::Exhaustive)?;
    let lines = sweep_lines(curve, SweepMode::Exhaustive)?;
    let mut classes = BTreeMap::new();
    for (&zeros, &tuples) in parabolas.histogram.iter().chain(&lines.histogram) {
        *classes.entry(zeros).or_insert(0) += tuples;
    }
    for t in curve.tower().fq().elements() {
        let zeros = f.elements().filter(|&x| curve.norm(x) == t).count() as u64;
        *classes.entry(zeros).or_insert(0) += curve.trace_fiber(t).len() as u64;
    }
    for (zeros, tuples) in classes {
        dist.add(n - zeros, tuples * (big - 1));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub q: u64,
    pub n: u64,
    pub k: u64,
    pub total_ok: bool,
    pub a0_ok: bool,
    pub min_distance: Option<u64>,
    pub designed_distance: u64,
    /// Minimum distance equals `q^5 - 2q²`.
    pub min_distance_ok: bool,
    /// `q^5 - q² - 7q - 1`.
    pub gap_lower: u64,
    /// No weight lies strictly between `q^5 - 2q²` and `q^5 - q² - 7q - 1`.
    pub gap_ok: bool,
    pub gap_violations: Vec<u64>,
    /// The theorem is claimed for `q ≥ 8`; below that the values are recorded only.
    pub theorem_claimed: bool,
}

pub fn verify_theorem(code: &Code, dist: &WeightDistribution) -> TheoremReport {
    let p = code.params();
    let q = p.q;
    let designed = p.designed_distance();
    let gap_lower = p.n - q * q - 7 * q - 1;
    let min = dist.min_nonzero_weight();
    let gap_violations: Vec<u64> = if gap_lower > designed + 1 {
        dist.counts.range(designed + 1..gap_lower).map(|(&w, _)| w).collect()
    } else {
        Vec::new()
    };
    TheoremReport {
        q,
        n: p.n,
        k: p.k,
        total_ok: dist.total() == (q * q * q).pow(4),
        a0_ok: dist.get(0) == 1,
        min_distance: min,
        designed_distance: designed,
        min_distance_ok: min == Some(designed),
        gap_lower,
        gap_ok: gap_violations.is_empty(),
        gap_violations,
        theorem_claimed: q >= 8,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldTower;

    fn code(p: u32, m: u32) -> Code {
        let t = Arc::new(FieldTower::build(p, m, 3).unwrap());
        Code::new(Arc::new(NormTraceCurve::new(t).unwrap())).unwrap()
    }

    #[test]
    fn generator_matrix_shape() {
        let c = code(2, 1);
        let g = c.generator_matrix();
        assert_eq!((g.len(), g[0].len()), (4, 32));
        assert_eq!(c.rank(), 4);
        let origin = c.points().iter().position(|p| p.x.is_zero() && p.y.is_zero()).unwrap();
        let col: Vec<Elem> = g.iter().map(|r| r[origin]).collect();
        assert_eq!(col, vec![Elem::ZERO, Elem::ZERO, Elem::ZERO, Elem::ONE]);
        let one = FunctionWord::new(Elem::ZERO, Elem::ZERO, Elem::ZERO, Elem::ONE);
        assert_eq!(c.hamming_weight(&one), 32);
    }

    #[test]
    fn distinct_roots_cases() {
        let f = Field::prime(5).unwrap();
        let e = Elem::from_raw;
        // (x - 2)² = x² + x + 4
        assert_eq!(distinct_roots(&f, e(1), e(1), e(4)), DistinctRoots { count: 1, repeated: true });
        // (x - 1)(x - 2) = x² + 2x + 2
        assert_eq!(distinct_roots(&f, e(1), e(2), e(2)), DistinctRoots { count: 2, repeated: false });
        // x² + 2 is irreducible mod 5
        assert_eq!(distinct_roots(&f, e(1), e(0), e(2)).count, 0);
        let f8 = Field::extension(&Field::prime(2).unwrap(), 3).unwrap();
        // characteristic 2: x² + 1 = (x + 1)²
        assert_eq!(distinct_roots(&f8, e(1), e(0), e(1)), DistinctRoots { count: 1, repeated: true });
    }

    #[test]
    fn classes_at_q2() {
        let c = code(2, 1);
        let (z, o) = (Elem::ZERO, Elem::ONE);
        let w = |a, b, cc, d| c.weight_of(&FunctionWord::new(a, b, cc, d));
        assert_eq!(w(z, z, z, z), 0);
        assert_eq!(w(z, z, o, z), 28);
        assert_eq!(w(o, z, z, z), 31);
        assert_eq!(w(z, z, z, o), 32);
    }

    #[test]
    fn modes_agree_q2_q3() {
        for (p, m) in [(2, 1), (3, 1)] {
            let c = code(p, m);
            let ex = weight_distribution(&c, DistributionMode::Exhaustive).unwrap();
            let pr = weight_distribution(&c, DistributionMode::Projective).unwrap();
            assert_eq!(ex, pr);
            let q3 = (p as u64).pow(3);
            assert_eq!(ex.total(), q3.pow(4));
            assert_eq!(ex.get(0), 1);
        }
    }

    #[test]
    fn scalar_invariance_q3() {
        let c = code(3, 1);
        let f = c.field();
        let e = Elem::from_raw;
        for fw in [FunctionWord::new(e(1), e(5), e(7), e(2)), FunctionWord::new(e(0), e(3), e(1), e(9))] {
            let w = c.weight_of(&fw);
            for l in f.nonzero_elements() {
                assert_eq!(c.weight_of(&fw.scaled(f, l)), w);
            }
        }
    }

    #[test]
    fn budget() {
        let c = code(5, 1);
        assert!(matches!(weight_distribution(&c, DistributionMode::Exhaustive), Err(Error::Budget { .. })));
    }
}
