//! Intersections of the curve with graphs `y = A(x)`, `deg A ≤ 3`.
//!
//! Substituting `y = A(x)` leaves `N(x) = T(A(x))`, so the intersection
//! count is the number of `x ∈ F_{q^r}` solving it, one point `(x, A(x))`
//! per solution. The sweeps use the linearity of the trace: for fixed
//! non-constant coefficients, the value `N(x) - T(A_h x^h + ... + A_1 x)`
//! depends only on `x`, and the count for constant term `c` is the number of
//! `x` where that value equals `T(c)`. One histogram over `x` (its *trace
//! profile*) therefore answers all `q^r` constant terms at once.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Elem, Field};
use crate::normtrace::NormTraceCurve;

/// Exhaustive-sweep budget per degree (largest `q`).
pub const LINE_EXHAUSTIVE_MAX_Q: u32 = 32;
pub const PARABOLA_EXHAUSTIVE_MAX_Q: u32 = 9;
pub const CUBIC_EXHAUSTIVE_MAX_Q: u32 = 4;

/// `y = A_h x^h + ... + A_0` with `A_h ≠ 0`, `1 ≤ h ≤ 3`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PolyGraphCurve {
    /// `A_0, ..., A_h`.
    coeffs: Vec<Elem>,
}

impl PolyGraphCurve {
    /// From `(A_h, ..., A_0)`.
    pub fn new(field: &Field, descending: &[Elem]) -> Result<PolyGraphCurve> {
        let h = descending.len().checked_sub(1).unwrap_or(0);
        if !(1..=3).contains(&h) {
            return Err(Error::InvalidCurve(format!(
                "graph degree must be 1, 2 or 3, got {} coefficients",
                descending.len()
            )));
        }
        for &c in descending {
            field.check(c)?;
        }
        if descending[0].is_zero() {
            return Err(Error::InvalidCurve("leading coefficient A_h must be nonzero".into()));
        }
        Ok(PolyGraphCurve { coeffs: descending.iter().rev().copied().collect() })
    }

    pub fn parabola(field: &Field, a: Elem, b: Elem, c: Elem) -> Result<PolyGraphCurve> {
        Self::new(field, &[a, b, c])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `A_i`.
    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn constant(&self) -> Elem {
        self.coeffs[0]
    }

    /// `(A_h, ..., A_0)`.
    pub fn descending(&self) -> Vec<Elem> {
        self.coeffs.iter().rev().copied().collect()
    }

    pub fn eval(&self, f: &Field, x: Elem) -> Elem {
        self.coeffs.iter().rev().fold(Elem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }
}

/// `n = q² + η·q + residue` with `0 ≤ residue < q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionCount {
    pub n_points: u64,
    pub eta: i64,
    pub residue: u64,
}

impl IntersectionCount {
    pub fn new(n_points: u64, q: u64) -> IntersectionCount {
        let (eta, residue) = decompose(n_points, q);
        IntersectionCount { n_points, eta, residue }
    }
}

/// The unique `(η, residue)` with `n = q² + η q + residue`, `residue ∈ [0, q)`.
pub fn decompose(n: u64, q: u64) -> (i64, u64) {
    let shifted = n as i64 - (q * q) as i64;
    (shifted.div_euclid(q as i64), shifted.rem_euclid(q as i64) as u64)
}

/// Direct count of `{x : N(x) = T(A(x))}`.
pub fn count_intersections(curve: &NormTraceCurve, g: &PolyGraphCurve) -> Result<IntersectionCount> {
    let f = curve.field();
    for i in 0..=g.degree() {
        f.check(g.coeff(i))?;
    }
    let n = f
        .elements()
        .filter(|&x| curve.norm(x) == curve.trace(g.eval(f, x)))
        .count() as u64;
    Ok(IntersectionCount::new(n, curve.q()))
}

/// `profile[t] = #{x : N(x) - T(A_h x^h + ... + A_1 x) = t}` for `t ∈ F_q`,
/// given `(A_h, ..., A_1)`.
pub fn trace_profile(curve: &NormTraceCurve, nonconstant: &[Elem]) -> Vec<u64> {
    TraceProfiler::new(curve, nonconstant.len()).profile(nonconstant)
}

/// Reusable [`trace_profile`] for many coefficient tuples of one length.
/// Leading coefficients may be zero.
pub struct TraceProfiler<'a> {
    kernel: Kernel<'a>,
    degree: usize,
}

impl<'a> TraceProfiler<'a> {
    pub fn new(curve: &'a NormTraceCurve, degree: usize) -> TraceProfiler<'a> {
        assert!((1..=3).contains(&degree), "profile degree must be 1, 2 or 3");
        TraceProfiler { kernel: Kernel::new(curve, degree), degree }
    }

    /// Profile for `(A_h, ..., A_1)`, `h` the profiler degree.
    pub fn profile(&self, nonconstant: &[Elem]) -> Vec<u64> {
        assert_eq!(nonconstant.len(), self.degree);
        let (upper, a1) = nonconstant.split_at(self.degree - 1);
        let w = self.kernel.base_values(upper);
        let mut out = vec![0u64; self.kernel.fq.order() as usize];
        self.kernel.profile(&w, a1[0], &mut out);
        out
    }
}

struct Kernel<'a> {
    curve: &'a NormTraceCurve,
    f: &'a Field,
    fq: &'a Field,
    /// `powers[i][x] = x^i`.
    powers: Vec<Vec<Elem>>,
}

impl<'a> Kernel<'a> {
    fn new(curve: &'a NormTraceCurve, degree: usize) -> Kernel<'a> {
        let f = curve.field();
        let powers = (0..=degree)
            .map(|i| f.elements().map(|x| f.pow(x, i as u64)).collect())
            .collect();
        Kernel { curve, f, fq: curve.tower().fq(), powers }
    }

    /// `w[x] = N(x) - Σ_{i≥2} T(A_i x^i)` for `upper = (A_h, ..., A_2)`.
    fn base_values(&self, upper: &[Elem]) -> Vec<Elem> {
        let mut w: Vec<Elem> = self.curve.norm_table().to_vec();
        let h = upper.len() + 1;
        for (k, &a) in upper.iter().enumerate() {
            let pw = &self.powers[h - k];
            for (wx, &xi) in w.iter_mut().zip(pw) {
                *wx = self.fq.sub(*wx, self.curve.trace(self.f.mul(a, xi)));
            }
        }
        w
    }

    /// Adds the histogram of `w[x] - T(a1 x)` into `out`.
    #[inline]
    fn profile(&self, w: &[Elem], a1: Elem, out: &mut [u64]) {
        out.iter_mut().for_each(|c| *c = 0);
        let traces = self.curve.trace_table();
        if self.fq.characteristic() == 2 {
            for (x, &wx) in w.iter().enumerate() {
                let t = traces[self.f.mul(a1, Elem::from_raw(x as u32)).index()];
                out[(wx.raw() ^ t.raw()) as usize] += 1;
            }
        } else {
            for (x, &wx) in w.iter().enumerate() {
                let t = traces[self.f.mul(a1, Elem::from_raw(x as u32)).index()];
                out[self.fq.sub(wx, t).index()] += 1;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Exhaustive,
    Sample { seed: u64, count: u64 },
}

/// All tuples `(A_h, ..., A_1, c)` with `T(c)` fixed share one count; a
/// violation is recorded once per such class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationClass {
    /// `(A_h, ..., A_1)`.
    pub leading: Vec<Elem>,
    pub constant_trace: Elem,
    /// Smallest constant term in the class.
    pub representative_constant: Elem,
    pub tuples: u64,
    pub n_points: u64,
    pub eta: i64,
    pub residue: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub q: u64,
    pub degree: usize,
    pub mode: SweepMode,
    /// Number of `(A_h, ..., A_0)` tuples covered.
    pub swept: u64,
    /// intersection count → number of tuples.
    pub histogram: BTreeMap<u64, u64>,
    /// Range of `η` over counts with residue 1.
    pub eta_min: Option<i64>,
    pub eta_max: Option<i64>,
    pub max_count: u64,
    /// Reference cap: Bézout `2(q²+q+1)` for parabolas, `q²+7q+1` for cubics,
    /// `q²+q+1` for lines.
    pub bound: u64,
    pub above_bound: u64,
    /// Parabolas: tuples breaking `residue = 1, |η| ≤ 2`.
    /// Cubics: tuples above `q²+7q+1` (reducibility witnesses).
    pub violations: Vec<ViolationClass>,
}

impl SweepReport {
    pub fn violation_tuples(&self) -> u64 {
        self.violations.iter().map(|v| v.tuples).sum()
    }

    pub fn within_bound(&self) -> u64 {
        self.swept - self.above_bound
    }
}

struct Acc {
    histogram: Vec<u64>,
    swept: u64,
    violations: Vec<ViolationClass>,
}

impl Acc {
    fn new(size: usize) -> Acc {
        Acc { histogram: vec![0; size], swept: 0, violations: Vec::new() }
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.histogram.iter_mut().zip(other.histogram) {
            *a += b;
        }
        self.swept += other.swept;
        self.violations.extend(other.violations);
        self
    }
}

fn bound_for(degree: usize, q: u64) -> u64 {
    match degree {
        1 => q * q + q + 1,
        2 => 2 * (q * q + q + 1),
        _ => q * q + 7 * q + 1,
    }
}

fn is_violation(degree: usize, q: u64, n: u64) -> bool {
    match degree {
        2 => {
            let (eta, residue) = decompose(n, q);
            residue != 1 || eta.abs() > 2
        }
        3 => n > bound_for(3, q),
        _ => false,
    }
}

fn budget(degree: usize) -> (u32, &'static str) {
    match degree {
        1 => (LINE_EXHAUSTIVE_MAX_Q, "exhaustive line sweep"),
        2 => (PARABOLA_EXHAUSTIVE_MAX_Q, "exhaustive parabola sweep"),
        _ => (CUBIC_EXHAUSTIVE_MAX_Q, "exhaustive cubic sweep"),
    }
}

/// Sweeps every graph of the given degree (or a seeded sample of the
/// non-constant parts) and aggregates the intersection counts.
pub fn sweep(curve: &NormTraceCurve, degree: usize, mode: SweepMode) -> Result<SweepReport> {
    if !(1..=3).contains(&degree) {
        return Err(Error::InvalidCurve(format!("sweep degree must be 1, 2 or 3, got {degree}")));
    }
    let q = curve.q();
    let big = curve.field().order() as u64;
    let fiber = big / q;
    let kernel = Kernel::new(curve, degree);
    let hist_len = big as usize + 1;

    let record = |acc: &mut Acc, leading: &[Elem], profile: &[u64]| {
        for (t, &n) in profile.iter().enumerate() {
            acc.histogram[n as usize] += fiber;
            acc.swept += fiber;
            if is_violation(degree, q, n) {
                let t = Elem::from_raw(t as u32);
                let (eta, residue) = decompose(n, q);
                acc.violations.push(ViolationClass {
                    leading: leading.to_vec(),
                    constant_trace: t,
                    representative_constant: curve.trace_fiber(t)[0],
                    tuples: fiber,
                    n_points: n,
                    eta,
                    residue,
                });
            }
        }
    };

    let acc = match mode {
        SweepMode::Exhaustive => {
            let (max_q, what) = budget(degree);
            if q > max_q as u64 {
                return Err(Error::Budget { what, q: q as u32, max: max_q });
            }
            // upper = (A_h, ..., A_2), indexed with A_h ≠ 0
            let n_upper = if degree == 1 { 1 } else { (big - 1) * big.pow(degree as u32 - 2) };
            (0..n_upper)
                .into_par_iter()
                .fold(
                    || Acc::new(hist_len),
                    |mut acc, idx| {
                        let upper = upper_tuple(idx, degree, big);
                        let w = kernel.base_values(&upper);
                        let mut profile = vec![0u64; q as usize];
                        let mut leading = upper.clone();
                        leading.push(Elem::ZERO);
                        let first = if degree == 1 { 1 } else { 0 };
                        for a1 in first..big as u32 {
                            let a1 = Elem::from_raw(a1);
                            kernel.profile(&w, a1, &mut profile);
                            *leading.last_mut().unwrap() = a1;
                            record(&mut acc, &leading, &profile);
                        }
                        acc
                    },
                )
                .reduce(|| Acc::new(hist_len), Acc::merge)
        }
        SweepMode::Sample { seed, count } => {
            let samples = sample_leading(seed, count, degree, big);
            samples
                .par_iter()
                .fold(
                    || Acc::new(hist_len),
                    |mut acc, leading| {
                        let (upper, a1) = leading.split_at(degree - 1);
                        let w = kernel.base_values(upper);
                        let mut profile = vec![0u64; q as usize];
                        kernel.profile(&w, a1[0], &mut profile);
                        record(&mut acc, leading, &profile);
                        acc
                    },
                )
                .reduce(|| Acc::new(hist_len), Acc::merge)
        }
    };

    let histogram: BTreeMap<u64, u64> = acc
        .histogram
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(n, &c)| (n as u64, c))
        .collect();
    let etas = histogram.keys().map(|&n| decompose(n, q)).filter(|&(_, r)| r == 1).map(|(e, _)| e);
    let eta_min = etas.clone().min();
    let eta_max = etas.max();
    let bound = bound_for(degree, q);
    let above_bound = histogram.range(bound + 1..).map(|(_, &c)| c).sum();
    Ok(SweepReport {
        q,
        degree,
        mode,
        swept: acc.swept,
        max_count: histogram.keys().next_back().copied().unwrap_or(0),
        histogram,
        eta_min,
        eta_max,
        bound,
        above_bound,
        violations: acc.violations,
    })
}

pub fn sweep_lines(curve: &NormTraceCurve, mode: SweepMode) -> Result<SweepReport> {
    sweep(curve, 1, mode)
}

pub fn sweep_parabolas(curve: &NormTraceCurve, mode: SweepMode) -> Result<SweepReport> {
    sweep(curve, 2, mode)
}

pub fn sweep_cubics(curve: &NormTraceCurve, mode: SweepMode) -> Result<SweepReport> {
    sweep(curve, 3, mode)
}

/// Decodes `idx` into `(A_h, ..., A_2)` with `A_h ≠ 0`, last entry fastest.
fn upper_tuple(mut idx: u64, degree: usize, big: u64) -> Vec<Elem> {
    if degree < 2 {
        return Vec::new();
    }
    let mut out = vec![Elem::ZERO; degree - 1];
    for slot in out.iter_mut().skip(1).rev() {
        *slot = Elem::from_raw((idx % big) as u32);
        idx /= big;
    }
    out[0] = Elem::from_raw(idx as u32 + 1);
    out
}

/// Seeded `(A_h, ..., A_1)` samples with `A_h ≠ 0`.
pub fn sample_leading(seed: u64, count: u64, degree: usize, big: u64) -> Vec<Vec<Elem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..degree)
                .map(|i| {
                    let lo = if i == 0 { 1 } else { 0 };
                    Elem::from_raw(rng.gen_range(lo..big) as u32)
                })
                .collect()
        })
        .collect()
}

/// Calls `visit((A_h, ..., A_0), n)` for every graph of the given degree, in
/// lexicographic index order. Sequential; intended for small `q`.
pub fn for_each_count(
    curve: &NormTraceCurve,
    degree: usize,
    mut visit: impl FnMut(&[Elem], u64),
) -> Result<()> {
    let q = curve.q();
    let (max_q, what) = budget(degree);
    if q > max_q as u64 {
        return Err(Error::Budget { what, q: q as u32, max: max_q });
    }
    let big = curve.field().order() as u64;
    let kernel = Kernel::new(curve, degree);
    let n_upper = if degree == 1 { 1 } else { (big - 1) * big.pow(degree as u32 - 2) };
    let mut profile = vec![0u64; q as usize];
    let mut tuple = vec![Elem::ZERO; degree + 1];
    for idx in 0..n_upper {
        let upper = upper_tuple(idx, degree, big);
        let w = kernel.base_values(&upper);
        tuple[..degree - 1].copy_from_slice(&upper);
        let first = if degree == 1 { 1 } else { 0 };
        for a1 in first..big as u32 {
            let a1 = Elem::from_raw(a1);
            kernel.profile(&w, a1, &mut profile);
            tuple[degree - 1] = a1;
            for c in curve.field().elements() {
                tuple[degree] = c;
                visit(&tuple, profile[curve.trace(c).index()]);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldTower;
    use std::sync::Arc;

    fn curve(p: u32, m: u32) -> NormTraceCurve {
        NormTraceCurve::new(Arc::new(FieldTower::build(p, m, 3).unwrap())).unwrap()
    }

    #[test]
    fn decompose_identities() {
        for q in [2u64, 3, 5, 8] {
            assert_eq!(decompose(q * q + 1, q), (0, 1));
            assert_eq!(decompose(q * q - 2 * q + 1, q), (-2, 1));
            assert_eq!(decompose(q * q - q, q), (-1, 0));
            assert_eq!(decompose(0, q), (-(q as i64), 0));
        }
    }

    #[test]
    fn graph_validation() {
        let c = curve(2, 1);
        let f = c.field();
        let e = Elem::from_raw;
        assert!(PolyGraphCurve::new(f, &[e(0), e(1), e(1)]).is_err());
        assert!(PolyGraphCurve::new(f, &[e(1)]).is_err());
        assert!(PolyGraphCurve::new(f, &[e(1), e(0), e(0), e(0), e(0)]).is_err());
        assert!(PolyGraphCurve::new(f, &[e(9), e(0)]).is_err());
        let g = PolyGraphCurve::new(f, &[e(3), e(2), e(1)]).unwrap();
        assert_eq!((g.degree(), g.coeff(2), g.constant()), (2, e(3), e(1)));
    }

    /// Brute force over curve points: independent of the `x`-only reduction.
    fn count_by_points(c: &NormTraceCurve, g: &PolyGraphCurve) -> u64 {
        c.points().filter(|pt| g.eval(c.field(), pt.x) == pt.y).count() as u64
    }

    #[test]
    fn small_cases_match_point_enumeration() {
        let c = curve(2, 1);
        let f = c.field();
        let line = PolyGraphCurve::new(f, &[Elem::ONE, Elem::ZERO]).unwrap();
        let n = count_intersections(&c, &line).unwrap();
        let oracle = f.elements().filter(|&x| c.norm(x) == c.trace(x)).count() as u64;
        assert_eq!(n.n_points, oracle);
        assert_eq!(n.n_points, count_by_points(&c, &line));

        let par = PolyGraphCurve::parabola(f, Elem::ONE, Elem::ZERO, Elem::ZERO).unwrap();
        let n = count_intersections(&c, &par).unwrap();
        assert_eq!(n.n_points, count_by_points(&c, &par));
        assert_eq!(n.residue, 1);
        assert!(n.eta.abs() <= 2);
    }

    #[test]
    fn parabolas_q3_respect_bezout() {
        let c = curve(3, 1);
        let f = c.field();
        for a in f.nonzero_elements().step_by(5) {
            for b in f.elements().step_by(4) {
                for cc in f.elements().step_by(7) {
                    let g = PolyGraphCurve::parabola(f, a, b, cc).unwrap();
                    let n = count_intersections(&c, &g).unwrap();
                    assert!(n.n_points <= 26);
                    assert_eq!(n.n_points, count_by_points(&c, &g));
                }
            }
        }
    }

    #[test]
    fn profile_matches_direct_counts() {
        let c = curve(3, 1);
        let f = c.field();
        let e = Elem::from_raw;
        for lead in [vec![e(2), e(5)], vec![e(1), e(0), e(7)], vec![e(4)]] {
            let prof = trace_profile(&c, &lead);
            assert_eq!(prof.iter().sum::<u64>(), 27);
            for k in f.elements() {
                let mut desc = lead.clone();
                desc.push(k);
                let g = PolyGraphCurve::new(f, &desc).unwrap();
                assert_eq!(count_intersections(&c, &g).unwrap().n_points, prof[c.trace(k).index()]);
            }
        }
    }

    #[test]
    fn sweep_matches_per_tuple_enumeration_q2() {
        let c = curve(2, 1);
        for degree in 1..=3 {
            let rep = sweep(&c, degree, SweepMode::Exhaustive).unwrap();
            let mut hist = BTreeMap::new();
            let mut n_tuples = 0u64;
            for_each_count(&c, degree, |tuple, n| {
                let g = PolyGraphCurve::new(c.field(), tuple).unwrap();
                assert_eq!(count_intersections(&c, &g).unwrap().n_points, n);
                *hist.entry(n).or_insert(0u64) += 1;
                n_tuples += 1;
            })
            .unwrap();
            assert_eq!(rep.histogram, hist);
            assert_eq!(rep.swept, n_tuples);
        }
    }

    #[test]
    fn parabola_sweep_q2_tuple_count() {
        let c = curve(2, 1);
        let rep = sweep_parabolas(&c, SweepMode::Exhaustive).unwrap();
        assert_eq!(rep.swept, 7 * 8 * 8);
        assert_eq!(rep.histogram.values().sum::<u64>(), rep.swept);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn budget_refusal() {
        let c = curve(11, 1);
        assert!(matches!(
            sweep_parabolas(&c, SweepMode::Exhaustive),
            Err(Error::Budget { max: 9, .. })
        ));
        let c5 = curve(5, 1);
        assert!(matches!(sweep_cubics(&c5, SweepMode::Exhaustive), Err(Error::Budget { .. })));
        let rep = sweep_cubics(&c5, SweepMode::Sample { seed: 1, count: 20 }).unwrap();
        assert_eq!(rep.swept, 20 * 125);
    }

    #[test]
    fn samples_are_reproducible() {
        let c = curve(3, 1);
        let a = sweep_parabolas(&c, SweepMode::Sample { seed: 7, count: 50 }).unwrap();
        let b = sweep_parabolas(&c, SweepMode::Sample { seed: 7, count: 50 }).unwrap();
        assert_eq!(a, b);
        let s = sample_leading(7, 50, 2, 27);
        assert!(s.iter().all(|t| !t[0].is_zero() && t.len() == 2));
    }

    #[test]
    fn upper_tuple_enumeration_is_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for idx in 0..7 * 8 {
            let t = upper_tuple(idx, 3, 8);
            assert!(!t[0].is_zero());
            assert!(seen.insert(t));
        }
    }
}
