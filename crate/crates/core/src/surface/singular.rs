//! Singular points of `S₁` and the point-count interval for each pattern.
//!
//! The affine scan runs over `F_{q^4}³` and `F_{q^3}³`: every Frobenius orbit
//! of size at most 4 has a representative in one of them. For each pair
//! `(x₀, x₁)` the equation `∂S₁/∂x₂ = 0` is a quadratic in `x₂`, solved with
//! square-root or Artin–Schreier tables; the remaining equations are checked
//! on the candidates.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_s1, cubic_part, rational_points_s1, ChangeOfVars, SurfaceS1};
use crate::error::{Error, Result};
use crate::ff::{Elem, Field, FieldTower, NormalBasis, FQ4_MAX_Q};
use crate::intersect::{decompose, PolyGraphCurve};

/// Largest `q` classified exhaustively; larger `q` must be sampled.
pub const CLASSIFY_EXHAUSTIVE_MAX_Q: u32 = 3;

/// Smallest `q` for which the two-conjugate-point lower bound is asserted.
const CONJUGATE_PAIR_LOWER_MIN_Q: u64 = 13;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    #[serde(rename = "smooth")]
    Smooth,
    #[serde(rename = "1-rational")]
    OneRational,
    #[serde(rename = "2-rational")]
    TwoRational,
    #[serde(rename = "2-conjugate-pair")]
    TwoConjugatePair,
    #[serde(rename = "3-with-rational")]
    ThreeWithRational,
    #[serde(rename = "3-conjugate-triple")]
    ThreeConjugateTriple,
    #[serde(rename = "4-with-rational")]
    FourWithRational,
    #[serde(rename = "4-two-conjugate-pairs")]
    FourTwoConjugatePairs,
    /// Four points conjugate over `F_{q^4}`; never expected.
    #[serde(rename = "4-conjugate-quartic")]
    FourConjugateQuartic,
    /// More than four singular points, or a set not closed under Frobenius.
    #[serde(rename = "excess")]
    Excess,
    #[serde(rename = "B0-origin")]
    B0Origin,
    #[serde(rename = "B0-four-points")]
    B0FourPoints,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Smooth => "smooth",
            Pattern::OneRational => "1-rational",
            Pattern::TwoRational => "2-rational",
            Pattern::TwoConjugatePair => "2-conjugate-pair",
            Pattern::ThreeWithRational => "3-with-rational",
            Pattern::ThreeConjugateTriple => "3-conjugate-triple",
            Pattern::FourWithRational => "4-with-rational",
            Pattern::FourTwoConjugatePairs => "4-two-conjugate-pairs",
            Pattern::FourConjugateQuartic => "4-conjugate-quartic",
            Pattern::Excess => "excess",
            Pattern::B0Origin => "B0-origin",
            Pattern::B0FourPoints => "B0-four-points",
        }
    }

    /// Pattern determined by the sorted Frobenius orbit sizes.
    pub fn from_orbits(sizes: &[u32]) -> Pattern {
        let delta: u32 = sizes.iter().sum();
        let rational = sizes.contains(&1);
        match (delta, rational) {
            (0, _) => Pattern::Smooth,
            (1, _) => Pattern::OneRational,
            (2, true) => Pattern::TwoRational,
            (2, false) => Pattern::TwoConjugatePair,
            (3, true) => Pattern::ThreeWithRational,
            (3, false) => Pattern::ThreeConjugateTriple,
            (4, true) => Pattern::FourWithRational,
            (4, false) if sizes == [2, 2] => Pattern::FourTwoConjugatePairs,
            (4, false) => Pattern::FourConjugateQuartic,
            _ => Pattern::Excess,
        }
    }
}

/// A singular point; `coords` are indices in `F_{q^field_degree}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SingularPoint {
    pub coords: [Elem; 3],
    /// Size of the Frobenius orbit, i.e. the degree of the field of definition over `F_q`.
    pub field_degree: u32,
}

impl SingularPoint {
    pub fn is_rational(&self) -> bool {
        self.field_degree == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub delta: usize,
    pub points: Vec<SingularPoint>,
    /// Frobenius orbit sizes, ascending.
    pub orbit_sizes: Vec<u32>,
    /// Pattern, with the `B = 0` labels applied where they match.
    pub pattern: Pattern,
    /// Pattern from the orbit structure alone; drives the interval.
    pub orbit_pattern: Pattern,
    /// Singular points of the projective closure on the plane at infinity.
    pub at_infinity: usize,
    pub conjugate_closed: bool,
    /// Characteristic 2 lies outside the case analysis the intervals come from.
    pub char2: bool,
}

/// Predicted range for `|S₁(F_q)|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInterval {
    pub lower: u64,
    pub upper: u64,
    /// The stated lower bound does not apply at this `q` and was replaced by 0.
    pub lower_vacuous: bool,
    /// When present, counts must also have the form `q² + ηq + 1` with `η` in this set.
    pub eta_set: Option<Vec<i64>>,
}

impl BoundInterval {
    pub fn conforms(&self, count: u64, q: u64) -> bool {
        if count < self.lower || count > self.upper {
            return false;
        }
        match &self.eta_set {
            Some(set) => {
                let (eta, residue) = decompose(count, q);
                residue == 1 && set.contains(&eta)
            }
            None => true,
        }
    }
}

pub const SMOOTH_ETAS: [i64; 9] = [-2, -1, 0, 1, 2, 3, 4, 5, 7];

/// Interval for `|S₁(F_q)|` given the orbit structure of the singular locus.
pub fn classify_and_bound(report: &SingularityReport, q: u64) -> Result<BoundInterval> {
    let q2 = q * q;
    let plain = |lower, upper| BoundInterval { lower, upper, lower_vacuous: false, eta_set: None };
    Ok(match report.orbit_pattern {
        Pattern::Smooth => BoundInterval {
            lower: q2 - 2 * q + 1,
            upper: q2 + 7 * q + 1,
            lower_vacuous: false,
            eta_set: Some(SMOOTH_ETAS.to_vec()),
        },
        Pattern::OneRational => plain(0, q2),
        Pattern::TwoRational => plain(0, q2 + q - 1),
        Pattern::TwoConjugatePair => {
            if q >= CONJUGATE_PAIR_LOWER_MIN_Q {
                plain(q2 + 39 - 14 * q, q2 - q)
            } else {
                BoundInterval { lower: 0, upper: q2 - q, lower_vacuous: true, eta_set: None }
            }
        }
        Pattern::ThreeWithRational => plain(0, q2 + 2 * q - 2),
        Pattern::ThreeConjugateTriple => BoundInterval {
            lower: q2 + 1,
            upper: q2 + 2 * q + 1,
            lower_vacuous: false,
            eta_set: Some(vec![0, 1, 2]),
        },
        Pattern::FourWithRational => plain(0, q2 + 3 * q - 3),
        Pattern::FourTwoConjugatePairs => plain(0, q2),
        Pattern::FourConjugateQuartic => {
            return Err(Error::Finding("four singular points conjugate over F_{q^4}".into()))
        }
        Pattern::Excess | Pattern::B0Origin | Pattern::B0FourPoints => {
            return Err(Error::Finding(format!(
                "singular locus outside the classification: orbit sizes {:?}",
                report.orbit_sizes
            )))
        }
    })
}

/// Square roots and Artin–Schreier roots over one scan field.
struct ScanField {
    field: Arc<Field>,
    /// Degree over `F_q`.
    degree: u32,
    /// `sqrt[y]` = some `x` with `x² = y`, or `NONE`.
    sqrt: Vec<u32>,
    /// Characteristic 2: `art[k]` = some `u` with `u² + u = k`, or `NONE`.
    art: Vec<u32>,
}

impl ScanField {
    fn new(field: &Arc<Field>, degree: u32) -> ScanField {
        let n = field.order() as usize;
        let mut sqrt = vec![NONE; n];
        let mut art = Vec::new();
        if field.characteristic() == 2 {
            art = vec![NONE; n];
        }
        for x in field.elements() {
            let x2 = field.square(x);
            sqrt[x2.index()] = x.raw();
            if !art.is_empty() {
                art[field.add(x2, x).index()] = x.raw();
            }
        }
        ScanField { field: Arc::clone(field), degree, sqrt, art }
    }

    /// Roots of `e2 x² + e1 x + e0`; `None` when the polynomial vanishes identically.
    #[inline]
    fn roots(&self, e2: Elem, e1: Elem, e0: Elem, out: &mut Vec<Elem>) -> Option<()> {
        let f = &*self.field;
        out.clear();
        if e2.is_zero() {
            if !e1.is_zero() {
                out.push(f.neg(f.div(e0, e1)));
            } else if !e0.is_zero() {
            } else {
                return None;
            }
            return Some(());
        }
        if f.characteristic() == 2 {
            if e1.is_zero() {
                out.push(Elem::from_raw(self.sqrt[f.div(e0, e2).index()]));
            } else {
                // x = (e1/e2) u with u² + u = e0 e2 / e1²
                let s = f.div(e1, e2);
                let k = f.div(f.mul(e0, e2), f.square(e1));
                let u = self.art[k.index()];
                if u != NONE {
                    let u = Elem::from_raw(u);
                    out.push(f.mul(s, u));
                    out.push(f.mul(s, f.add(u, Elem::ONE)));
                }
            }
        } else {
            let disc = f.sub(f.square(e1), f.scale(4, f.mul(e2, e0)));
            let s = self.sqrt[disc.index()];
            if s != NONE {
                let s = Elem::from_raw(s);
                let inv = f.inv(f.scale(2, e2));
                out.push(f.mul(f.sub(s, e1), inv));
                if !s.is_zero() {
                    out.push(f.mul(f.sub(f.neg(s), e1), inv));
                }
            }
        }
        Some(())
    }
}

/// Per-tower state for repeated singularity scans: root tables for
/// `F_{q^4}` and `F_{q^3}` and the singular points of the cubic part at
/// infinity.
pub struct SingularityScanner {
    tower: Arc<FieldTower>,
    basis: NormalBasis,
    scans: Vec<ScanField>,
    /// Projective points of `F_{q^3}` where the cubic part and its gradient vanish.
    infinity_locus: Vec<[Elem; 3]>,
}

impl SingularityScanner {
    pub fn new(tower: &Arc<FieldTower>, basis: &NormalBasis) -> Result<SingularityScanner> {
        if tower.r() != 3 {
            return Err(Error::RequiresCubicExtension(tower.r()));
        }
        let fq4 = tower.fq4().ok_or(Error::Budget {
            what: "singularity scan (needs F_{q^4})",
            q: tower.q(),
            max: FQ4_MAX_Q,
        })?;
        let scans = vec![ScanField::new(fq4, 4), ScanField::new(tower.fq3(), 3)];
        // The cubic part is -N(Φ_B(x)) = -X₀X₁X₂ after M; its singular locus
        // is the three coordinate vertices pulled back by M⁻¹.
        let mv = ChangeOfVars::new(tower, basis)?;
        let f3 = tower.fq3();
        let cubic = cubic_part(tower, basis);
        let grads = [0, 1, 2].map(|v| cubic.partial(tower.fq(), v));
        let infinity_locus = (0..3)
            .map(|i| {
                let mut e = [Elem::ZERO; 3];
                e[i] = Elem::ONE;
                normalize(f3, mv.unapply(e))
            })
            .filter(|&x| cubic.eval(f3, x).is_zero() && grads.iter().all(|g| g.eval(f3, x).is_zero()))
            .collect();
        Ok(SingularityScanner {
            tower: Arc::clone(tower),
            basis: basis.clone(),
            scans,
            infinity_locus,
        })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn basis(&self) -> &NormalBasis {
        &self.basis
    }

    pub fn infinity_locus(&self) -> &[[Elem; 3]] {
        &self.infinity_locus
    }

    /// Affine singular points of `S₁` over `F_{q^4}` and `F_{q^3}`, grouped into
    /// Frobenius orbits, plus the check at infinity.
    pub fn find_singular_points(&self, s1: &SurfaceS1) -> SingularityReport {
        let q = self.tower.q();
        let mut found: Vec<(usize, [Elem; 3])> = Vec::new();
        for (si, scan) in self.scans.iter().enumerate() {
            for x in self.scan_field(s1, scan) {
                // F_q points were already found in the F_{q^4} pass
                if scan.degree == 3 && x.iter().all(|c| c.raw() < q) {
                    continue;
                }
                found.push((si, x));
            }
        }
        let set: BTreeSet<(usize, [Elem; 3])> = found.iter().copied().collect();
        let mut points = Vec::new();
        let mut orbit_sizes = Vec::new();
        let mut seen = BTreeSet::new();
        let mut closed = true;
        for &(si, x) in &found {
            if seen.contains(&(si, x)) {
                continue;
            }
            let f = &self.scans[si].field;
            let mut orbit = vec![x];
            loop {
                let next = orbit.last().unwrap().map(|c| self.tower.frobenius(f, c));
                if next == x {
                    break;
                }
                orbit.push(next);
            }
            let size = orbit.len() as u32;
            for &y in &orbit {
                closed &= set.contains(&(si, y));
                seen.insert((si, y));
                points.push(SingularPoint { coords: y, field_degree: size });
            }
            orbit_sizes.push(size);
        }
        orbit_sizes.sort_unstable();
        let f3 = self.tower.fq3();
        let quad = s1.poly.homogeneous_part(2);
        let at_infinity = self.infinity_locus.iter().filter(|&&x| quad.eval(f3, x).is_zero()).count();
        let orbit_pattern = if closed { Pattern::from_orbits(&orbit_sizes) } else { Pattern::Excess };
        let pattern = self.b_zero_label(s1, &points).unwrap_or(orbit_pattern);
        SingularityReport {
            delta: points.len(),
            points,
            orbit_sizes,
            pattern,
            orbit_pattern,
            at_infinity,
            conjugate_closed: closed,
            char2: self.tower.p() == 2,
        }
    }

    fn b_zero_label(&self, s1: &SurfaceS1, points: &[SingularPoint]) -> Option<Pattern> {
        let t = &*self.tower;
        let g = &s1.parabola;
        if t.p() == 2 || !g.coeff(1).is_zero() {
            return None;
        }
        let fq = t.fq();
        let d = s1.constant();
        let four_norm = fq.scale(-4, t.norm_in(t.fq3(), g.coeff(2)));
        if d.is_zero() && points.len() == 1 && points[0].coords == [Elem::ZERO; 3] {
            Some(Pattern::B0Origin)
        } else if d == four_norm && points.len() == 4 {
            Some(Pattern::B0FourPoints)
        } else {
            None
        }
    }

    fn scan_field(&self, s1: &SurfaceS1, scan: &ScanField) -> Vec<[Elem; 3]> {
        let f = &*scan.field;
        let d2 = s1.partial(2);
        let c = |e: [u8; 3]| d2.coeff(e);
        let e2 = c([0, 0, 2]);
        let (c1_x0, c1_x1, c1_1) = (c([1, 0, 1]), c([0, 1, 1]), c([0, 0, 1]));
        let (c0_x00, c0_x11, c0_x01) = (c([2, 0, 0]), c([0, 2, 0]), c([1, 1, 0]));
        let (c0_x0, c0_x1, c0_1) = (c([1, 0, 0]), c([0, 1, 0]), c([0, 0, 0]));
        let u1: Vec<Elem> = f.elements().map(|x1| f.mul(c1_x1, x1)).collect();
        let u0: Vec<Elem> = f
            .elements()
            .map(|x1| f.add(f.mul(c0_x11, f.square(x1)), f.mul(c0_x1, x1)))
            .collect();
        let mut out = Vec::new();
        let mut roots = Vec::with_capacity(2);
        for x0 in f.elements() {
            let k1 = f.add(f.mul(c1_x0, x0), c1_1);
            let k0 = f.add(f.add(f.mul(c0_x00, f.square(x0)), f.mul(c0_x0, x0)), c0_1);
            let m = f.mul(c0_x01, x0);
            for x1 in f.elements() {
                let i = x1.index();
                let e1 = f.add(k1, u1[i]);
                let e0 = f.add(f.add(k0, u0[i]), f.mul(m, x1));
                match scan.roots(e2, e1, e0, &mut roots) {
                    Some(()) => {
                        for &x2 in &roots {
                            if s1.is_singular_at(f, [x0, x1, x2]) {
                                out.push([x0, x1, x2]);
                            }
                        }
                    }
                    None => {
                        for x2 in f.elements() {
                            if s1.is_singular_at(f, [x0, x1, x2]) {
                                out.push([x0, x1, x2]);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Scales a nonzero projective point so its first nonzero coordinate is 1.
fn normalize(f: &Field, x: [Elem; 3]) -> [Elem; 3] {
    match x.iter().find(|c| !c.is_zero()) {
        Some(&lead) => {
            let inv = f.inv(lead);
            x.map(|c| f.mul(c, inv))
        }
        None => x,
    }
}

/// One classified parabola.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolaRecord {
    pub a: Elem,
    pub b: Elem,
    pub c: Elem,
    pub s1_count: u64,
    pub report: SingularityReport,
    pub predicted: Option<BoundInterval>,
    pub conforms: bool,
    /// Set when the singular locus falls outside every known pattern.
    pub finding: Option<String>,
}

pub fn classify_parabola(scanner: &SingularityScanner, parabola: &PolyGraphCurve) -> Result<ParabolaRecord> {
    let tower = scanner.tower();
    let s1 = build_s1(tower, parabola, scanner.basis())?;
    let s1_count = rational_points_s1(tower, &s1);
    let report = scanner.find_singular_points(&s1);
    let q = tower.q() as u64;
    let (predicted, conforms, finding) = match classify_and_bound(&report, q) {
        Ok(iv) => {
            let ok = iv.conforms(s1_count, q) && report.at_infinity == 0;
            (Some(iv), ok, None)
        }
        Err(Error::Finding(msg)) => (None, false, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(ParabolaRecord {
        a: parabola.coeff(2),
        b: parabola.coeff(1),
        c: parabola.coeff(0),
        s1_count,
        report,
        predicted,
        conforms,
        finding,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifyMode {
    Exhaustive,
    Sample { seed: u64, count: u64 },
}

/// Classifies every parabola (`q ≤ 3`) or a seeded sample, in index order of
/// `(A, B, C)` or sample order.
pub fn classify_parabolas(scanner: &SingularityScanner, mode: ClassifyMode) -> Result<Vec<ParabolaRecord>> {
    let tower = scanner.tower();
    let f3 = tower.fq3();
    let n = f3.order() as u64;
    let tuples: Vec<[Elem; 3]> = match mode {
        ClassifyMode::Exhaustive => {
            if tower.q() > CLASSIFY_EXHAUSTIVE_MAX_Q {
                return Err(Error::Budget {
                    what: "exhaustive singularity classification",
                    q: tower.q(),
                    max: CLASSIFY_EXHAUSTIVE_MAX_Q,
                });
            }
            (0..(n - 1) * n * n)
                .map(|i| {
                    let e = |v: u64| Elem::from_raw(v as u32);
                    [e(i / (n * n) + 1), e(i / n % n), e(i % n)]
                })
                .collect()
        }
        ClassifyMode::Sample { seed, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| {
                    let mut g = |lo: u32| Elem::from_raw(rng.gen_range(lo..n as u32));
                    [g(1), g(0), g(0)]
                })
                .collect()
        }
    };
    tuples
        .par_iter()
        .map(|&[a, b, c]| classify_parabola(scanner, &PolyGraphCurve::parabola(f3, a, b, c)?))
        .collect()
}
