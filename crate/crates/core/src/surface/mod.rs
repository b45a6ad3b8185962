//! Cubic surfaces attached to a graph `y = A(x)`.
//!
//! Writing `x = Φ_B(x_0, x_1, x_2)` in a normal basis turns
//! `T(A x² + B x + C) - N(x) = 0` into a cubic `S₁` over `F_q` whose
//! `F_q`-points are the intersections. The change of variables `X = M x`,
//! with `M` built from the conjugates of `α`, gives the model
//!
//! ```text
//! S₂:  X₀X₁X₂ = A X₀² + A^q X₁² + A^{q²} X₂² + B X₀ + B^q X₁ + B^{q²} X₂ + D
//! ```
//!
//! over `F_{q^3}`, on which the intersections are the points `(β, β^q, β^{q²})`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{linalg, Elem, Field, FieldTower, NormalBasis};
use crate::intersect::PolyGraphCurve;

mod lines;
mod singular;

pub use lines::{b_zero_singularities, check_lines_through_singularity, BZeroPoints, LineCheck};
pub use singular::{
    classify_and_bound, classify_parabola, classify_parabolas, BoundInterval, ClassifyMode,
    ParabolaRecord, Pattern, SingularPoint, SingularityReport, SingularityScanner,
    CLASSIFY_EXHAUSTIVE_MAX_Q, SMOOTH_ETAS,
};

/// Exponent triple `(i, j, k)` of `x₀^i x₁^j x₂^k`.
pub type Monomial = [u8; 3];

/// A polynomial in three variables with coefficients in `F_q`, stored sparsely.
///
/// Coefficients keep their index in every extension of `F_q` in the tower, so
/// the same polynomial evaluates over `F_q`, `F_{q^2}`, `F_{q^3}` or `F_{q^4}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly3 {
    terms: BTreeMap<Monomial, Elem>,
}

impl Poly3 {
    pub fn new() -> Poly3 {
        Poly3::default()
    }

    /// Adds `c · x^e` (in `f`).
    pub fn add_term(&mut self, f: &Field, e: Monomial, c: Elem) {
        let entry = self.terms.entry(e).or_insert(Elem::ZERO);
        *entry = f.add(*entry, c);
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn coeff(&self, e: Monomial) -> Elem {
        self.terms.get(&e).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Elem)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn total_degree(&self) -> Option<u8> {
        self.terms.keys().map(|e| e[0] + e[1] + e[2]).max()
    }

    /// Homogeneous component of the given degree.
    pub fn homogeneous_part(&self, degree: u8) -> Poly3 {
        Poly3 {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e[0] + e[1] + e[2] == degree)
                .map(|(&e, &c)| (e, c))
                .collect(),
        }
    }

    /// Formal partial derivative in `x_var`.
    pub fn partial(&self, f: &Field, var: usize) -> Poly3 {
        let mut out = Poly3::new();
        for (mut e, c) in self.terms() {
            if e[var] == 0 {
                continue;
            }
            let c = f.scale(e[var] as i64, c);
            e[var] -= 1;
            out.add_term(f, e, c);
        }
        out
    }

    pub fn eval(&self, k: &Field, x: [Elem; 3]) -> Elem {
        let pows: [[Elem; 4]; 3] = x.map(|xi| {
            let x2 = k.mul(xi, xi);
            [Elem::ONE, xi, x2, k.mul(x2, xi)]
        });
        self.terms.iter().fold(Elem::ZERO, |acc, (e, &c)| {
            let m = k.mul(
                k.mul(pows[0][e[0] as usize], pows[1][e[1] as usize]),
                pows[2][e[2] as usize],
            );
            k.add(acc, k.mul(c, m))
        })
    }
}

/// The matrix `M` with rows `(α, α^q, α^{q²})`, `(α^q, α^{q²}, α)`,
/// `(α^{q²}, α, α^q)`; it sends `x ∈ F_q³` to `(β, β^q, β^{q²})`, `β = Φ_B(x)`.
#[derive(Clone, Debug)]
pub struct ChangeOfVars {
    fq3: Arc<Field>,
    rows: [[Elem; 3]; 3],
    inverse: Vec<Vec<Elem>>,
}

impl ChangeOfVars {
    pub fn new(tower: &FieldTower, basis: &NormalBasis) -> Result<ChangeOfVars> {
        let w = basis.conjugates();
        let rows = [[w[0], w[1], w[2]], [w[1], w[2], w[0]], [w[2], w[0], w[1]]];
        let as_vecs: Vec<Vec<Elem>> = rows.iter().map(|r| r.to_vec()).collect();
        let inverse = linalg::invert(tower.fq3(), &as_vecs)
            .ok_or_else(|| Error::Precondition("basis is not normal: M is singular".into()))?;
        Ok(ChangeOfVars { fq3: Arc::clone(tower.fq3()), rows, inverse })
    }

    pub fn matrix(&self) -> [[Elem; 3]; 3] {
        self.rows
    }

    /// `M x` over `F_{q^3}`.
    pub fn apply(&self, x: [Elem; 3]) -> [Elem; 3] {
        let v = linalg::apply(&self.fq3, &self.rows.map(|r| r.to_vec()), &x);
        [v[0], v[1], v[2]]
    }

    /// `M⁻¹ X` over `F_{q^3}`.
    pub fn unapply(&self, x: [Elem; 3]) -> [Elem; 3] {
        let v = linalg::apply(&self.fq3, &self.inverse, &x);
        [v[0], v[1], v[2]]
    }
}

/// `S₁: T(A x² + B x + C) - N(x) = 0` in normal-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceS1 {
    pub parabola: PolyGraphCurve,
    pub alpha: Elem,
    pub poly: Poly3,
    partials: [Poly3; 3],
}

impl SurfaceS1 {
    /// Coefficient of `x₀^i x₁^j x₂^k`.
    pub fn coeff(&self, i: u8, j: u8, k: u8) -> Elem {
        self.poly.coeff([i, j, k])
    }

    pub fn constant(&self) -> Elem {
        self.coeff(0, 0, 0)
    }

    pub fn partial(&self, var: usize) -> &Poly3 {
        &self.partials[var]
    }

    pub fn eval(&self, k: &Field, x: [Elem; 3]) -> Elem {
        self.poly.eval(k, x)
    }

    /// `S₁` and its three formal partials vanish at `x`.
    pub fn is_singular_at(&self, k: &Field, x: [Elem; 3]) -> bool {
        self.eval(k, x).is_zero() && self.partials.iter().all(|d| d.eval(k, x).is_zero())
    }
}

fn require_cubic(tower: &FieldTower) -> Result<()> {
    if tower.r() != 3 {
        return Err(Error::RequiresCubicExtension(tower.r()));
    }
    Ok(())
}

/// `-N(Φ_B(x))` expanded; depends only on `α`.
pub(crate) fn cubic_part(tower: &FieldTower, basis: &NormalBasis) -> Poly3 {
    let (fq, f3) = (tower.fq(), tower.fq3());
    let q = tower.q() as u64;
    let alpha = basis.alpha();
    let n_alpha = tower.norm_in(f3, alpha);
    let t_q2 = tower.trace_in(f3, f3.pow(alpha, q + 2));
    let t_2q1 = tower.trace_in(f3, f3.pow(alpha, 2 * q + 1));
    let t_cube = tower.trace_in(f3, f3.pow(alpha, 3));
    let mut p = Poly3::new();
    for e in [[3, 0, 0], [0, 3, 0], [0, 0, 3]] {
        p.add_term(fq, e, fq.neg(n_alpha));
    }
    for e in [[2, 1, 0], [0, 2, 1], [1, 0, 2]] {
        p.add_term(fq, e, fq.neg(t_q2));
    }
    for e in [[2, 0, 1], [1, 2, 0], [0, 1, 2]] {
        p.add_term(fq, e, fq.neg(t_2q1));
    }
    p.add_term(fq, [1, 1, 1], fq.neg(fq.add(fq.scale(3, n_alpha), t_cube)));
    p
}

/// Builds `S₁` for a parabola `y = A x² + B x + C`.
pub fn build_s1(tower: &FieldTower, parabola: &PolyGraphCurve, basis: &NormalBasis) -> Result<SurfaceS1> {
    require_cubic(tower)?;
    if parabola.degree() != 2 {
        return Err(Error::InvalidCurve("S₁ is defined for parabolas only".into()));
    }
    let (fq, f3) = (tower.fq(), tower.fq3());
    let q = tower.q() as u64;
    for i in 0..=2 {
        f3.check(parabola.coeff(i))?;
    }
    // a `NormalBasis` can only be built from a normal element
    let [w0, w1, w2] = basis.conjugates();
    let (a, b, c) = (parabola.coeff(2), parabola.coeff(1), parabola.coeff(0));
    let tr = |x: Elem| tower.trace_in(f3, x);
    let mut poly = cubic_part(tower, basis);
    poly.add_term(fq, [2, 0, 0], tr(f3.mul(a, f3.mul(w0, w0))));
    poly.add_term(fq, [0, 2, 0], tr(f3.mul(a, f3.mul(w1, w1))));
    poly.add_term(fq, [0, 0, 2], tr(f3.mul(a, f3.mul(w2, w2))));
    poly.add_term(fq, [1, 1, 0], fq.scale(2, tr(f3.mul(a, f3.mul(w0, w1)))));
    poly.add_term(fq, [1, 0, 1], fq.scale(2, tr(f3.mul(a, f3.mul(w0, w2)))));
    poly.add_term(fq, [0, 1, 1], fq.scale(2, tr(f3.mul(a, f3.mul(w1, w2)))));
    poly.add_term(fq, [1, 0, 0], tr(f3.mul(w0, b)));
    poly.add_term(fq, [0, 1, 0], tr(f3.mul(w0, f3.pow(b, q * q))));
    poly.add_term(fq, [0, 0, 1], tr(f3.mul(w0, f3.pow(b, q))));
    poly.add_term(fq, [0, 0, 0], tr(c));
    let partials = [0, 1, 2].map(|v| poly.partial(fq, v));
    Ok(SurfaceS1 { parabola: parabola.clone(), alpha: basis.alpha(), poly, partials })
}

/// `|{x ∈ F_q³ : S₁(x) = 0}|` by direct evaluation.
pub fn rational_points_s1(tower: &FieldTower, s1: &SurfaceS1) -> u64 {
    let fq = tower.fq();
    let mut n = 0;
    for x0 in fq.elements() {
        for x1 in fq.elements() {
            for x2 in fq.elements() {
                if s1.eval(fq, [x0, x1, x2]).is_zero() {
                    n += 1;
                }
            }
        }
    }
    n
}

/// `X₀X₁X₂ = Σ A^{q^i} X_i^h + ... + E`, with `h = 2` (parabola) or `h = 3`
/// (cubic graph). `coeffs` holds `(A_h, ..., A_1)` and `constant` is the
/// trace of the graph's constant term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceS2 {
    pub coeffs: Vec<Elem>,
    pub constant: Elem,
}

impl SurfaceS2 {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Right-hand side minus `X₀X₁X₂`, evaluated over `F_{q^3}`.
    pub fn eval(&self, tower: &FieldTower, x: [Elem; 3]) -> Elem {
        let f3 = tower.fq3();
        let h = self.degree();
        let mut acc = self.constant;
        for (i, &xi) in x.iter().enumerate() {
            let mut xp = Elem::ONE;
            for k in 0..h {
                xp = f3.mul(xp, xi);
                let c = f3.pow(self.coeffs[h - 1 - k], (tower.q() as u64).pow(i as u32));
                acc = f3.add(acc, f3.mul(c, xp));
            }
        }
        f3.sub(acc, f3.mul(f3.mul(x[0], x[1]), x[2]))
    }

    /// `(β, β^q, β^{q²})` lies on the surface.
    pub fn contains_conjugate_point(&self, tower: &FieldTower, beta: Elem) -> bool {
        let f3 = tower.fq3();
        let b1 = tower.frobenius(f3, beta);
        let b2 = tower.frobenius(f3, b1);
        self.eval(tower, [beta, b1, b2]).is_zero()
    }
}

fn build_s2_graph(tower: &FieldTower, g: &PolyGraphCurve, degree: usize) -> Result<SurfaceS2> {
    require_cubic(tower)?;
    if g.degree() != degree {
        return Err(Error::InvalidCurve(format!("expected a graph of degree {degree}")));
    }
    let f3 = tower.fq3();
    let desc = g.descending();
    for &c in &desc {
        f3.check(c)?;
    }
    Ok(SurfaceS2 {
        coeffs: desc[..degree].to_vec(),
        constant: tower.trace_in(f3, g.constant()),
    })
}

pub fn build_s2(tower: &FieldTower, parabola: &PolyGraphCurve) -> Result<SurfaceS2> {
    build_s2_graph(tower, parabola, 2)
}

pub fn build_s2_cubic(tower: &FieldTower, cubic: &PolyGraphCurve) -> Result<SurfaceS2> {
    build_s2_graph(tower, cubic, 3)
}
