//! The norm-trace curve `x^{(q^r-1)/(q-1)} = y^{q^{r-1}} + ... + y^q + y`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Elem, Field, FieldTower};

/// Largest `q^r` for which a curve is built (its tables are `O(q^r)`).
pub const MAX_CURVE_FIELD: u32 = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffinePoint {
    pub x: Elem,
    pub y: Elem,
}

/// The curve over `F_{q^r}` with its norm/trace tables and the partition of
/// `F_{q^r}` into trace fibers.
#[derive(Debug)]
pub struct NormTraceCurve {
    tower: Arc<FieldTower>,
    norms: Vec<Elem>,
    traces: Vec<Elem>,
    fibers: Vec<Vec<Elem>>,
}

impl NormTraceCurve {
    pub fn new(tower: Arc<FieldTower>) -> Result<NormTraceCurve> {
        let field = Arc::clone(tower.ext());
        if field.order() > MAX_CURVE_FIELD {
            return Err(Error::FieldTooLarge {
                order: field.order() as u64,
                cap: MAX_CURVE_FIELD as u64,
            });
        }
        let norms: Vec<Elem> = field.elements().map(|x| tower.norm(x)).collect();
        let traces: Vec<Elem> = field.elements().map(|x| tower.trace(x)).collect();
        let mut fibers = vec![Vec::new(); tower.q() as usize];
        for y in field.elements() {
            fibers[traces[y.index()].index()].push(y);
        }
        Ok(NormTraceCurve { tower, norms, traces, fibers })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn field(&self) -> &Arc<Field> {
        self.tower.ext()
    }

    pub fn q(&self) -> u64 {
        self.tower.q() as u64
    }

    pub fn r(&self) -> u32 {
        self.tower.r()
    }

    /// Pole order of `x` at the place at infinity, `q^{r-1}`.
    pub fn pole_order_x(&self) -> u64 {
        self.q().pow(self.r() - 1)
    }

    /// Pole order of `y` at the place at infinity, `(q^r - 1)/(q - 1)`.
    pub fn pole_order_y(&self) -> u64 {
        (self.q().pow(self.r()) - 1) / (self.q() - 1)
    }

    /// `q^{2r-1}`.
    pub fn expected_affine_points(&self) -> u64 {
        self.q().pow(2 * self.r() - 1)
    }

    #[inline]
    pub fn norm(&self, x: Elem) -> Elem {
        self.norms[x.index()]
    }

    #[inline]
    pub fn trace(&self, x: Elem) -> Elem {
        self.traces[x.index()]
    }

    pub fn norm_table(&self) -> &[Elem] {
        &self.norms
    }

    pub fn trace_table(&self) -> &[Elem] {
        &self.traces
    }

    /// All `y` with `T(y) = t`, in index order.
    pub fn trace_fiber(&self, t: Elem) -> &[Elem] {
        &self.fibers[t.index()]
    }

    pub fn is_on_curve(&self, pt: AffinePoint) -> Result<bool> {
        let f = self.field();
        f.check(pt.x)?;
        f.check(pt.y)?;
        Ok(self.norm(pt.x) == self.trace(pt.y))
    }

    /// Points with first coordinate `x0`, ordered by `y`.
    pub fn fiber_over_x(&self, x0: Elem) -> Result<Vec<AffinePoint>> {
        self.field().check(x0)?;
        Ok(self
            .trace_fiber(self.norm(x0))
            .iter()
            .map(|&y| AffinePoint { x: x0, y })
            .collect())
    }

    /// Every affine point, `x`-major then `y` in index order.
    pub fn points(&self) -> impl Iterator<Item = AffinePoint> + '_ {
        self.field().elements().flat_map(move |x| {
            self.trace_fiber(self.norm(x)).iter().map(move |&y| AffinePoint { x, y })
        })
    }

    pub fn enumerate_points(&self) -> Vec<AffinePoint> {
        self.points().collect()
    }
}
