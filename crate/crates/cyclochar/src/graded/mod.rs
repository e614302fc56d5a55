//! Graded differential algebra backends.
//!
//! Every backend represents elements as finite linear combinations of basis
//! keys with [`Scalar`] coefficients; an [`Algebra`] value knows how to
//! multiply keys (producing finitely many keys with structure-constant
//! coefficients) and how to grade them.  Compound backends (crossed products,
//! interval extensions, tensor products, direct sums, the twisted 2×2
//! construction and unitization) wrap a base backend recursively.

pub mod derivation;
pub mod group;
pub mod trace;

use crate::matrix::Mat;
use crate::scalar::{Cyclotomic, Rat, Scalar};
use group::{GroupElt, TorusAction};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Errors surfaced by trace evaluation and scenario-level checks.
#[derive(Debug, thiserror::Error)]
pub enum CharError {
    #[error("tracked exponents fail to cancel under the trace: {0}")]
    ExponentResidue(String),
    #[error("operation unsupported for this backend: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, CharError>;

/// Exponent polynomial `q(x) = Σ c_f e^{2πi f·x}` carried symbolically in a
/// factor `e^{q(x)}`; coefficients live at a pinned cyclotomic order so that
/// equal exponents have equal representations (keys must merge).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ExpoPoly {
    /// sorted by frequency; zero coefficients pruned
    pub terms: Vec<(Vec<i64>, Cyclotomic)>,
}

impl ExpoPoly {
    pub fn zero() -> Self {
        ExpoPoly::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_terms(terms: Vec<(Vec<i64>, Cyclotomic)>, order: u32) -> Self {
        let mut map: BTreeMap<Vec<i64>, Cyclotomic> = BTreeMap::new();
        for (f, c) in terms {
            let c = c.lift(num_integer::lcm(c.order, order));
            let entry = map.entry(f).or_insert_with(|| Cyclotomic::zero().lift(order));
            *entry = entry.add(&c);
        }
        ExpoPoly { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn add(&self, other: &Self, order: u32) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(terms, order)
    }

    pub fn neg(&self) -> Self {
        ExpoPoly { terms: self.terms.iter().map(|(f, c)| (f.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, r: &Rat, order: u32) -> Self {
        Self::from_terms(
            self.terms.iter().map(|(f, c)| (f.clone(), c.scale(r))).collect(),
            order,
        )
    }
}

/// Basis key of a graded backend.  The grading is a function of the key (see
/// [`Algebra::degree`]).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Key {
    /// `E_{i,j} ⊗ e_I`: matrix unit times an exterior monomial (bitmask,
    /// ascending order).
    MatForm { i: u8, j: u8, wedge: u32 },
    /// `e^{q(x)} e^{2πi k·x} E_{i,j} ⊗ dx_I` on the d-torus.
    Torus { expo: ExpoPoly, freq: Vec<i64>, i: u8, j: u8, wedge: u32 },
    /// degree-tagged operator matrix unit (operator-word backend).
    Op { deg: u16, i: u16, j: u16 },
    /// `ω·U_g` in a crossed product.
    Crossed { base: Box<Key>, g: GroupElt },
    /// `t^p (dt)^ε ⊗ ω` over the unit interval.
    Interval { tpow: u16, dt: bool, base: Box<Key> },
    Tensor { left: Box<Key>, right: Box<Key> },
    /// component of a two-sided direct sum (side 0 or 1).
    DirectSum { side: u8, base: Box<Key> },
    /// entry of the twisted 2×2 construction; pos encodes (row,col):
    /// 0 = (1,1), 1 = (1,2), 2 = (2,1), 3 = (2,2).
    X { pos: u8, base: Box<Key> },
    /// adjoined multiplier-curvature power θ̃^p (p = 0 is the adjoined unit).
    UnitPow { p: u16 },
    /// generator of the trivial backend C.
    One,
}

/// Sparse element: finite linear combination of keys.
#[derive(Clone, Debug, Default)]
pub struct Elem {
    pub terms: BTreeMap<Key, Scalar>,
}

impl Elem {
    pub fn zero() -> Self {
        Elem::default()
    }

    pub fn single(key: Key, coeff: Scalar) -> Self {
        let mut e = Elem::zero();
        e.insert(key, coeff);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert(&mut self, key: Key, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&coeff);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Elem) -> Elem {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Elem) -> Elem {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Elem {
        Elem { terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, s: &Scalar) -> Elem {
        if s.is_zero() {
            return Elem::zero();
        }
        let mut out = Elem::zero();
        for (k, c) in &self.terms {
            out.insert(k.clone(), c.mul(s));
        }
        out
    }

    /// Map every key (linearly) through `f`.
    pub fn map_keys(&self, mut f: impl FnMut(&Key) -> Vec<(Key, Scalar)>) -> Elem {
        let mut out = Elem::zero();
        for (k, c) in &self.terms {
            for (nk, nc) in f(k) {
                out.insert(nk, nc.mul(c));
            }
        }
        out
    }

    /// Relabel every key, keeping coefficients.
    pub fn wrap_keys(&self, mut f: impl FnMut(&Key) -> Key) -> Elem {
        self.map_keys(|k| vec![(f(k), Scalar::one())])
    }

    /// Component of homogeneous degree `deg` in `alg`.
    pub fn component(&self, alg: &Algebra, deg: i64) -> Elem {
        let mut out = Elem::zero();
        for (k, c) in &self.terms {
            if alg.degree(k) == deg {
                out.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// All degrees present.
    pub fn degrees(&self, alg: &Algebra) -> Vec<i64> {
        let mut ds: Vec<i64> = self.terms.keys().map(|k| alg.degree(k)).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// Largest coefficient distance to `other` in the floating embedding.
    pub fn dist(&self, other: &Elem) -> f64 {
        let mut worst = 0.0f64;
        let keys: std::collections::BTreeSet<&Key> =
            self.terms.keys().chain(other.terms.keys()).collect();
        for k in keys {
            let a = self.terms.get(k).cloned().unwrap_or_else(Scalar::zero);
            let b = other.terms.get(k).cloned().unwrap_or_else(Scalar::zero);
            worst = worst.max(a.dist(&b));
        }
        worst
    }

    pub fn eq_within(&self, other: &Elem, tol: f64) -> bool {
        self.dist(other) <= tol
    }
}

/// Sign of merging two exterior monomials (bitmask), `None` if they collide.
pub fn wedge_mul(a: u32, b: u32) -> Option<(u32, i64)> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    Some((a | b, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Multiplier-curvature data: left and right multiplication operators given
/// as elements of the ambient base backend.
#[derive(Clone, Debug)]
pub struct Multiplier {
    pub left: Elem,
    pub right: Elem,
}

#[derive(Clone, Debug)]
pub enum Algebra {
    /// exterior algebra over C^d with N×N matrix coefficients
    MatForm { n: usize, d: usize },
    /// matrix-valued Fourier/de Rham forms on the d-torus; `phase_order`
    /// pins the cyclotomic order of tracked-exponent coefficients
    Torus { d: usize, n: usize, phase_order: u32 },
    /// operator words on a dim-dimensional space, graded by construction
    Op { dim: usize },
    Crossed { base: Box<Algebra>, action: TorusAction },
    Interval { base: Box<Algebra> },
    Tensor { left: Box<Algebra>, right: Box<Algebra> },
    DirectSum { base: Box<Algebra> },
    /// twisted 2×2 matrices over `base` with middle factor diag(1, θ)
    X { base: Box<Algebra>, theta: Elem },
    Unitized { base: Box<Algebra>, mult: Multiplier },
    Trivial,
}

impl Algebra {
    pub fn degree(&self, key: &Key) -> i64 {
        match (self, key) {
            (Algebra::MatForm { .. }, Key::MatForm { wedge, .. }) => {
                wedge.count_ones() as i64
            }
            (Algebra::Torus { .. }, Key::Torus { wedge, .. }) => wedge.count_ones() as i64,
            (Algebra::Op { .. }, Key::Op { deg, .. }) => *deg as i64,
            (Algebra::Crossed { base, .. }, Key::Crossed { base: k, .. }) => base.degree(k),
            (Algebra::Interval { base }, Key::Interval { dt, base: k, .. }) => {
                base.degree(k) + if *dt { 1 } else { 0 }
            }
            (Algebra::Tensor { left, right }, Key::Tensor { left: kl, right: kr }) => {
                left.degree(kl) + right.degree(kr)
            }
            (Algebra::DirectSum { base }, Key::DirectSum { base: k, .. }) => base.degree(k),
            (Algebra::X { base, .. }, Key::X { pos, base: k }) => {
                base.degree(k) + [0, 1, 1, 2][*pos as usize]
            }
            (Algebra::Unitized { .. }, Key::UnitPow { p }) => 2 * *p as i64,
            (Algebra::Unitized { base, .. }, k) => base.degree(k),
            (Algebra::Trivial, Key::One) => 0,
            _ => panic!("key does not belong to this backend: {key:?}"),
        }
    }

    /// Multiplicative unit, where the backend has one.
    pub fn unit(&self) -> Elem {
        match self {
            Algebra::MatForm { n, .. } => {
                let mut e = Elem::zero();
                for i in 0..*n {
                    e.insert(Key::MatForm { i: i as u8, j: i as u8, wedge: 0 }, Scalar::one());
                }
                e
            }
            Algebra::Torus { d, n, .. } => {
                let mut e = Elem::zero();
                for i in 0..*n {
                    e.insert(
                        Key::Torus {
                            expo: ExpoPoly::zero(),
                            freq: vec![0; *d],
                            i: i as u8,
                            j: i as u8,
                            wedge: 0,
                        },
                        Scalar::one(),
                    );
                }
                e
            }
            Algebra::Op { dim } => {
                let mut e = Elem::zero();
                for i in 0..*dim {
                    e.insert(Key::Op { deg: 0, i: i as u16, j: i as u16 }, Scalar::one());
                }
                e
            }
            Algebra::Crossed { base, action } => base
                .unit()
                .map_keys(|k| vec![(Key::Crossed { base: Box::new(k.clone()), g: action.group.identity() }, Scalar::one())]),
            Algebra::Interval { base } => base.unit().map_keys(|k| {
                vec![(Key::Interval { tpow: 0, dt: false, base: Box::new(k.clone()) }, Scalar::one())]
            }),
            Algebra::Tensor { left, right } => {
                let l = left.unit();
                let r = right.unit();
                let mut e = Elem::zero();
                for (kl, cl) in &l.terms {
                    for (kr, cr) in &r.terms {
                        e.insert(
                            Key::Tensor { left: Box::new(kl.clone()), right: Box::new(kr.clone()) },
                            cl.mul(cr),
                        );
                    }
                }
                e
            }
            Algebra::DirectSum { base } => {
                let u = base.unit();
                let mut e = Elem::zero();
                for side in 0..2u8 {
                    for (k, c) in &u.terms {
                        e.insert(Key::DirectSum { side, base: Box::new(k.clone()) }, c.clone());
                    }
                }
                e
            }
            Algebra::Unitized { .. } => Elem::single(Key::UnitPow { p: 0 }, Scalar::one()),
            Algebra::Trivial => Elem::single(Key::One, Scalar::one()),
            Algebra::X { .. } => panic!("the twisted 2x2 backend has no unit"),
        }
    }

    /// Structure constants: product of two keys.
    pub fn mul_keys(&self, a: &Key, b: &Key) -> Vec<(Key, Scalar)> {
        match self {
            Algebra::MatForm { .. } => {
                let (Key::MatForm { i: i1, j: j1, wedge: w1 }, Key::MatForm { i: i2, j: j2, wedge: w2 }) = (a, b)
                else {
                    panic!("foreign key in matrix-form backend")
                };
                if j1 != i2 {
                    return vec![];
                }
                match wedge_mul(*w1, *w2) {
                    None => vec![],
                    Some((w, s)) => {
                        vec![(Key::MatForm { i: *i1, j: *j2, wedge: w }, Scalar::int(s))]
                    }
                }
            }
            Algebra::Torus { phase_order, .. } => {
                let (
                    Key::Torus { expo: q1, freq: f1, i: i1, j: j1, wedge: w1 },
                    Key::Torus { expo: q2, freq: f2, i: i2, j: j2, wedge: w2 },
                ) = (a, b)
                else {
                    panic!("foreign key in torus backend")
                };
                if j1 != i2 {
                    return vec![];
                }
                match wedge_mul(*w1, *w2) {
                    None => vec![],
                    Some((w, s)) => {
                        let freq: Vec<i64> =
                            f1.iter().zip(f2.iter()).map(|(x, y)| x + y).collect();
                        vec![(
                            Key::Torus {
                                expo: q1.add(q2, *phase_order),
                                freq,
                                i: *i1,
                                j: *j2,
                                wedge: w,
                            },
                            Scalar::int(s),
                        )]
                    }
                }
            }
            Algebra::Op { .. } => {
                let (Key::Op { deg: d1, i: i1, j: j1 }, Key::Op { deg: d2, i: i2, j: j2 }) = (a, b)
                else {
                    panic!("foreign key in operator backend")
                };
                if j1 != i2 {
                    return vec![];
                }
                vec![(Key::Op { deg: d1 + d2, i: *i1, j: *j2 }, Scalar::one())]
            }
            Algebra::Crossed { base, action } => {
                let (Key::Crossed { base: k1, g: g1 }, Key::Crossed { base: k2, g: g2 }) = (a, b)
                else {
                    panic!("foreign key in crossed-product backend")
                };
                let acted = action.apply(base, g1, &Elem::single((**k2).clone(), Scalar::one()));
                let g = action.group.compose(g1, g2);
                let mut out = Vec::new();
                for (k2p, c2) in &acted.terms {
                    for (k, c) in base.mul_keys(k1, k2p) {
                        out.push((
                            Key::Crossed { base: Box::new(k), g: g.clone() },
                            c.mul(c2),
                        ));
                    }
                }
                out
            }
            Algebra::Interval { base } => {
                let (
                    Key::Interval { tpow: p1, dt: e1, base: k1 },
                    Key::Interval { tpow: p2, dt: e2, base: k2 },
                ) = (a, b)
                else {
                    panic!("foreign key in interval backend")
                };
                if *e1 && *e2 {
                    return vec![];
                }
                // Koszul: dt crosses the first base factor
                let sign = if *e2 && base.degree(k1) % 2 != 0 { -1 } else { 1 };
                base.mul_keys(k1, k2)
                    .into_iter()
                    .map(|(k, c)| {
                        (
                            Key::Interval { tpow: p1 + p2, dt: *e1 || *e2, base: Box::new(k) },
                            c.mul(&Scalar::int(sign)),
                        )
                    })
                    .collect()
            }
            Algebra::Tensor { left, right } => {
                let (
                    Key::Tensor { left: l1, right: r1 },
                    Key::Tensor { left: l2, right: r2 },
                ) = (a, b)
                else {
                    panic!("foreign key in tensor backend")
                };
                let sign = if right.degree(r1) % 2 != 0 && left.degree(l2) % 2 != 0 {
                    -1
                } else {
                    1
                };
                let mut out = Vec::new();
                for (kl, cl) in left.mul_keys(l1, l2) {
                    for (kr, cr) in right.mul_keys(r1, r2) {
                        out.push((
                            Key::Tensor { left: Box::new(kl.clone()), right: Box::new(kr) },
                            cl.mul(&cr).mul(&Scalar::int(sign)),
                        ));
                    }
                }
                out
            }
            Algebra::DirectSum { base } => {
                let (
                    Key::DirectSum { side: s1, base: k1 },
                    Key::DirectSum { side: s2, base: k2 },
                ) = (a, b)
                else {
                    panic!("foreign key in direct-sum backend")
                };
                if s1 != s2 {
                    return vec![];
                }
                base.mul_keys(k1, k2)
                    .into_iter()
                    .map(|(k, c)| (Key::DirectSum { side: *s1, base: Box::new(k) }, c))
                    .collect()
            }
            Algebra::X { base, theta } => {
                let (Key::X { pos: p1, base: k1 }, Key::X { pos: p2, base: k2 }) = (a, b) else {
                    panic!("foreign key in twisted 2x2 backend")
                };
                let (r1, c1) = (p1 / 2, p1 % 2);
                let (r2, c2) = (p2 / 2, p2 % 2);
                // (ω · diag(1,θ) · ω')_{r1,c2}: inner indices must meet
                if c1 != r2 {
                    return vec![];
                }
                let pos = r1 * 2 + c2;
                let mid: Elem = if c1 == 0 {
                    Elem::single((**k2).clone(), Scalar::one())
                } else {
                    // insert θ between the factors
                    theta.map_keys(|tk| {
                        base.mul_keys(tk, k2)
                            .into_iter()
                            .collect()
                    })
                };
                let mut out = Vec::new();
                for (km, cm) in &mid.terms {
                    for (k, c) in base.mul_keys(k1, km) {
                        out.push((Key::X { pos, base: Box::new(k) }, c.mul(cm)));
                    }
                }
                out
            }
            Algebra::Unitized { base, mult } => match (a, b) {
                (Key::UnitPow { p: p1 }, Key::UnitPow { p: p2 }) => {
                    vec![(Key::UnitPow { p: p1 + p2 }, Scalar::one())]
                }
                (Key::UnitPow { p }, k) => {
                    let mut acc = Elem::single(k.clone(), Scalar::one());
                    for _ in 0..*p {
                        acc = base_mul(base, &mult.left, &acc);
                    }
                    acc.terms.into_iter().collect()
                }
                (k, Key::UnitPow { p }) => {
                    let mut acc = Elem::single(k.clone(), Scalar::one());
                    for _ in 0..*p {
                        acc = base_mul(base, &acc, &mult.right);
                    }
                    acc.terms.into_iter().collect()
                }
                (k1, k2) => base.mul_keys(k1, k2),
            },
            Algebra::Trivial => vec![(Key::One, Scalar::one())],
        }
    }

    pub fn mul(&self, x: &Elem, y: &Elem) -> Elem {
        let mut out = Elem::zero();
        for (ka, ca) in &x.terms {
            for (kb, cb) in &y.terms {
                for (k, c) in self.mul_keys(ka, kb) {
                    out.insert(k, c.mul(&ca.mul(cb)));
                }
            }
        }
        out
    }

    /// x·y − (−1)^{|x||y|} y·x on homogeneous pieces (graded commutator).
    pub fn graded_commutator(&self, x: &Elem, y: &Elem) -> Elem {
        let mut out = Elem::zero();
        for dx in x.degrees(self) {
            let xc = x.component(self, dx);
            for dy in y.degrees(self) {
                let yc = y.component(self, dy);
                let sign = if dx % 2 != 0 && dy % 2 != 0 { 1 } else { -1 };
                out = out
                    .add(&self.mul(&xc, &yc))
                    .add(&self.mul(&yc, &xc).scale(&Scalar::int(sign)));
            }
        }
        out
    }

    /// Power of an element (for curvature powers etc.).
    pub fn pow(&self, x: &Elem, e: usize) -> Elem {
        let mut acc = self.unit();
        for _ in 0..e {
            acc = self.mul(&acc, x);
        }
        acc
    }
}

/// Multiply within the base of a unitized backend (helper for the adjoined
/// multiplier action).
fn base_mul(base: &Algebra, x: &Elem, y: &Elem) -> Elem {
    base.mul(x, y)
}

/// Convenience: a scalar-coefficient rational as `Rat`.
pub fn rat_of(c: &Scalar) -> Option<Rat> {
    match c {
        Scalar::Exact(e) => {
            if e.terms.is_empty() {
                return Some(Rat::zero());
            }
            if e.terms.len() == 1 {
                if let Some((0, cy)) = e.terms.iter().next().map(|(p, c)| (*p, c)) {
                    return cy.as_rat();
                }
            }
            None
        }
        Scalar::Float(f) => {
            if f.im == 0.0 && f.re.fract() == 0.0 && f.re.abs() < 1e15 {
                Some(Rat::from(num_bigint::BigInt::from(f.re as i64)))
            } else {
                None
            }
        }
    }
}

/// Does this rational equal an integer?
pub fn rat_is_integer(r: &Rat) -> bool {
    r.denom().abs() == num_bigint::BigInt::from(1)
}

/// Embed a matrix as the degree-0 part of the operator-word backend.
pub fn op_elem(mat: &Mat, deg: u16) -> Elem {
    let mut e = Elem::zero();
    for i in 0..mat.rows {
        for j in 0..mat.cols {
            if !mat[(i, j)].is_zero() {
                e.insert(Key::Op { deg, i: i as u16, j: j as u16 }, mat[(i, j)].clone());
            }
        }
    }
    e
}

/// Extract the matrix of a single homogeneous degree from an operator-word
/// element.
pub fn op_component(alg: &Algebra, x: &Elem, deg: u16) -> Mat {
    let Algebra::Op { dim } = alg else { panic!("not an operator backend") };
    let mut m = Mat::zeros(*dim, *dim);
    for (k, c) in &x.terms {
        if let Key::Op { deg: d, i, j } = k {
            if *d == deg {
                m[(*i as usize, *j as usize)] = m[(*i as usize, *j as usize)].add(c);
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matform_elem(alg: &Algebra, entries: &[(u8, u8, u32, i64)]) -> Elem {
        let _ = alg;
        let mut e = Elem::zero();
        for &(i, j, w, c) in entries {
            e.insert(Key::MatForm { i, j, wedge: w }, Scalar::int(c));
        }
        e
    }

    #[test]
    fn wedge_sign_convention() {
        // e_1 ∧ e_0 = -e_0 ∧ e_1 (bits 1 and 0)
        assert_eq!(wedge_mul(0b10, 0b01), Some((0b11, -1)));
        assert_eq!(wedge_mul(0b01, 0b10), Some((0b11, 1)));
        assert_eq!(wedge_mul(0b01, 0b01), None);
    }

    #[test]
    fn matform_associative_anticommutative() {
        let alg = Algebra::MatForm { n: 2, d: 3 };
        let a = matform_elem(&alg, &[(0, 1, 0b001, 2), (1, 1, 0b010, 1)]);
        let b = matform_elem(&alg, &[(1, 0, 0b010, 3), (0, 0, 0b100, -1)]);
        let c = matform_elem(&alg, &[(0, 0, 0b100, 1), (1, 1, 0, 5)]);
        let lhs = alg.mul(&alg.mul(&a, &b), &c);
        let rhs = alg.mul(&a, &alg.mul(&b, &c));
        assert!(lhs.eq_within(&rhs, 0.0));
        // unit acts trivially
        assert!(alg.mul(&alg.unit(), &a).eq_within(&a, 0.0));
        assert!(alg.mul(&a, &alg.unit()).eq_within(&a, 0.0));
    }

    #[test]
    fn torus_product_adds_frequencies() {
        let alg = Algebra::Torus { d: 1, n: 1, phase_order: 4 };
        let z = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![1], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        );
        let z2 = alg.mul(&z, &z);
        let expect = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![2], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        );
        assert!(z2.eq_within(&expect, 0.0));
    }

    #[test]
    fn interval_dt_squares_to_zero() {
        let base = Algebra::Trivial;
        let alg = Algebra::Interval { base: Box::new(base) };
        let dt = Elem::single(
            Key::Interval { tpow: 0, dt: true, base: Box::new(Key::One) },
            Scalar::one(),
        );
        assert!(alg.mul(&dt, &dt).is_zero());
        let t = Elem::single(
            Key::Interval { tpow: 1, dt: false, base: Box::new(Key::One) },
            Scalar::one(),
        );
        let tdt = alg.mul(&t, &dt);
        let dtt = alg.mul(&dt, &t);
        assert!(tdt.eq_within(&dtt, 0.0)); // t is even
    }

    #[test]
    fn graded_commutator_vanishes_on_commuting_evens() {
        let alg = Algebra::MatForm { n: 1, d: 2 };
        let a = matform_elem(&alg, &[(0, 0, 0b11, 2)]);
        let b = matform_elem(&alg, &[(0, 0, 0, 3)]);
        assert!(alg.graded_commutator(&a, &b).is_zero());
    }
}
