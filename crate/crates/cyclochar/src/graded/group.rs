//! Finitely generated abelian groups acting on torus backends by affine
//! transformations, optionally twisted by a bundle action.

use super::{Algebra, Elem, ExpoPoly, Key};
use crate::scalar::{Cyclotomic, Rat, Scalar};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Abelian group given by generator orders (0 = infinite order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub orders: Vec<i64>,
}

pub type GroupElt = Vec<i64>;

impl Group {
    pub fn free(rank: usize) -> Self {
        Group { orders: vec![0; rank] }
    }

    pub fn cyclic(m: i64) -> Self {
        Group { orders: vec![m] }
    }

    pub fn identity(&self) -> GroupElt {
        vec![0; self.orders.len()]
    }

    pub fn normalize(&self, g: &GroupElt) -> GroupElt {
        g.iter()
            .zip(&self.orders)
            .map(|(x, m)| if *m == 0 { *x } else { x.rem_euclid(*m) })
            .collect()
    }

    pub fn compose(&self, a: &GroupElt, b: &GroupElt) -> GroupElt {
        self.normalize(&a.iter().zip(b.iter()).map(|(x, y)| x + y).collect())
    }

    pub fn inverse(&self, a: &GroupElt) -> GroupElt {
        self.normalize(&a.iter().map(|x| -x).collect())
    }

    pub fn is_identity(&self, a: &GroupElt) -> bool {
        self.normalize(a).iter().all(|x| *x == 0)
    }
}

/// Affine self-map of the d-torus, x ↦ M x + b, with M ∈ GL(d, Z).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    pub m: Vec<Vec<i64>>,
    pub b: Vec<Rat>,
}

impl AffineMap {
    pub fn identity(d: usize) -> Self {
        AffineMap {
            m: (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect(),
            b: vec![Rat::zero(); d],
        }
    }

    pub fn translation(b: Vec<Rat>) -> Self {
        let d = b.len();
        AffineMap { b, ..Self::identity(d) }
    }

    pub fn linear(m: Vec<Vec<i64>>) -> Self {
        let d = m.len();
        AffineMap { m, b: vec![Rat::zero(); d] }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// self ∘ other: x ↦ M_s (M_o x + b_o) + b_s.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        let d = self.dim();
        let mut m = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = (0..d).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        let mut b = self.b.clone();
        for i in 0..d {
            for k in 0..d {
                b[i] += Rat::from_integer(self.m[i][k].into()) * other.b[k].clone();
            }
        }
        AffineMap { m, b }
    }

    /// Inverse; panics unless M ∈ GL(d, Z).
    pub fn inverse(&self) -> AffineMap {
        let minv = invert_integer_matrix(&self.m);
        let d = self.dim();
        let mut b = vec![Rat::zero(); d];
        for i in 0..d {
            for k in 0..d {
                b[i] -= Rat::from_integer(minv[i][k].into()) * self.b[k].clone();
            }
        }
        AffineMap { m: minv, b }
    }
}

fn invert_integer_matrix(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let d = m.len();
    // Gauss-Jordan over Q, then require integrality.
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .map(|row| row.iter().map(|&x| Rat::from_integer(x.into())).collect())
        .collect();
    let mut inv: Vec<Vec<Rat>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    for col in 0..d {
        let pivot = (col..d)
            .find(|&r| !a[r][col].is_zero())
            .expect("affine map matrix is singular");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..d {
            a[col][j] /= p.clone();
            inv[col][j] /= p.clone();
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..d {
                    let v = a[r][j].clone() - f.clone() * a[col][j].clone();
                    a[r][j] = v;
                    let w = inv[r][j].clone() - f.clone() * inv[col][j].clone();
                    inv[r][j] = w;
                }
            }
        }
    }
    inv.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    assert!(
                        x.denom().abs() == num_bigint::BigInt::one(),
                        "matrix is not invertible over Z"
                    );
                    x.numer().to_i64().unwrap()
                })
                .collect()
        })
        .collect()
}

/// One group generator acting on a torus backend.
#[derive(Clone, Debug)]
pub struct TorusGen {
    pub map: AffineMap,
    /// optional bundle action: (u, u⁻¹), invertible degree-0 elements
    pub bundle: Option<(Elem, Elem)>,
}

/// Action of an abelian group on a torus backend.
#[derive(Clone, Debug)]
pub struct TorusAction {
    pub group: Group,
    pub gens: Vec<TorusGen>,
}

impl TorusAction {
    /// Smallest cyclotomic order (multiple of 4) accommodating every
    /// translation phase this action can produce.
    pub fn phase_order(&self) -> u32 {
        let mut l: i64 = 4;
        for g in &self.gens {
            for b in &g.map.b {
                l = num_integer::lcm(l, b.denom().abs().to_i64().unwrap_or(1));
            }
        }
        l as u32
    }

    /// The affine map of an arbitrary group element (generators commute by
    /// assumption; applied in generator order).
    pub fn map_for(&self, g: &GroupElt) -> AffineMap {
        let d = self.gens.first().map(|g| g.map.dim()).unwrap_or(0);
        let mut acc = AffineMap::identity(d);
        for (idx, &n) in g.iter().enumerate() {
            let base = if n >= 0 {
                self.gens[idx].map.clone()
            } else {
                self.gens[idx].map.inverse()
            };
            for _ in 0..n.abs() {
                acc = base.compose(&acc);
            }
        }
        acc
    }

    /// Pull back an element by g⁻¹ (function-composition part of the action,
    /// no bundle conjugation).
    pub fn pullback(&self, base: &Algebra, g: &GroupElt, x: &Elem) -> Elem {
        let map = self.map_for(g);
        pullback_by(base, &map, x)
    }

    /// Bundle cocycle u(g) and its inverse (u(gh) = u(g)·(u(h)∘g⁻¹)).
    pub fn bundle_for(&self, base: &Algebra, g: &GroupElt) -> Option<(Elem, Elem)> {
        if self.gens.iter().all(|g| g.bundle.is_none()) {
            return None;
        }
        let unit = base.unit();
        let mut u = unit.clone();
        let mut uinv = unit;
        let mut sofar = self.group.identity();
        for (idx, &n) in g.iter().enumerate() {
            let step: GroupElt = (0..g.len()).map(|j| if j == idx { n.signum() } else { 0 }).collect();
            let (su, sinv) = self.gen_bundle(base, idx, n >= 0);
            for _ in 0..n.abs() {
                let pu = self.pullback(base, &sofar, &su);
                let pinv = self.pullback(base, &sofar, &sinv);
                u = base.mul(&u, &pu);
                uinv = base.mul(&pinv, &uinv);
                sofar = self.group.compose(&sofar, &step);
            }
        }
        Some((u, uinv))
    }

    /// u(±generator) with its inverse.
    fn gen_bundle(&self, base: &Algebra, idx: usize, positive: bool) -> (Elem, Elem) {
        let unit = base.unit();
        let (u, uinv) = self.gens[idx]
            .bundle
            .clone()
            .unwrap_or_else(|| (unit.clone(), unit.clone()));
        if positive {
            (u, uinv)
        } else {
            // u(s⁻¹) = u(s)⁻¹ ∘ s = pullback of u⁻¹ by (s⁻¹)⁻¹
            let inv_elt: GroupElt = (0..self.gens.len())
                .map(|j| if j == idx { -1 } else { 0 })
                .collect();
            (
                self.pullback(base, &inv_elt, &uinv),
                self.pullback(base, &inv_elt, &u),
            )
        }
    }

    /// Full action x ↦ x^g = u(g) · (x ∘ g⁻¹) · u(g)⁻¹.
    pub fn apply(&self, base: &Algebra, g: &GroupElt, x: &Elem) -> Elem {
        if self.group.is_identity(g) {
            return x.clone();
        }
        let pulled = self.pullback(base, g, x);
        match self.bundle_for(base, g) {
            None => pulled,
            Some((u, uinv)) => base.mul(&base.mul(&u, &pulled), &uinv),
        }
    }
}

/// Pull back a torus element by the inverse of the given affine map, i.e.
/// apply f ↦ f∘φ⁻¹ where φ = (M, b).
pub fn pullback_by(base: &Algebra, map: &AffineMap, x: &Elem) -> Elem {
    let Algebra::Torus { d, phase_order, .. } = base else {
        panic!("group actions require a torus backend")
    };
    let inv = map.inverse(); // ψ = φ⁻¹ : x ↦ P x + c
    let p = &inv.m;
    let c = &inv.b;
    x.map_keys(|k| {
        let Key::Torus { expo, freq, i, j, wedge } = k else {
            panic!("foreign key under torus action")
        };
        // e^{2πi k·(Px+c)} = phase(k·c) e^{2πi (Pᵀk)·x}
        let (nf, ph) = pull_freq(p, c, freq);
        let mut nexpo_terms = Vec::new();
        for (f, co) in &expo.terms {
            let (pf, fph) = pull_freq(p, c, f);
            nexpo_terms.push((pf, co.mul(&fph)));
        }
        let nexpo = ExpoPoly::from_terms(nexpo_terms, *phase_order);
        // wedge pullback: dx_j ↦ Σ_l P_{j l} dx_l
        let mut wedges: Vec<(u32, i64)> = vec![(0, 1)];
        let mut bits = *wedge;
        while bits != 0 {
            let jbit = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let mut next = Vec::new();
            for (w, s) in &wedges {
                for l in 0..*d {
                    let coef = p[jbit][l];
                    if coef == 0 {
                        continue;
                    }
                    if let Some((nw, sg)) = super::wedge_mul(*w, 1 << l) {
                        next.push((nw, s * sg * coef));
                    }
                }
            }
            wedges = next;
        }
        let phase = Scalar::Exact(crate::scalar::ExactValue::from_cyclo(ph));
        wedges
            .into_iter()
            .map(|(w, s)| {
                (
                    Key::Torus { expo: nexpo.clone(), freq: nf.clone(), i: *i, j: *j, wedge: w },
                    phase.mul(&Scalar::int(s)),
                )
            })
            .collect()
    })
}

/// (Pᵀk, e^{2πi k·c}).
fn pull_freq(p: &[Vec<i64>], c: &[Rat], k: &[i64]) -> (Vec<i64>, Cyclotomic) {
    let d = c.len();
    let nf: Vec<i64> = (0..d).map(|l| (0..d).map(|j| p[j][l] * k[j]).sum()).collect();
    let mut dot = Rat::zero();
    for (kj, cj) in k.iter().zip(c.iter()) {
        dot += Rat::from_integer((*kj).into()) * cj.clone();
    }
    let phase = if dot.is_zero() {
        Cyclotomic::one()
    } else {
        let num = dot.numer().to_i64().expect("phase numerator too large");
        let den = dot.denom().to_i64().expect("phase denominator too large");
        Cyclotomic::root_of_unity(num, den)
    };
    (nf, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn circle() -> Algebra {
        Algebra::Torus { d: 1, n: 1, phase_order: 12 }
    }

    fn mode(k: i64) -> Elem {
        Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![k], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        )
    }

    #[test]
    fn rotation_phases() {
        // rotation by 1/3: (e^{2πix})^g = e^{2πi(x - 1/3)}... action is f∘g⁻¹
        let action = TorusAction {
            group: Group::free(1),
            gens: vec![TorusGen {
                map: AffineMap::translation(vec![rat(1, 3)]),
                bundle: None,
            }],
        };
        let alg = circle();
        let acted = action.apply(&alg, &vec![1], &mode(1));
        // f(x) = e^{2πix}; f(g⁻¹x) = e^{2πi(x-1/3)} = e^{-2πi/3} e^{2πix}
        let want = mode(1).scale(&Scalar::root_of_unity(-1, 3));
        assert!(acted.eq_within(&want, 0.0));
        // action is a homomorphism: g² then g⁻¹ composes to g
        let twice = action.apply(&alg, &vec![2], &mode(1));
        let back = action.apply(&alg, &vec![-1], &twice);
        assert!(back.eq_within(&acted, 0.0));
    }

    #[test]
    fn gl2_action_on_two_torus() {
        let alg = Algebra::Torus { d: 2, n: 1, phase_order: 4 };
        let action = TorusAction {
            group: Group::free(1),
            gens: vec![TorusGen {
                map: AffineMap::linear(vec![vec![1, 1], vec![0, 1]]),
                bundle: None,
            }],
        };
        let f = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![1, 0], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        );
        let acted = action.apply(&alg, &vec![1], &f);
        // ψ = φ⁻¹ has P = [[1,-1],[0,1]]; Pᵀ k for k = (1,0) is (1,-1)
        let want = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![1, -1], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        );
        assert!(acted.eq_within(&want, 0.0));
        // product compatibility: (fh)^g = f^g h^g
        let h = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![0, 1], i: 0, j: 0, wedge: 0b10 },
            Scalar::one(),
        );
        let lhs = action.apply(&alg, &vec![1], &alg.mul(&f, &h));
        let rhs = alg.mul(&acted, &action.apply(&alg, &vec![1], &h));
        assert!(lhs.eq_within(&rhs, 0.0));
    }
}
