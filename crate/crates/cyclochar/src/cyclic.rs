//! Cyclic cochain calculus: the two boundary operators, periodicity shift,
//! multi-degree cochains, and pairings with idempotents and unitaries.

use crate::graded::{Algebra, Elem, Result};
use crate::matrix::Mat;
use crate::scalar::{factorial, rat, Scalar};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::rc::Rc;

/// The operations a cochain needs from its argument algebra, plus a way to
/// draw random test elements.
pub trait ArgAlgebra {
    type El: Clone;
    fn unit(&self) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn scale(&self, a: &Self::El, s: &Scalar) -> Self::El;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::El;
}

/// Full or block-diagonal matrix algebra with float entries.
#[derive(Clone, Debug)]
pub struct MatAlgebra {
    pub dim: usize,
    /// when set to (p, q), samples are block diagonal w.r.t. the splitting
    /// C^p ⊕ C^q (commute with diag(1_p, −1_q))
    pub blocks: Option<(usize, usize)>,
    /// when set to r, the algebra is the corner r×r block of the ambient
    /// matrices: samples live there and the unit is diag(1_r, 0)
    pub corner: Option<usize>,
}

impl MatAlgebra {
    pub fn full(dim: usize) -> Self {
        MatAlgebra { dim, blocks: None, corner: None }
    }

    pub fn graded(p: usize, q: usize) -> Self {
        MatAlgebra { dim: p + q, blocks: Some((p, q)), corner: None }
    }
}

impl ArgAlgebra for MatAlgebra {
    type El = Mat;
    fn unit(&self) -> Mat {
        match self.corner {
            None => Mat::identity(self.dim),
            Some(r) => {
                let mut m = Mat::zeros(self.dim, self.dim);
                for i in 0..r {
                    m[(i, i)] = Scalar::one();
                }
                m
            }
        }
    }
    fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        a.mul(b)
    }
    fn add(&self, a: &Mat, b: &Mat) -> Mat {
        a.add(b)
    }
    fn scale(&self, a: &Mat, s: &Scalar) -> Mat {
        a.scale(s)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Mat {
        let d = self.corner.unwrap_or(self.dim);
        let mut m = Mat::zeros(self.dim, self.dim);
        let entry = |m: &mut Mat, i: usize, j: usize, rng: &mut ChaCha8Rng| {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = Scalar::float(Complex64::new(re, im));
        };
        match self.blocks {
            None => {
                for i in 0..d {
                    for j in 0..d {
                        entry(&mut m, i, j, rng);
                    }
                }
            }
            Some((p, q)) => {
                assert_eq!(p + q, d);
                for i in 0..p {
                    for j in 0..p {
                        entry(&mut m, i, j, rng);
                    }
                }
                for i in 0..q {
                    for j in 0..q {
                        entry(&mut m, p + i, p + j, rng);
                    }
                }
            }
        }
        m
    }
}

/// Degree-zero window of a graded backend, with samples drawn as rational
/// combinations of a supplied pool.
#[derive(Clone, Debug)]
pub struct ElemAlgebra {
    pub alg: Algebra,
    pub pool: Vec<Elem>,
}

impl ArgAlgebra for ElemAlgebra {
    type El = Elem;
    fn unit(&self) -> Elem {
        self.alg.unit()
    }
    fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        self.alg.mul(a, b)
    }
    fn add(&self, a: &Elem, b: &Elem) -> Elem {
        a.add(b)
    }
    fn scale(&self, a: &Elem, s: &Scalar) -> Elem {
        a.scale(s)
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Elem {
        let mut out = Elem::zero();
        for p in &self.pool {
            let num: i64 = rng.gen_range(-3..=3);
            if num != 0 {
                let den: i64 = rng.gen_range(1..=3);
                out = out.add(&p.scale(&Scalar::from_rat(rat(num, den))));
            }
        }
        out
    }
}

/// Arguments with a formally adjoined unit: pairs (c, a) standing for
/// c·1̃ + a. The unit is (1, 0); samples carry a random scalar part.
#[derive(Clone, Debug)]
pub struct UnitizedArgs<A: ArgAlgebra> {
    pub base: A,
}

impl<A: ArgAlgebra> UnitizedArgs<A> {
    pub fn new(base: A) -> Self {
        UnitizedArgs { base }
    }

    fn zero_el(&self) -> A::El {
        self.base.scale(&self.base.unit(), &Scalar::zero())
    }

    /// embed a base element with no unit part
    pub fn embed(&self, a: &A::El) -> (Scalar, A::El) {
        (Scalar::zero(), a.clone())
    }
}

impl<A: ArgAlgebra> ArgAlgebra for UnitizedArgs<A> {
    type El = (Scalar, A::El);
    fn unit(&self) -> Self::El {
        (Scalar::one(), self.zero_el())
    }
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El {
        let cross = self
            .base
            .add(&self.base.scale(&b.1, &a.0), &self.base.scale(&a.1, &b.0));
        (a.0.mul(&b.0), self.base.add(&cross, &self.base.mul(&a.1, &b.1)))
    }
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El {
        (a.0.add(&b.0), self.base.add(&a.1, &b.1))
    }
    fn scale(&self, a: &Self::El, s: &Scalar) -> Self::El {
        (a.0.mul(s), self.base.scale(&a.1, s))
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::El {
        let num: i64 = rng.gen_range(-2..=2);
        let den: i64 = rng.gen_range(1..=3);
        (Scalar::from_rat(rat(num, den)), self.base.sample(rng))
    }
}

type CochainFn<A> = dyn Fn(&A, &[<A as ArgAlgebra>::El]) -> Result<Scalar>;

/// A (k+1)-linear functional, i.e. a k-cochain.
pub struct Cochain<A: ArgAlgebra> {
    pub k: usize,
    f: Rc<CochainFn<A>>,
}

impl<A: ArgAlgebra> Clone for Cochain<A> {
    fn clone(&self) -> Self {
        Cochain { k: self.k, f: Rc::clone(&self.f) }
    }
}

impl<A: ArgAlgebra + 'static> Cochain<A> {
    pub fn new(
        k: usize,
        f: impl Fn(&A, &[A::El]) -> Result<Scalar> + 'static,
    ) -> Self {
        Cochain { k, f: Rc::new(f) }
    }

    pub fn eval(&self, alg: &A, args: &[A::El]) -> Result<Scalar> {
        assert_eq!(args.len(), self.k + 1, "wrong argument count for cochain");
        (self.f)(alg, args)
    }

    /// the simplicial boundary: a0...(a_j a_{j+1})...a_{k+1} with
    /// alternating signs, closed up by the wrap-around term
    pub fn boundary_b(&self) -> Cochain<A> {
        let k = self.k;
        let inner = self.clone();
        Cochain::new(k + 1, move |alg: &A, a: &[A::El]| {
            let mut acc = Scalar::zero();
            for j in 0..=k {
                let mut t: Vec<A::El> = a[..j].to_vec();
                t.push(alg.mul(&a[j], &a[j + 1]));
                t.extend_from_slice(&a[j + 2..]);
                let sign = if j % 2 == 0 { 1 } else { -1 };
                acc = acc.add(&inner.eval(alg, &t)?.mul(&Scalar::int(sign)));
            }
            let mut t = vec![alg.mul(&a[k + 1], &a[0])];
            t.extend_from_slice(&a[1..=k]);
            let sign = if (k + 1) % 2 == 0 { 1 } else { -1 };
            acc = acc.add(&inner.eval(alg, &t)?.mul(&Scalar::int(sign)));
            Ok(acc)
        })
    }

    /// the unit-insertion boundary composed with cyclic symmetrization;
    /// lowers the degree by one
    pub fn boundary_cap(&self) -> Cochain<A> {
        let k = self.k;
        assert!(k >= 1, "degree-lowering boundary needs a positive degree");
        let inner = self.clone();
        Cochain::new(k - 1, move |alg: &A, a: &[A::El]| {
            let one = alg.unit();
            let mut acc = Scalar::zero();
            for j in 0..k {
                let mut cyc: Vec<A::El> = a[j..].to_vec();
                cyc.extend_from_slice(&a[..j]);
                let rot_sign = if ((k - 1) * j) % 2 == 0 { 1 } else { -1 };
                let mut front = vec![one.clone()];
                front.extend_from_slice(&cyc);
                let mut back = cyc.clone();
                back.push(one.clone());
                let end_sign = if k % 2 == 0 { 1 } else { -1 };
                let v = inner
                    .eval(alg, &front)?
                    .sub(&inner.eval(alg, &back)?.mul(&Scalar::int(end_sign)));
                acc = acc.add(&v.mul(&Scalar::int(rot_sign)));
            }
            Ok(acc)
        })
    }

    pub fn scale(&self, s: &Scalar) -> Cochain<A> {
        let inner = self.clone();
        let s = s.clone();
        Cochain::new(self.k, move |alg, a| Ok(inner.eval(alg, a)?.mul(&s)))
    }

    pub fn add(&self, other: &Cochain<A>) -> Cochain<A> {
        assert_eq!(self.k, other.k);
        let x = self.clone();
        let y = other.clone();
        Cochain::new(self.k, move |alg, a| Ok(x.eval(alg, a)?.add(&y.eval(alg, a)?)))
    }
}

/// A finite family of cochains of a common parity, indexed by degree.
pub struct MultiCochain<A: ArgAlgebra> {
    pub components: BTreeMap<usize, Cochain<A>>,
}

impl<A: ArgAlgebra> Clone for MultiCochain<A> {
    fn clone(&self) -> Self {
        MultiCochain { components: self.components.clone() }
    }
}

impl<A: ArgAlgebra + 'static> MultiCochain<A> {
    pub fn new(components: Vec<Cochain<A>>) -> Self {
        let mut map = BTreeMap::new();
        for c in components {
            let prev = map.insert(c.k, c);
            assert!(prev.is_none(), "duplicate cochain degree");
        }
        MultiCochain { components: map }
    }

    pub fn get(&self, k: usize) -> Option<&Cochain<A>> {
        self.components.get(&k)
    }

    /// total boundary component in degree k: boundary_b of the component
    /// below plus boundary_cap of the component above
    pub fn total_boundary_at(&self, alg: &A, k: usize, args: &[A::El]) -> Result<Scalar> {
        assert_eq!(args.len(), k + 1);
        let mut acc = Scalar::zero();
        if k >= 1 {
            if let Some(c) = self.components.get(&(k - 1)) {
                acc = acc.add(&c.boundary_b().eval(alg, args)?);
            }
        }
        if let Some(c) = self.components.get(&(k + 1)) {
            acc = acc.add(&c.boundary_cap().eval(alg, args)?);
        }
        Ok(acc)
    }

    /// degrees at which the total boundary can be nonzero
    pub fn boundary_degrees(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &k in self.components.keys() {
            out.push(k + 1);
            if k >= 1 {
                out.push(k - 1);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// worst |(total boundary)(random args)| over the given trial count
    pub fn cocycle_residual(&self, alg: &A, rng: &mut ChaCha8Rng, trials: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            for k in self.boundary_degrees() {
                let args: Vec<A::El> = (0..=k).map(|_| alg.sample(rng)).collect();
                let v = self.total_boundary_at(alg, k, &args)?;
                worst = worst.max(v.to_c64().norm());
            }
        }
        Ok(worst)
    }

    /// worst value over random argument tuples with one slot (index ≥ 1)
    /// replaced by the unit; zero for a reduced cochain family
    pub fn reduced_residual(&self, alg: &A, rng: &mut ChaCha8Rng, trials: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for _ in 0..trials {
            for (&k, c) in &self.components {
                if k == 0 {
                    continue;
                }
                for slot in 1..=k {
                    let mut args: Vec<A::El> = (0..=k).map(|_| alg.sample(rng)).collect();
                    args[slot] = alg.unit();
                    worst = worst.max(c.eval(alg, &args)?.to_c64().norm());
                }
            }
        }
        Ok(worst)
    }
}

/// A K-theory datum to pair a multi-degree cochain against.
pub enum KClass<A: ArgAlgebra> {
    Idempotent(A::El),
    Unitary { u: A::El, uinv: A::El },
}

/// Even pairing: Φ⁰(e) + Σ_{k≥1} (−1)^k (2k)!/k! · Φ^{2k}(e − ½, e, …, e).
pub fn pair_idempotent<A: ArgAlgebra + 'static>(
    alg: &A,
    phi: &MultiCochain<A>,
    e: &A::El,
) -> Result<Scalar> {
    let mut acc = Scalar::zero();
    let half = alg.add(e, &alg.scale(&alg.unit(), &Scalar::from_rat(rat(-1, 2))));
    for (&deg, c) in &phi.components {
        if deg % 2 != 0 {
            continue;
        }
        if deg == 0 {
            acc = acc.add(&c.eval(alg, std::slice::from_ref(e))?);
            continue;
        }
        let k = deg / 2;
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let coef = Scalar::int(sign)
            .mul(&Scalar::from_rat(factorial(deg) / factorial(k)));
        let mut args = vec![half.clone()];
        args.extend(std::iter::repeat(e.clone()).take(deg));
        acc = acc.add(&c.eval(alg, &args)?.mul(&coef));
    }
    Ok(acc)
}

/// Pairing of a single-component cyclic cocycle of even degree 2m with an
/// idempotent: (−1)^m (2m)!/m! · φ(e, …, e). The slot-0 correction of the
/// mixed-degree formula is redundant here (it vanishes on the class), and
/// unlike that formula this one is valid for non-normalized cocycles.
pub fn pair_idempotent_cyclic<A: ArgAlgebra + 'static>(
    alg: &A,
    phi: &Cochain<A>,
    e: &A::El,
) -> Result<Scalar> {
    assert!(phi.k % 2 == 0, "even pairing needs an even degree");
    let m = phi.k / 2;
    let sign = if m % 2 == 0 { 1 } else { -1 };
    let coef = Scalar::int(sign).mul(&Scalar::from_rat(factorial(phi.k) / factorial(m)));
    let args = vec![e.clone(); phi.k + 1];
    Ok(phi.eval(alg, &args)?.mul(&coef))
}

/// Odd pairing: Σ_l λ_l (Φ^{2l−1}(u, u⁻¹, …) − Φ^{2l−1}(u⁻¹, u, …)) with
/// λ_l = −(−1)^l (l−1)! · e^{−iπ/4} / (2√(2π)).
pub fn pair_unitary<A: ArgAlgebra + 'static>(
    alg: &A,
    phi: &MultiCochain<A>,
    u: &A::El,
    uinv: &A::El,
) -> Result<Scalar> {
    let lam0 = Complex64::from_polar(1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt()),
        -std::f64::consts::FRAC_PI_4);
    let mut acc = Scalar::zero();
    for (&deg, c) in &phi.components {
        if deg % 2 != 1 {
            continue;
        }
        let l = (deg + 1) / 2;
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        let mut fact = 1.0f64;
        for j in 1..l {
            fact *= j as f64;
        }
        let lam = Scalar::float(lam0 * (-1.0) * sign * fact);
        let args1: Vec<A::El> = (0..=deg)
            .map(|i| if i % 2 == 0 { u.clone() } else { uinv.clone() })
            .collect();
        let args2: Vec<A::El> = (0..=deg)
            .map(|i| if i % 2 == 0 { uinv.clone() } else { u.clone() })
            .collect();
        let v = c.eval(alg, &args1)?.sub(&c.eval(alg, &args2)?);
        acc = acc.add(&v.mul(&lam));
    }
    Ok(acc)
}

pub fn pair<A: ArgAlgebra + 'static>(
    alg: &A,
    phi: &MultiCochain<A>,
    class: &KClass<A>,
) -> Result<Scalar> {
    match class {
        KClass::Idempotent(e) => pair_idempotent(alg, phi, e),
        KClass::Unitary { u, uinv } => pair_unitary(alg, phi, u, uinv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn trace_word_cochain(k: usize, ms: Vec<Mat>) -> Cochain<MatAlgebra> {
        // φ(a0,…,ak) = Tr(a0 M1 a1 M2 … Mk ak)
        Cochain::new(k, move |_alg: &MatAlgebra, a: &[Mat]| {
            let mut acc = a[0].clone();
            for (j, m) in ms.iter().enumerate() {
                acc = acc.mul(m).mul(&a[j + 1]);
            }
            Ok(acc.trace())
        })
    }

    fn rand_cochain(rng: &mut ChaCha8Rng, alg: &MatAlgebra, k: usize) -> Cochain<MatAlgebra> {
        let ms: Vec<Mat> = (0..k).map(|_| alg.sample(rng)).collect();
        trace_word_cochain(k, ms)
    }

    #[test]
    fn boundary_identities() {
        let alg = MatAlgebra::full(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..4usize {
            let phi = rand_cochain(&mut rng, &alg, k);
            let bb = phi.boundary_b().boundary_b();
            let cc = phi.boundary_cap();
            let anti = phi
                .boundary_b()
                .boundary_cap()
                .add(&phi.boundary_cap().boundary_b());
            for _ in 0..3 {
                let a: Vec<Mat> = (0..bb.k + 1).map(|_| alg.sample(&mut rng)).collect();
                assert!(bb.eval(&alg, &a).unwrap().to_c64().norm() < 1e-10);
                let a: Vec<Mat> = (0..anti.k + 1).map(|_| alg.sample(&mut rng)).collect();
                assert!(anti.eval(&alg, &a).unwrap().to_c64().norm() < 1e-10);
                if cc.k >= 1 {
                    let ccc = cc.boundary_cap();
                    let a: Vec<Mat> = (0..ccc.k + 1).map(|_| alg.sample(&mut rng)).collect();
                    assert!(ccc.eval(&alg, &a).unwrap().to_c64().norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn trace_is_a_cocycle() {
        // φ⁰ = Tr is a cocycle: bTr(a0,a1) = Tr(a0a1) − Tr(a1a0) = 0
        let alg = MatAlgebra::full(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tr = Cochain::<MatAlgebra>::new(0, |_a, x| Ok(x[0].trace()));
        let phi = MultiCochain::new(vec![tr]);
        let r = phi.cocycle_residual(&alg, &mut rng, 5).unwrap();
        assert!(r < 1e-12, "residual {r}");
    }

    #[test]
    fn idempotent_pairs_with_trace_as_rank() {
        let alg = MatAlgebra::full(4);
        let tr = Cochain::<MatAlgebra>::new(0, |_a, x| Ok(x[0].trace()));
        let phi = MultiCochain::new(vec![tr]);
        let mut e = Mat::zeros(4, 4);
        e[(0, 0)] = Scalar::one();
        e[(2, 2)] = Scalar::one();
        let v = pair_idempotent(&alg, &phi, &e).unwrap();
        assert!(v.eq_within(&Scalar::int(2), 0.0));
    }
}
