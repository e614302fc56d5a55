//! Scalar kernels.
//!
//! Two interchangeable kernels back every computation in this crate:
//!
//! * the **exact kernel**: elements of `Q(ζ_L)[T, T⁻¹]`, where `ζ_L` is a
//!   primitive `L`-th root of unity (with `4 | L`, so `i = ζ_L^{L/4}` is
//!   always available) and `T` stands for the transcendental `2πi`.  Torus
//!   integration produces `2πi` factors and rational rotations produce root
//!   of-unity phases; keeping both symbolic lets every algebraic identity be
//!   checked with literal equality.
//! * the **floating kernel**: `Complex<f64>`, used where eigenvalue
//!   computations force numerics (operator-theoretic modules, spectral flow).
//!
//! Mixed arithmetic demotes to floating.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// n! as an exact rational.
pub fn factorial(n: usize) -> Rat {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    Rat::from(acc)
}

fn euler_phi(n: u32) -> usize {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

/// Coefficients (constant term first) of the cyclotomic polynomial Φ_n,
/// computed by dividing x^n − 1 by Φ_d for every proper divisor d.
fn cyclotomic_poly(n: u32) -> Vec<Rat> {
    thread_local! {
        static CACHE: RefCell<HashMap<u32, Vec<Rat>>> = RefCell::new(HashMap::new());
    }
    if let Some(hit) = CACHE.with(|c| c.borrow().get(&n).cloned()) {
        return hit;
    }
    let result = if n == 1 {
        vec![rat_int(-1), rat_int(1)]
    } else {
        // x^n - 1
        let mut num = vec![Rat::zero(); n as usize + 1];
        num[0] = rat_int(-1);
        num[n as usize] = rat_int(1);
        for d in 1..n {
            if n % d == 0 {
                num = poly_div_exact(&num, &cyclotomic_poly(d));
            }
        }
        num
    };
    CACHE.with(|c| c.borrow_mut().insert(n, result.clone()));
    result
}

/// Exact division of polynomials with no remainder (panics on remainder).
fn poly_div_exact(num: &[Rat], den: &[Rat]) -> Vec<Rat> {
    let mut rem: Vec<Rat> = num.to_vec();
    let dd = den.len() - 1;
    assert!(rem.len() > dd);
    let mut quot = vec![Rat::zero(); rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd].clone() / den[dd].clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                let v = rem[k + j].clone() - c.clone() * dj.clone();
                rem[k + j] = v;
            }
        }
        quot[k] = c;
    }
    assert!(rem.iter().all(Rat::is_zero), "non-exact polynomial division");
    quot
}

/// Reduce a polynomial in ζ_order modulo Φ_order, truncating to degree < φ(order).
fn reduce_mod_cyclotomic(mut poly: Vec<Rat>, order: u32) -> Vec<Rat> {
    let phi = euler_phi(order);
    let modp = cyclotomic_poly(order);
    while poly.len() > phi {
        let top = poly.len() - 1;
        let c = poly.pop().unwrap();
        if !c.is_zero() {
            // ζ^top = -(Φ - ζ^{φ}) shifted: subtract c·ζ^{top-φ}·Φ
            let shift = top - phi;
            for (j, m) in modp.iter().enumerate().take(phi) {
                let v = poly[shift + j].clone() - c.clone() * m.clone();
                poly[shift + j] = v;
            }
        }
    }
    poly.resize(phi, Rat::zero());
    poly
}

/// Element of the cyclotomic field Q(ζ_order), `4 | order`, stored as a
/// polynomial of degree < φ(order) in ζ_order = e^{2πi/order}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cyclotomic {
    pub order: u32,
    pub coeffs: Vec<Rat>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Cyclotomic { order: 4, coeffs: vec![Rat::zero(), Rat::zero()] }
    }

    pub fn from_rat(r: Rat) -> Self {
        let mut c = Self::zero();
        c.coeffs[0] = r;
        c
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn i() -> Self {
        Self::root_of_unity(1, 4)
    }

    /// e^{2πi·num/den}.
    pub fn root_of_unity(num: i64, den: i64) -> Self {
        assert!(den != 0);
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = num_integer::gcd(num.rem_euclid(den), den);
        let (num, den) = (num.rem_euclid(den) / g, den / g);
        let order = num_integer::lcm(4, den) as u32;
        let exp = (num * (order as i64 / den)).rem_euclid(order as i64) as usize;
        let mut poly = vec![Rat::zero(); exp + 1];
        poly[exp] = Rat::one();
        Cyclotomic { order, coeffs: reduce_mod_cyclotomic(poly, order) }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    /// Rewrite in Q(ζ_new), where self.order | new.
    pub fn lift(&self, new_order: u32) -> Self {
        if new_order == self.order {
            return self.clone();
        }
        assert_eq!(new_order % self.order, 0);
        let k = (new_order / self.order) as usize;
        let mut poly = vec![Rat::zero(); (self.coeffs.len() - 1) * k + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            poly[j * k] = c.clone();
        }
        Cyclotomic { order: new_order, coeffs: reduce_mod_cyclotomic(poly, new_order) }
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        let l = num_integer::lcm(a.order, b.order);
        (a.lift(l), b.lift(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = Self::common(self, other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y.clone();
        }
        a
    }

    pub fn neg(&self) -> Self {
        let mut a = self.clone();
        for x in a.coeffs.iter_mut() {
            *x = -x.clone();
        }
        a
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::common(self, other);
        let mut conv = vec![Rat::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    conv[i + j] += x.clone() * y.clone();
                }
            }
        }
        Cyclotomic { order: a.order, coeffs: reduce_mod_cyclotomic(conv, a.order) }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        let mut a = self.clone();
        for x in a.coeffs.iter_mut() {
            *x *= r.clone();
        }
        a
    }

    /// Field inverse via the extended Euclidean algorithm in Q[x] against Φ_order.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        // Bezout: find u with u·self ≡ 1 (mod Φ).
        let modp = cyclotomic_poly(self.order);
        let (mut r0, mut r1) = (modp, trim(self.coeffs.clone()));
        let (mut s0, mut s1) = (vec![], vec![Rat::one()]);
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 = gcd (a unit in Q since Φ is irreducible and self ≠ 0)
        assert_eq!(r0.len(), 1, "inverse of a zero divisor");
        let c = r0[0].clone();
        let mut out: Vec<Rat> = s0.iter().map(|x| x.clone() / c.clone()).collect();
        out = reduce_mod_cyclotomic(out, self.order);
        Cyclotomic { order: self.order, coeffs: out }
    }

    pub fn to_c64(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ang = 2.0 * PI * (j as f64) / (self.order as f64);
            let v = c.to_f64().unwrap_or_else(|| {
                c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap()
            });
            acc += Complex64::new(ang.cos(), ang.sin()) * v;
        }
        acc
    }

    /// The rational value, if this element is in fact rational.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.coeffs[1..].iter().all(Rat::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }
}

fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
    while v.last().is_some_and(Rat::is_zero) {
        v.pop();
    }
    v
}

fn poly_divmod(num: &[Rat], den: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let den = trim(den.to_vec());
    let mut rem = trim(num.to_vec());
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return (vec![], rem);
    }
    let mut quot = vec![Rat::zero(); rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dd].clone() / den[dd].clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                let v = rem[k + j].clone() - c.clone() * dj.clone();
                rem[k + j] = v;
            }
        }
        quot[k] = c;
    }
    (trim(quot), trim(rem))
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x.clone() * y.clone();
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x.clone();
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x.clone();
    }
    trim(out)
}

/// Exact value: Laurent polynomial in T = 2πi with cyclotomic coefficients.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ExactValue {
    /// T-power → coefficient; zero coefficients are pruned.
    pub terms: BTreeMap<i32, Cyclotomic>,
}

impl ExactValue {
    pub fn from_cyclo(c: Cyclotomic) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        ExactValue { terms }
    }

    pub fn two_pi_i(power: i32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(power, Cyclotomic::one());
        ExactValue { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, p: i32, c: Cyclotomic) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.insert(*p, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        ExactValue { terms: self.terms.iter().map(|(p, c)| (*p, c.neg())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = ExactValue::default();
        for (p, c) in &self.terms {
            for (q, d) in &other.terms {
                out.insert(p + q, c.mul(d));
            }
        }
        out
    }

    /// Division; the divisor must be a single Laurent term (the only case the
    /// crate needs: rational constants, phases and 2πi powers).
    pub fn div(&self, other: &Self) -> Self {
        assert_eq!(other.terms.len(), 1, "exact division by a multi-term value");
        let (q, d) = other.terms.iter().next().unwrap();
        let dinv = d.inv();
        ExactValue { terms: self.terms.iter().map(|(p, c)| (p - q, c.mul(&dinv))).collect() }
    }

    pub fn to_c64(&self) -> Complex64 {
        let t = Complex64::new(0.0, 2.0 * PI);
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in &self.terms {
            acc += t.powi(*p) * c.to_c64();
        }
        acc
    }
}

/// A scalar in either kernel.  Mixed-kernel arithmetic demotes to floating.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(ExactValue),
    Float(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(ExactValue::default())
    }

    pub fn one() -> Self {
        Scalar::Exact(ExactValue::from_cyclo(Cyclotomic::one()))
    }

    pub fn int(n: i64) -> Self {
        Scalar::from_rat(rat_int(n))
    }

    pub fn from_rat(r: Rat) -> Self {
        Scalar::Exact(ExactValue::from_cyclo(Cyclotomic::from_rat(r)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::from_rat(rat(n, d))
    }

    pub fn i() -> Self {
        Scalar::Exact(ExactValue::from_cyclo(Cyclotomic::i()))
    }

    /// e^{2πi num/den}.
    pub fn root_of_unity(num: i64, den: i64) -> Self {
        Scalar::Exact(ExactValue::from_cyclo(Cyclotomic::root_of_unity(num, den)))
    }

    /// (2πi)^power as an exact symbol.
    pub fn two_pi_i(power: i32) -> Self {
        Scalar::Exact(ExactValue::two_pi_i(power))
    }

    pub fn float(v: Complex64) -> Self {
        Scalar::Float(v)
    }

    pub fn real(v: f64) -> Self {
        Scalar::Float(Complex64::new(v, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(e) => e.is_zero(),
            Scalar::Float(f) => f.re == 0.0 && f.im == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Demote to the floating kernel.
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_c64())
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(e) => e.to_c64(),
            Scalar::Float(f) => *f,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.add(b)),
            _ => Scalar::Float(self.to_c64() + other.to_c64()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(a.neg()),
            Scalar::Float(f) => Scalar::Float(-f),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.mul(b)),
            _ => Scalar::Float(self.to_c64() * other.to_c64()),
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a.div(b)),
            _ => Scalar::Float(self.to_c64() / other.to_c64()),
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Float(f) => Scalar::Float(f.conj()),
            Scalar::Exact(e) => {
                // conjugation: ζ^j → ζ^{-j}, T → -T (T = 2πi is imaginary)
                let mut out = ExactValue::default();
                for (p, c) in &e.terms {
                    let mut conj = Cyclotomic::zero().lift(c.order);
                    for (j, co) in c.coeffs.iter().enumerate() {
                        if co.is_zero() {
                            continue;
                        }
                        let z = Cyclotomic::root_of_unity(-(j as i64), c.order as i64)
                            .scale(co);
                        conj = conj.add(&z);
                    }
                    let sign = if p.rem_euclid(2) == 1 { conj.neg() } else { conj };
                    out.insert(*p, sign);
                }
                Scalar::Exact(out)
            }
        }
    }

    /// |self − other| in the floating embedding.
    pub fn dist(&self, other: &Scalar) -> f64 {
        (self.to_c64() - other.to_c64()).norm()
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Equality witness: exact scalars compare structurally after
    /// normalization (lifted to a common cyclotomic order); anything floating
    /// compares within `tol`.
    pub fn eq_within(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.add(&b.neg()).is_zero(),
            _ => self.dist(other) <= tol,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(e) if e.is_zero() => write!(f, "0"),
            Scalar::Exact(e) => {
                let mut first = true;
                for (p, c) in &e.terms {
                    if !first {
                        write!(f, " + ")?;
                    }
                    first = false;
                    if let Some(r) = c.as_rat() {
                        write!(f, "{}", r)?;
                    } else {
                        write!(f, "(ζ{}:{:?})", c.order,
                            c.coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
                    }
                    if *p != 0 {
                        write!(f, "·(2πi)^{}", p)?;
                    }
                }
                Ok(())
            }
            Scalar::Float(v) => write!(f, "{}", v),
        }
    }
}

/// Pairwise (cascade) summation: a deterministic reduction order that keeps
/// floating-point error growth logarithmic.  Exact scalars sum exactly.
pub fn sum_scalars(mut items: Vec<Scalar>) -> Scalar {
    if items.is_empty() {
        return Scalar::zero();
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len() / 2 + 1);
        let mut it = items.chunks(2);
        for pair in &mut it {
            if pair.len() == 2 {
                next.push(pair[0].add(&pair[1]));
            } else {
                next.push(pair[0].clone());
            }
        }
        items = next;
    }
    items.pop().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_poly_12() {
        // Φ_12 = x^4 - x^2 + 1
        let p = cyclotomic_poly(12);
        let want: Vec<Rat> = [1, 0, -1, 0, 1].iter().map(|&n| rat_int(n)).collect();
        assert_eq!(p, want);
    }

    #[test]
    fn roots_of_unity_multiply() {
        let a = Cyclotomic::root_of_unity(1, 3);
        let b = Cyclotomic::root_of_unity(1, 6);
        let c = a.mul(&b); // e^{2πi/2} = -1
        assert_eq!(c.as_rat(), Some(rat_int(-1)));
        // sum of all cube roots of unity vanishes
        let z = Cyclotomic::root_of_unity(1, 3)
            .add(&Cyclotomic::root_of_unity(2, 3))
            .add(&Cyclotomic::one());
        assert!(z.is_zero());
    }

    #[test]
    fn i_squares_to_minus_one() {
        let i = Cyclotomic::i();
        assert_eq!(i.mul(&i).as_rat(), Some(rat_int(-1)));
    }

    #[test]
    fn cyclotomic_inverse() {
        let a = Cyclotomic::root_of_unity(1, 12).add(&Cyclotomic::from_rat(rat(3, 7)));
        let inv = a.inv();
        assert_eq!(a.mul(&inv).as_rat(), Some(rat_int(1)));
    }

    #[test]
    fn two_pi_i_bookkeeping() {
        let t = Scalar::two_pi_i(1);
        let t2 = t.mul(&t);
        assert!(t2.eq_within(&Scalar::two_pi_i(2), 0.0));
        let back = t2.div(&t);
        assert!(back.eq_within(&t, 0.0));
        let num = t.to_c64();
        assert!((num - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn conj_exact() {
        let z = Scalar::root_of_unity(1, 3).mul(&Scalar::two_pi_i(1));
        let w = z.conj();
        let expect = z.to_c64().conj();
        assert!((w.to_c64() - expect).norm() < 1e-12);
    }

    #[test]
    fn mixed_kernel_demotes() {
        let a = Scalar::ratio(1, 2);
        let b = Scalar::real(0.25);
        assert!(matches!(a.mul(&b), Scalar::Float(_)));
        assert!((a.mul(&b).to_c64().re - 0.125).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_exact() {
        let items: Vec<Scalar> = (1..=100).map(Scalar::int).collect();
        assert!(sum_scalars(items).eq_within(&Scalar::int(5050), 0.0));
    }
}
