//! Graded chains with connection and curvature, their characters in both
//! factorial and exponential form, and the constructions that produce new
//! chains from old: interval variation, twisted 2×2 extension, unitization.

use crate::cyclic::{ArgAlgebra, Cochain, MultiCochain};
use crate::graded::derivation::{x_gen, Derivation};
use crate::graded::trace::Trace;
use crate::graded::{Algebra, Elem, Key, Multiplier, Result};
use crate::scalar::{factorial, rat, rat_int, Rat, Scalar};
use std::rc::Rc;

/// All compositions of `total` into `parts` non-negative summands.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for rest in compositions(total - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// ∫ over the standard simplex of t₀^{i₀}⋯t_k^{i_k}, closed form.
pub fn simplex_monomial_integral(pows: &[usize]) -> Rat {
    let k = pows.len() - 1;
    let total: usize = pows.iter().sum();
    let mut num = rat_int(1);
    for &p in pows {
        num *= factorial(p);
    }
    num / factorial(total + k)
}

/// The same integral by iterated one-dimensional beta integrals; an
/// independent derivation used to cross-check the closed form.
pub fn simplex_monomial_integral_beta(pows: &[usize]) -> Rat {
    let k = pows.len() - 1;
    if k == 0 {
        return rat_int(1);
    }
    let a = pows[k];
    let b: usize = pows[..k].iter().sum::<usize>() + k - 1;
    let beta = factorial(a) * factorial(b) / factorial(a + b + 1);
    beta * simplex_monomial_integral_beta(&pows[..k])
}

/// A chain of dimension `n`: a graded backend with a connection whose
/// curvature is `theta`, a trace, and a representation of the argument
/// algebra in degree zero.
pub struct Chain<A: ArgAlgebra> {
    pub alg: Algebra,
    pub arg: A,
    pub rho: Rc<dyn Fn(&Algebra, &A::El) -> Elem>,
    pub nabla: Derivation,
    pub theta: Elem,
    pub n: usize,
    pub trace: Trace,
}

impl<A: ArgAlgebra> Clone for Chain<A>
where
    A: Clone,
{
    fn clone(&self) -> Self {
        Chain {
            alg: self.alg.clone(),
            arg: self.arg.clone(),
            rho: Rc::clone(&self.rho),
            nabla: self.nabla.clone(),
            theta: self.theta.clone(),
            n: self.n,
            trace: self.trace.clone(),
        }
    }
}

impl<A: ArgAlgebra + Clone + 'static> Chain<A> {
    /// θ^p for p = 1..=up_to at indices 1..; index 0 is an unused
    /// placeholder so that power 0 can be skipped (not every backend has a
    /// unit to represent θ⁰ with)
    fn theta_powers(&self, up_to: usize) -> Vec<Elem> {
        let mut out = vec![Elem::zero()];
        if up_to >= 1 {
            out.push(self.theta.clone());
            for _ in 1..up_to {
                out.push(self.alg.mul(out.last().unwrap(), &self.theta));
            }
        }
        out
    }

    /// τ(ρ(a₀)θ^{i₀}∇ρ(a₁)θ^{i₁}⋯∇ρ(a_k)θ^{i_k})
    fn word_trace(&self, args: &[A::El], pows: &[usize], thp: &[Elem]) -> Result<Scalar> {
        let mut x = (self.rho)(&self.alg, &args[0]);
        if pows[0] > 0 {
            x = self.alg.mul(&x, &thp[pows[0]]);
        }
        for j in 1..args.len() {
            let d = self.nabla.apply(&self.alg, &(self.rho)(&self.alg, &args[j]));
            x = self.alg.mul(&x, &d);
            if pows[j] > 0 {
                x = self.alg.mul(&x, &thp[pows[j]]);
            }
        }
        self.trace.eval(&self.alg, &x)
    }

    /// Character components in degrees n, n−2, …: the factorial form
    /// Ch^k = (−1)^{(n−k)/2}/((n+k)/2)! Σ_{|i|=(n−k)/2} τ(ρ(a₀)θ^{i₀}∇ρ(a₁)⋯).
    pub fn character(&self) -> MultiCochain<A> {
        let mut comps = Vec::new();
        let n = self.n;
        let mut k = n % 2;
        while k <= n {
            let me = self.clone();
            let w = (n - k) / 2;
            let sign = if w % 2 == 0 { 1 } else { -1 };
            let coef = Scalar::from_rat(rat(sign, 1) / factorial((n + k) / 2));
            comps.push(Cochain::new(k, move |_arg: &A, a: &[A::El]| {
                let thp = me.theta_powers(w);
                let mut acc = Scalar::zero();
                for pows in compositions(w, k + 1) {
                    acc = acc.add(&me.word_trace(a, &pows, &thp)?);
                }
                Ok(acc.mul(&coef))
            }));
            k += 2;
        }
        MultiCochain::new(comps)
    }

    /// Exponential form of the character: each θ-slot carries a rescaled
    /// exponential e^{α t_j θ} integrated over the simplex, with overall
    /// weight (−1)^{(n−k)/2} α^{(k−n)/2}. Agrees with `character` because
    /// the trace selects total degree n.
    pub fn character_exponential(&self, alpha: &Rat) -> MultiCochain<A> {
        let mut comps = Vec::new();
        let n = self.n;
        let mut k = n % 2;
        while k <= n {
            let me = self.clone();
            let w = (n - k) / 2;
            let sign = if w % 2 == 0 { 1 } else { -1 };
            let mut apow = rat_int(1);
            for _ in 0..w {
                apow /= alpha.clone();
            }
            let pref = Scalar::from_rat(rat_int(sign) * apow);
            let alpha = alpha.clone();
            let max_each = n / 2;
            comps.push(Cochain::new(k, move |_arg: &A, a: &[A::El]| {
                let thp = me.theta_powers(max_each * (k + 1));
                let mut acc = Scalar::zero();
                // truncated exponentials in every slot; overshooting terms
                // are killed by the trace
                for total in 0..=max_each * (k + 1) {
                    for pows in compositions(total, k + 1) {
                        let mut c = simplex_monomial_integral_beta(&pows);
                        for &p in &pows {
                            c /= factorial(p);
                        }
                        let mut ap = rat_int(1);
                        for _ in 0..total {
                            ap *= alpha.clone();
                        }
                        let v = me.word_trace(a, &pows, &thp)?;
                        acc = acc.add(&v.mul(&Scalar::from_rat(c * ap)));
                    }
                }
                Ok(acc.mul(&pref))
            }));
            k += 2;
        }
        MultiCochain::new(comps)
    }

    /// Structural checks: ∇² = ad θ, ∇θ = 0, and τ∘∇ = 0, evaluated on
    /// random words; returns the worst residual.
    pub fn verify_structure(&self, rng: &mut rand_chacha::ChaCha8Rng, trials: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        let thp = self.theta_powers(self.n / 2 + 1);
        for _ in 0..trials {
            let a = self.arg.sample(rng);
            let b = self.arg.sample(rng);
            let x = self
                .alg
                .mul(&(self.rho)(&self.alg, &a), &self.nabla.apply(&self.alg, &(self.rho)(&self.alg, &b)));
            // curvature identity on a degree-one word
            let dd = self.nabla.apply(&self.alg, &self.nabla.apply(&self.alg, &x));
            let adth = self
                .alg
                .mul(&self.theta, &x)
                .sub(&self.alg.mul(&x, &self.theta));
            worst = worst.max(dd.dist(&adth));
            // flatness of the curvature
            worst = worst.max(self.nabla.apply(&self.alg, &self.theta).dist(&Elem::zero()));
            // the trace kills exact words of top degree
            if self.n >= 1 {
                let w = (self.n - 1) / 2;
                let par = (self.n - 1) % 2;
                let mut y = (self.rho)(&self.alg, &a);
                if w > 0 {
                    y = self.alg.mul(&y, &thp[w]);
                }
                if par == 1 {
                    y = self
                        .alg
                        .mul(&y, &self.nabla.apply(&self.alg, &(self.rho)(&self.alg, &b)));
                }
                let v = self.trace.eval(&self.alg, &self.nabla.apply(&self.alg, &y))?;
                worst = worst.max(v.to_c64().norm());
            }
        }
        Ok(worst)
    }
}

/// A chain together with its boundary: the bulk has dimension n+1 and its
/// trace fails to be closed exactly by the boundary trace.
pub struct ChainWithBoundary<A: ArgAlgebra> {
    pub bulk: Chain<A>,
    pub boundary: Chain<A>,
}

/// Deform a chain's connection along ∇_t = ∇ + t·ad(η) over the unit
/// interval. The bulk curvature is θ + t∇η + t²η² + dt·η; the boundary is
/// the t=1 chain minus the t=0 chain.
pub fn connection_variation_chain<A: ArgAlgebra + Clone + 'static>(
    base: &Chain<A>,
    eta: &Elem,
) -> ChainWithBoundary<A> {
    let balg = base.alg.clone();
    let bulk_alg = Algebra::Interval { base: Box::new(balg.clone()) };
    let lift = |tpow: u16, dt: bool, x: &Elem| -> Elem {
        x.wrap_keys(|k| Key::Interval { tpow, dt, base: Box::new(k.clone()) })
    };
    let nabla_eta = base.nabla.apply(&balg, eta);
    let eta2 = balg.mul(eta, eta);
    let bulk_theta = lift(0, false, &base.theta)
        .add(&lift(1, false, &nabla_eta))
        .add(&lift(2, false, &eta2))
        .add(&lift(0, true, eta));
    let rho0 = Rc::clone(&base.rho);
    let bulk_rho: Rc<dyn Fn(&Algebra, &A::El) -> Elem> = Rc::new(move |alg, a| {
        let Algebra::Interval { base } = alg else { unreachable!() };
        let inner = (rho0)(base, a);
        inner.wrap_keys(|k| Key::Interval { tpow: 0, dt: false, base: Box::new(k.clone()) })
    });
    let bulk = Chain {
        alg: bulk_alg,
        arg: base.arg.clone(),
        rho: bulk_rho,
        nabla: Derivation::Interval {
            parts: vec![(0, base.nabla.clone()), (1, Derivation::Ad(eta.clone()))],
        },
        theta: bulk_theta,
        n: base.n + 1,
        trace: Trace::Interval { n: base.n, base: Box::new(base.trace.clone()) },
    };

    // boundary: side 0 carries t = 1, side 1 carries t = 0, with the
    // second trace negated
    let side = |s: u8, x: &Elem| -> Elem {
        x.wrap_keys(|k| Key::DirectSum { side: s, base: Box::new(k.clone()) })
    };
    let theta1 = base.theta.add(&nabla_eta).add(&eta2);
    let b_alg = Algebra::DirectSum { base: Box::new(balg.clone()) };
    let rho0 = Rc::clone(&base.rho);
    let b_rho: Rc<dyn Fn(&Algebra, &A::El) -> Elem> = Rc::new(move |alg, a| {
        let Algebra::DirectSum { base } = alg else { unreachable!() };
        let inner = (rho0)(base, a);
        let mut out = Elem::zero();
        for (k, c) in &inner.terms {
            out.insert(Key::DirectSum { side: 0, base: Box::new(k.clone()) }, c.clone());
            out.insert(Key::DirectSum { side: 1, base: Box::new(k.clone()) }, c.clone());
        }
        out
    });
    let nabla1 = Derivation::Sum(vec![base.nabla.clone(), Derivation::Ad(eta.clone())]);
    let boundary = Chain {
        alg: b_alg,
        arg: base.arg.clone(),
        rho: b_rho,
        nabla: Derivation::DirectSum(Box::new(nabla1), Box::new(base.nabla.clone())),
        theta: side(0, &theta1).add(&side(1, &base.theta)),
        n: base.n,
        trace: Trace::DirectSum {
            first: Box::new(base.trace.clone()),
            second: Box::new(base.trace.clone()),
            second_sign: -1,
        },
    };
    ChainWithBoundary { bulk, boundary }
}

impl<A: ArgAlgebra + Clone + 'static> ChainWithBoundary<A> {
    /// Worst residual of (b + B)Ch(bulk) = Ch(boundary) over random
    /// argument tuples.
    pub fn boundary_identity_residual(
        &self,
        rng: &mut rand_chacha::ChaCha8Rng,
        trials: usize,
    ) -> Result<f64> {
        let bulk_ch = self.bulk.character();
        let bd_ch = self.boundary.character();
        let mut worst = 0.0f64;
        for _ in 0..trials {
            for k in bulk_ch.boundary_degrees() {
                let args: Vec<A::El> = (0..=k).map(|_| self.bulk.arg.sample(rng)).collect();
                let lhs = bulk_ch.total_boundary_at(&self.bulk.arg, k, &args)?;
                let rhs = match bd_ch.get(k) {
                    Some(c) => c.eval(&self.boundary.arg, &args)?,
                    None => Scalar::zero(),
                };
                worst = worst.max(lhs.sub(&rhs).to_c64().norm());
            }
        }
        Ok(worst)
    }
}

/// Embed a chain into 2×2 matrices twisted by its own curvature, at the
/// parameter value t of the interpolating connection family. At t = 1 the
/// family is flat.
pub fn twisted_square_chain<A: ArgAlgebra + Clone + 'static>(
    base: &Chain<A>,
    t: &Scalar,
) -> Chain<A> {
    let alg = Algebra::X { base: Box::new(base.alg.clone()), theta: base.theta.clone() };
    let rho0 = Rc::clone(&base.rho);
    let rho: Rc<dyn Fn(&Algebra, &A::El) -> Elem> = Rc::new(move |alg, a| {
        let Algebra::X { base, .. } = alg else { unreachable!() };
        (rho0)(base, a).wrap_keys(|k| Key::X { pos: 0, base: Box::new(k.clone()) })
    });
    // curvature of ∇ + t·ad(ξ): lift of θ plus the t-dependent correction
    let xi = x_gen(&base.alg);
    let lift_theta: Elem = {
        // blockwise curvature diag(θ, θ̂) of the t = 0 connection: the
        // second block also carries θ because the backend product inserts
        // the twist
        let mut out = Elem::zero();
        for (k, c) in &base.theta.terms {
            out.insert(Key::X { pos: 0, base: Box::new(k.clone()) }, c.clone());
        }
        for (k, c) in &base.alg.unit().terms {
            out.insert(Key::X { pos: 3, base: Box::new(k.clone()) }, c.clone());
        }
        out
    };
    let nabla0 = Derivation::XFamily { base: Box::new(base.nabla.clone()), t: Scalar::zero() };
    let dxi = nabla0.apply(&alg, &xi);
    let xi2 = alg.mul(&xi, &xi);
    let theta = lift_theta
        .add(&dxi.scale(t))
        .add(&xi2.scale(&t.mul(t)));
    Chain {
        alg,
        arg: base.arg.clone(),
        rho,
        nabla: Derivation::XFamily { base: Box::new(base.nabla.clone()), t: t.clone() },
        theta,
        n: base.n,
        trace: Trace::X { n: base.n, base: Box::new(base.trace.clone()) },
    }
}

/// Adjoin a formal unit (and formal curvature powers) to a chain over a
/// non-unital argument pool. The trace vanishes on everything formal, so
/// the character is reduced.
pub fn unitized_chain<A: ArgAlgebra + Clone + 'static>(
    base: &Chain<A>,
    theta_mult: Multiplier,
) -> Chain<crate::cyclic::UnitizedArgs<A>> {
    let alg = Algebra::Unitized { base: Box::new(base.alg.clone()), mult: theta_mult };
    let rho0 = Rc::clone(&base.rho);
    let rho: Rc<dyn Fn(&Algebra, &(Scalar, A::El)) -> Elem> = Rc::new(move |alg, a| {
        let Algebra::Unitized { base, .. } = alg else { unreachable!() };
        let mut out = (rho0)(base, &a.1);
        out.insert(Key::UnitPow { p: 0 }, a.0.clone());
        out
    });
    Chain {
        alg,
        arg: crate::cyclic::UnitizedArgs::new(base.arg.clone()),
        rho,
        nabla: Derivation::Unitized(Box::new(base.nabla.clone())),
        theta: Elem::single(Key::UnitPow { p: 1 }, Scalar::one()),
        n: base.n,
        trace: Trace::Unitized(Box::new(base.trace.clone())),
    }
}

/// A random chain over matrix-valued forms: connection ad(η₀) for a random
/// odd one-form η₀, curvature η₀², trace from random weights on the
/// degree-n wedge monomials.
pub fn random_matform_chain(
    rng: &mut rand_chacha::ChaCha8Rng,
    nmat: usize,
    d: usize,
    n: usize,
) -> Chain<crate::cyclic::MatAlgebra> {
    use crate::cyclic::MatAlgebra;
    use rand::Rng;
    assert!(n <= d);
    let alg = Algebra::MatForm { n: nmat, d };
    let arg = MatAlgebra::full(nmat);
    let rho: Rc<dyn Fn(&Algebra, &crate::matrix::Mat) -> Elem> = Rc::new(|_alg, a| {
        let mut out = Elem::zero();
        for i in 0..a.rows {
            for j in 0..a.cols {
                let c = &a[(i, j)];
                if !c.is_zero() {
                    out.insert(Key::MatForm { i: i as u8, j: j as u8, wedge: 0 }, c.clone());
                }
            }
        }
        out
    });
    pub(crate) fn rand_rat(rng: &mut rand_chacha::ChaCha8Rng) -> Scalar {
        let num: i64 = rng.gen_range(-4..=4);
        let den: i64 = rng.gen_range(1..=3);
        Scalar::from_rat(rat(num, den))
    }
    let mut eta = Elem::zero();
    for l in 0..d {
        for i in 0..nmat {
            for j in 0..nmat {
                let c = rand_rat(rng);
                if !c.is_zero() {
                    out_insert(&mut eta, Key::MatForm { i: i as u8, j: j as u8, wedge: 1 << l }, c);
                }
            }
        }
    }
    let theta = alg.mul(&eta, &eta);
    let mut weights = std::collections::BTreeMap::new();
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize == n {
            weights.insert(mask, rand_rat(rng));
        }
    }
    Chain {
        alg,
        arg,
        rho,
        nabla: Derivation::Ad(eta),
        theta,
        n,
        trace: Trace::MatForm { n: n as u32, weights },
    }
}

fn out_insert(e: &mut Elem, k: Key, c: Scalar) {
    e.insert(k, c);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::ArgAlgebra;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn simplex_integral_two_derivations_agree() {
        for k in 0..4usize {
            for total in 0..=8usize {
                for pows in compositions(total, k + 1) {
                    assert_eq!(
                        simplex_monomial_integral(&pows),
                        simplex_monomial_integral_beta(&pows),
                        "mismatch at {pows:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn random_chain_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (nmat, d, n) in [(2, 2, 2), (2, 3, 2), (3, 3, 3)] {
            let c = random_matform_chain(&mut rng, nmat, d, n);
            let worst = c.verify_structure(&mut rng, 3).unwrap();
            assert!(worst < 1e-10, "structure residual {worst}");
        }
    }

    #[test]
    fn plain_cycle_character_is_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_matform_chain(&mut rng, 2, 2, 2);
        let ch = c.character();
        let r = ch.cocycle_residual(&c.arg, &mut rng, 3).unwrap();
        assert!(r < 1e-10, "cocycle residual {r}");
    }

    #[test]
    fn exponential_and_factorial_characters_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = random_matform_chain(&mut rng, 2, 3, 2);
        let ch = c.character();
        for alpha in [rat_int(1), rat_int(-1), rat_int(2), rat_int(-3)] {
            let che = c.character_exponential(&alpha);
            for (&k, comp) in &ch.components {
                let args: Vec<_> = (0..=k).map(|_| c.arg.sample(&mut rng)).collect();
                let a = comp.eval(&c.arg, &args).unwrap();
                let b = che.get(k).unwrap().eval(&c.arg, &args).unwrap();
                assert!(a.sub(&b).to_c64().norm() < 1e-10);
            }
        }
    }

    #[test]
    fn boundary_identity_on_variation_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for (nmat, d, n) in [(2, 2, 1), (2, 3, 2)] {
            let base = random_matform_chain(&mut rng, nmat, d, n);
            // a second random odd one-form drives the variation
            let eta = {
                let other = random_matform_chain(&mut rng, nmat, d, n);
                let Derivation::Ad(e) = other.nabla else { unreachable!() };
                e
            };
            let cwb = connection_variation_chain(&base, &eta);
            let r = cwb.boundary_identity_residual(&mut rng, 2).unwrap();
            assert!(r < 1e-9, "boundary identity residual {r}");
        }
    }

    /// rational idempotent: conjugate a coordinate projection by I + N
    /// with N strictly upper triangular
    fn rational_idempotent(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> crate::matrix::Mat {
        use crate::matrix::Mat;
        use rand::Rng;
        let mut nmat = Mat::zeros(dim, dim);
        for i in 0..dim {
            for j in (i + 1)..dim {
                let num: i64 = rng.gen_range(-2..=2);
                nmat[(i, j)] = Scalar::from_rat(rat(num, rng.gen_range(1..=2)));
            }
        }
        // (I+N)⁻¹ = I − N + N² − … (nilpotent)
        let id = Mat::identity(dim);
        let g = id.add(&nmat);
        let mut ginv = id.clone();
        let mut pow = nmat.clone();
        let mut sign = -1i64;
        for _ in 0..dim {
            ginv = ginv.add(&pow.scale(&Scalar::int(sign)));
            pow = pow.mul(&nmat);
            sign = -sign;
        }
        let mut p = Mat::zeros(dim, dim);
        for i in 0..rank {
            p[(i, i)] = Scalar::one();
        }
        g.mul(&p).mul(&ginv)
    }

    #[test]
    fn twisted_square_matches_base_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let base = random_matform_chain(&mut rng, 2, 4, 2);
        let x0 = twisted_square_chain(&base, &Scalar::zero());
        let chb = base.character();
        let chx = x0.character();
        for k in [0usize, 2] {
            let args: Vec<_> = (0..=k).map(|_| base.arg.sample(&mut rng)).collect();
            let a = chb.get(k).unwrap().eval(&base.arg, &args).unwrap();
            let b = chx.get(k).unwrap().eval(&x0.arg, &args).unwrap();
            assert!(a.sub(&b).to_c64().norm() < 1e-10, "degree {k} mismatch");
        }
    }

    #[test]
    fn twisted_square_flat_at_one_and_cohomologous() {
        use crate::graded::derivation::x_gen;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let base = random_matform_chain(&mut rng, 2, 3, 2);
        let x1 = twisted_square_chain(&base, &Scalar::one());
        assert!(x1.theta.is_zero(), "curvature does not vanish at t = 1");
        let r = x1.verify_structure(&mut rng, 3).unwrap();
        assert!(r < 1e-10, "flat twisted chain structure residual {r}");
        // the straight-line connection family realizes the two endpoints as
        // the boundary of an interval chain
        let x0 = twisted_square_chain(&base, &Scalar::zero());
        let xi = x_gen(&base.alg);
        let cwb = connection_variation_chain(&x0, &xi);
        let rb = cwb.boundary_identity_residual(&mut rng, 2).unwrap();
        assert!(rb < 1e-9, "twisted variation boundary residual {rb}");
    }

    #[test]
    fn twisted_square_preserves_idempotent_pairings() {
        use crate::cyclic::{pair_idempotent, pair_idempotent_cyclic};
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let base = random_matform_chain(&mut rng, 3, 4, 2);
        let x1 = twisted_square_chain(&base, &Scalar::one());
        let chb = base.character();
        let chx = x1.character();
        // the flat replacement chain has a single-component cyclic
        // character; pair it with the cyclic formula
        for trial in 0..5 {
            let rank = 1 + trial % 2;
            let e = rational_idempotent(&mut rng, 3, rank);
            assert!(e.mul(&e).sub(&e).norm2() < 1e-12);
            let a = pair_idempotent(&base.arg, &chb, &e).unwrap();
            let b = pair_idempotent_cyclic(&x1.arg, chx.get(2).unwrap(), &e).unwrap();
            assert!(
                a.sub(&b).to_c64().norm() < 1e-8,
                "pairing mismatch at trial {trial}: {} vs {}",
                a.to_c64(),
                b.to_c64()
            );
        }
        // a case with nonzero pairings: the operator-backend chain of an
        // even module pairs to the graded index, before and after the
        // flat replacement
        for trial in 0..3 {
            let module = crate::fredholm::rand_even_module(&mut rng, 2, 2, 2);
            let chain = crate::fredholm::omega_chain_even(&module);
            let (e, rp, rm) = crate::fredholm::rand_even_idempotent(&mut rng, 2, 2, 1);
            let want = (rp as f64) - (rm as f64);
            let a = pair_idempotent(&chain.arg, &chain.character(), &e).unwrap();
            let f1 = twisted_square_chain(&chain, &Scalar::one());
            assert!(f1.theta.is_zero());
            let b = pair_idempotent_cyclic(
                &f1.arg,
                f1.character().get(chain.n).unwrap(),
                &e,
            )
            .unwrap();
            assert!(
                (a.to_c64().re - want).abs() < 1e-7 && (b.to_c64().re - want).abs() < 1e-7,
                "index pairing mismatch at trial {trial}: {} and {} vs {want}",
                a.to_c64().re,
                b.to_c64().re
            );
        }
    }

    #[test]
    fn unitized_chain_is_reduced_and_restricts() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let full = random_matform_chain(&mut rng, 3, 4, 2);
        // restrict the arguments to a corner: a non-unital subalgebra of
        // the ambient matrices whose curvature lives outside it
        let base = Chain {
            alg: full.alg.clone(),
            arg: crate::cyclic::MatAlgebra { dim: 3, blocks: None, corner: Some(2) },
            rho: Rc::clone(&full.rho),
            nabla: full.nabla.clone(),
            theta: full.theta.clone(),
            n: full.n,
            trace: full.trace.clone(),
        };
        let mult = Multiplier { left: base.theta.clone(), right: base.theta.clone() };
        let uni = unitized_chain(&base, mult);
        let ch = uni.character();
        let rr = ch.reduced_residual(&uni.arg, &mut rng, 3).unwrap();
        assert!(rr < 1e-10, "reduced residual {rr}");
        let rc = ch.cocycle_residual(&uni.arg, &mut rng, 3).unwrap();
        assert!(rc < 1e-9, "unitized cocycle residual {rc}");
        // on unit-free arguments the character restricts to the corner chain
        let chb = base.character();
        for k in [0usize, 2] {
            let args: Vec<_> = (0..=k).map(|_| base.arg.sample(&mut rng)).collect();
            let lifted: Vec<_> = args.iter().map(|a| uni.arg.embed(a)).collect();
            let a = chb.get(k).unwrap().eval(&base.arg, &args).unwrap();
            let b = ch.get(k).unwrap().eval(&uni.arg, &lifted).unwrap();
            assert!(a.sub(&b).to_c64().norm() < 1e-10, "degree {k} mismatch");
        }
    }

    #[test]
    fn simplex_integral_volume() {
        // all-zero exponents give the simplex volume 1/k!
        for k in 0..6usize {
            let pows = vec![0usize; k + 1];
            assert_eq!(simplex_monomial_integral(&pows), rat_int(1) / factorial(k));
        }
    }
}
