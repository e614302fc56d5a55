//! Characters of cycles over crossed products of torus function algebras
//! by affine group actions, and the modular-flow comparison cochains.
//!
//! Two constructions live here. The first attaches a chain to an invariant
//! bundle-with-connection over the torus: the crossed differential algebra
//! carries a connection twisted by a one-form-valued group cocycle δ, and
//! its character is a cocycle on the crossed product whose components are
//! also computable by a direct combinatorial evaluator (sums over
//! δ-insertion subsets with group-translated factors). The second deforms
//! the fundamental cycle of the crossed product along the modular flow of
//! a volume density e^p: the character becomes polynomial in the flow time
//! and its coefficients, together with explicit transgression cochains,
//! satisfy exact boundary relations.

use crate::cycles::{compositions, Chain};
use crate::cyclic::{Cochain, ElemAlgebra};
use crate::graded::derivation::Derivation;
use crate::graded::group::{GroupElt, TorusAction};
use crate::graded::trace::Trace;
use crate::graded::{Algebra, Elem, ExpoPoly, Key, Result};
use crate::scalar::{factorial, rat, rat_int, Cyclotomic, Rat, Scalar};
use std::collections::BTreeMap;
use std::rc::Rc;

/// Split a degree-zero crossed-product element into its fibrewise parts,
/// keyed by group element.
pub fn split_crossed(x: &Elem) -> BTreeMap<GroupElt, Elem> {
    let mut out: BTreeMap<GroupElt, Elem> = BTreeMap::new();
    for (k, c) in &x.terms {
        let Key::Crossed { base, g } = k else {
            panic!("foreign key in crossed-product element")
        };
        out.entry(g.clone()).or_default().insert((**base).clone(), c.clone());
    }
    out
}

/// Lift a base element to the crossed product as a·U_g.
pub fn crossed_monomial(a: &Elem, g: &GroupElt) -> Elem {
    a.wrap_keys(|k| Key::Crossed { base: Box::new(k.clone()), g: g.clone() })
}

fn scalar_cyclo(s: &Scalar) -> Cyclotomic {
    let Scalar::Exact(v) = s else {
        panic!("exact coefficient required for a tracked exponent")
    };
    let mut out = Cyclotomic::zero();
    for (p, c) in &v.terms {
        assert_eq!(*p, 0, "transcendental coefficient in a tracked exponent");
        out = out.add(c);
    }
    out
}

/// Evaluate a monomial-level cochain on general crossed-product arguments
/// by multilinear expansion over the fibrewise parts.
fn expand_monomials(
    args: &[Elem],
    mut f: impl FnMut(&[(Elem, GroupElt)]) -> Result<Scalar>,
) -> Result<Scalar> {
    let parts: Vec<Vec<(GroupElt, Elem)>> = args
        .iter()
        .map(|a| split_crossed(a).into_iter().collect())
        .collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Ok(Scalar::zero());
    }
    let mut idx = vec![0usize; parts.len()];
    let mut acc = Scalar::zero();
    loop {
        let tuple: Vec<(Elem, GroupElt)> = parts
            .iter()
            .zip(&idx)
            .map(|(p, &i)| (p[i].1.clone(), p[i].0.clone()))
            .collect();
        acc = acc.add(&f(&tuple)?);
        let mut pos = 0;
        loop {
            if pos == parts.len() {
                return Ok(acc);
            }
            idx[pos] += 1;
            if idx[pos] < parts[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// An invariant-bundle datum over the torus: an affine group action
/// (possibly twisted by a bundle cocycle) plus a connection one-form.
#[derive(Clone)]
pub struct EquivariantCycle {
    pub base: Algebra,
    pub action: TorusAction,
    /// connection one-form on the base
    pub a_form: Elem,
    pub n: usize,
}

impl EquivariantCycle {
    pub fn crossed(&self) -> Algebra {
        Algebra::Crossed { base: Box::new(self.base.clone()), action: self.action.clone() }
    }

    /// base-level covariant derivative d + ad(A)
    fn cov(&self) -> Derivation {
        Derivation::Sum(vec![Derivation::DeRham, Derivation::Ad(self.a_form.clone())])
    }

    /// δ(g) = A − u_g·A^g·u_g⁻¹ − u_g·d(u_g⁻¹), computed directly from the
    /// defining formula (not by cocycle extension from generators).
    pub fn delta_direct(&self, g: &GroupElt) -> Elem {
        let conj = self.action.apply(&self.base, g, &self.a_form);
        let mut d = self.a_form.sub(&conj);
        if let Some((u, uinv)) = self.action.bundle_for(&self.base, g) {
            let duinv = Derivation::DeRham.apply(&self.base, &uinv);
            d = d.sub(&self.base.mul(&u, &duinv));
        }
        d
    }

    pub fn delta_gens(&self) -> Vec<Elem> {
        (0..self.action.gens.len())
            .map(|i| {
                let mut g = self.action.group.identity();
                g[i] = 1;
                self.delta_direct(&g)
            })
            .collect()
    }

    /// curvature of the connection on the base: dA + A²
    pub fn theta_base(&self) -> Elem {
        let da = Derivation::DeRham.apply(&self.base, &self.a_form);
        da.add(&self.base.mul(&self.a_form, &self.a_form))
    }

    /// The crossed-product chain: connection twisted by δ, curvature θ·U_1.
    pub fn chain(&self, pool: Vec<Elem>) -> Chain<ElemAlgebra> {
        let alg = self.crossed();
        let identity = self.action.group.identity();
        let theta = crossed_monomial(&self.theta_base(), &identity);
        Chain {
            alg: alg.clone(),
            arg: ElemAlgebra { alg, pool },
            rho: Rc::new(|_alg, a: &Elem| a.clone()),
            nabla: Derivation::Crossed {
                base: Box::new(self.cov()),
                delta_gens: self.delta_gens(),
            },
            theta,
            n: self.n,
            trace: Trace::Crossed(Box::new(Trace::Torus)),
        }
    }

    /// Direct evaluator for the degree-k character component on monomial
    /// arguments a_i·U_{g_i}: zero unless the group elements compose to the
    /// identity; otherwise a sum over curvature-power compositions with
    /// every factor translated by the accumulated group element.
    pub fn chi_direct(&self, k: usize, args: &[(Elem, GroupElt)]) -> Result<Scalar> {
        assert_eq!(args.len(), k + 1);
        let n = self.n;
        if k > n || (n - k) % 2 != 0 {
            return Ok(Scalar::zero());
        }
        let grp = &self.action.group;
        let mut gammas = vec![grp.identity()];
        for i in 0..k {
            gammas.push(grp.compose(gammas.last().unwrap(), &args[i].1));
        }
        let total = grp.compose(gammas.last().unwrap(), &args[k].1);
        if !grp.is_identity(&total) {
            return Ok(Scalar::zero());
        }
        let w = (n - k) / 2;
        let sign = if w % 2 == 0 { 1 } else { -1 };
        let coef = Scalar::from_rat(rat(sign, 1) / factorial((n + k) / 2));
        let theta = self.theta_base();
        let mut thp = vec![self.base.unit()];
        for _ in 0..w {
            thp.push(self.base.mul(thp.last().unwrap(), &theta));
        }
        let cov = self.cov();
        let mut acc = Scalar::zero();
        for pows in compositions(w, k + 1) {
            let mut word = args[0].0.clone();
            for j in 0..=k {
                if j >= 1 {
                    let f = cov
                        .apply(&self.base, &args[j].0)
                        .add(&self.base.mul(&args[j].0, &self.delta_direct(&args[j].1)));
                    word = self.base.mul(&word, &self.action.apply(&self.base, &gammas[j], &f));
                }
                if pows[j] > 0 {
                    let gnext =
                        if j < k { gammas[j + 1].clone() } else { grp.identity() };
                    let t = self.action.apply(&self.base, &gnext, &thp[pows[j]]);
                    word = self.base.mul(&word, &t);
                }
            }
            acc = acc.add(&Trace::Torus.eval(&self.base, &word)?);
        }
        Ok(acc.mul(&coef))
    }

    /// The direct evaluator wrapped as a genuine multilinear cochain.
    pub fn chi_cochain(&self, k: usize) -> Cochain<ElemAlgebra> {
        let me = self.clone();
        Cochain::new(k, move |_arg: &ElemAlgebra, a: &[Elem]| {
            expand_monomials(a, |tuple| me.chi_direct(k, tuple))
        })
    }
}

/// Modular-flow datum: an affine bundle-free action together with the
/// potential p of a volume density e^p; the flow rescales a·U_g by the
/// cocycle e^{p∘g⁻¹ − p} raised to the flow time.
#[derive(Clone)]
pub struct ModularFlow {
    pub base: Algebra,
    pub action: TorusAction,
    /// degree-zero potential with exact coefficients
    pub potential: Elem,
    pub n: usize,
}

impl ModularFlow {
    pub fn crossed(&self) -> Algebra {
        Algebra::Crossed { base: Box::new(self.base.clone()), action: self.action.clone() }
    }

    /// log of the flow cocycle: p∘g⁻¹ − p
    pub fn log_mu(&self, g: &GroupElt) -> Elem {
        self.action.pullback(&self.base, g, &self.potential).sub(&self.potential)
    }

    /// one-form d(log of the flow cocycle)
    pub fn delta(&self, g: &GroupElt) -> Elem {
        Derivation::DeRham.apply(&self.base, &self.log_mu(g))
    }

    /// Apply the flow at a rational time: each fibre over g picks up the
    /// tracked exponent t(p∘g⁻¹ − p).
    pub fn flow(&self, x: &Elem, t: &Rat) -> Elem {
        let Algebra::Torus { phase_order, .. } = &self.base else {
            panic!("modular flow requires a torus base")
        };
        let phase_order = *phase_order;
        x.map_keys(|k| {
            let Key::Crossed { base, g } = k else {
                panic!("foreign key in crossed-product element")
            };
            if self.action.group.is_identity(g) {
                return vec![(k.clone(), Scalar::one())];
            }
            let lm = self.log_mu(g);
            let terms: Vec<(Vec<i64>, Cyclotomic)> = lm
                .terms
                .iter()
                .map(|(lk, lc)| {
                    let Key::Torus { freq, wedge, .. } = lk else { unreachable!() };
                    assert_eq!(*wedge, 0, "potential must be a function");
                    (freq.clone(), scalar_cyclo(lc))
                })
                .collect();
            let shift = ExpoPoly::from_terms(terms, phase_order).scale(t, phase_order);
            let Key::Torus { expo, freq, i, j, wedge } = &**base else {
                panic!("modular flow requires a torus base")
            };
            let nk = Key::Torus {
                expo: expo.add(&shift, phase_order),
                freq: freq.clone(),
                i: *i,
                j: *j,
                wedge: *wedge,
            };
            vec![(Key::Crossed { base: Box::new(nk), g: g.clone() }, Scalar::one())]
        })
    }

    /// The fundamental chain of the crossed product, with the argument
    /// representation composed with the flow at time t.
    pub fn flowed_chain(&self, pool: Vec<Elem>, t: &Rat) -> Chain<ElemAlgebra> {
        let alg = self.crossed();
        let me = self.clone();
        let t = t.clone();
        Chain {
            alg: alg.clone(),
            arg: ElemAlgebra { alg, pool },
            rho: Rc::new(move |_alg, a: &Elem| me.flow(a, &t)),
            nabla: Derivation::Crossed {
                base: Box::new(Derivation::DeRham),
                delta_gens: vec![Elem::zero(); self.action.gens.len()],
            },
            theta: Elem::zero(),
            n: self.n,
            trace: Trace::Crossed(Box::new(Trace::Torus)),
        }
    }

    /// The chain of the invariant volume-density bundle in its flat
    /// trivialization: the connection twist is d(log cocycle).
    pub fn invariant_cycle_chain(&self, pool: Vec<Elem>) -> Chain<ElemAlgebra> {
        let alg = self.crossed();
        let delta_gens: Vec<Elem> = (0..self.action.gens.len())
            .map(|i| {
                let mut g = self.action.group.identity();
                g[i] = 1;
                self.delta(&g)
            })
            .collect();
        Chain {
            alg: alg.clone(),
            arg: ElemAlgebra { alg, pool },
            rho: Rc::new(|_alg, a: &Elem| a.clone()),
            nabla: Derivation::Crossed { base: Box::new(Derivation::DeRham), delta_gens },
            theta: Elem::zero(),
            n: self.n,
            trace: Trace::Crossed(Box::new(Trace::Torus)),
        }
    }

    fn gammas(&self, args: &[(Elem, GroupElt)]) -> Option<Vec<GroupElt>> {
        let grp = &self.action.group;
        let mut gammas = vec![grp.identity()];
        for (_, g) in args.iter().take(args.len() - 1) {
            gammas.push(grp.compose(gammas.last().unwrap(), g));
        }
        let total = grp.compose(gammas.last().unwrap(), &args[args.len() - 1].1);
        if grp.is_identity(&total) {
            Some(gammas)
        } else {
            None
        }
    }

    /// t^j coefficient of the flowed character, by its direct formula:
    /// (1/n!) Σ_{|S|=j} ∮ a₀ ∏ (da_i or a_i·d log μ(g_i) on S), with every
    /// factor translated by the accumulated group element.
    pub fn p_direct(&self, j: usize) -> Cochain<ElemAlgebra> {
        let me = self.clone();
        let n = self.n;
        Cochain::new(n, move |_arg: &ElemAlgebra, a: &[Elem]| {
            expand_monomials(a, |tuple| {
                let Some(gammas) = me.gammas(tuple) else {
                    return Ok(Scalar::zero());
                };
                let mut acc = Scalar::zero();
                for mask in 0u32..(1 << n) {
                    if mask.count_ones() as usize != j {
                        continue;
                    }
                    let mut word = tuple[0].0.clone();
                    for i in 1..=n {
                        let f = if mask & (1 << (i - 1)) != 0 {
                            me.base.mul(&tuple[i].0, &me.delta(&tuple[i].1))
                        } else {
                            Derivation::DeRham.apply(&me.base, &tuple[i].0)
                        };
                        word = me
                            .base
                            .mul(&word, &me.action.apply(&me.base, &gammas[i], &f));
                    }
                    acc = acc.add(&Trace::Torus.eval(&me.base, &word)?);
                }
                Ok(acc.mul(&Scalar::from_rat(rat_int(1) / factorial(n))))
            })
        })
    }

    /// s^j coefficient of the transgression character of the flow
    /// cobordism: degree n+1, with one slot carrying a_l·log μ(g_l), j−1
    /// slots carrying a_i·d log μ(g_i) and the rest differentials.
    pub fn q_direct(&self, j: usize) -> Cochain<ElemAlgebra> {
        assert!(j >= 1);
        let me = self.clone();
        let n = self.n;
        Cochain::new(n + 1, move |_arg: &ElemAlgebra, a: &[Elem]| {
            expand_monomials(a, |tuple| {
                let Some(gammas) = me.gammas(tuple) else {
                    return Ok(Scalar::zero());
                };
                let mut acc = Scalar::zero();
                for l in 1..=n + 1 {
                    let lsign = if (l - 1) % 2 == 0 { 1 } else { -1 };
                    for mask in 0u32..(1 << (n + 1)) {
                        if mask.count_ones() as usize != j - 1 || mask & (1 << (l - 1)) != 0 {
                            continue;
                        }
                        let mut word = tuple[0].0.clone();
                        for i in 1..=n + 1 {
                            let f = if i == l {
                                me.base.mul(&tuple[i].0, &me.log_mu(&tuple[i].1))
                            } else if mask & (1 << (i - 1)) != 0 {
                                me.base.mul(&tuple[i].0, &me.delta(&tuple[i].1))
                            } else {
                                Derivation::DeRham.apply(&me.base, &tuple[i].0)
                            };
                            word = me
                                .base
                                .mul(&word, &me.action.apply(&me.base, &gammas[i], &f));
                        }
                        acc = acc
                            .add(&Trace::Torus.eval(&me.base, &word)?.mul(&Scalar::int(lsign)));
                    }
                }
                let coef = rat(1, j as i64) / factorial(n + 1);
                Ok(acc.mul(&Scalar::from_rat(coef)))
            })
        })
    }
}

/// Solve a small rational-node Vandermonde system exactly: given values
/// v_i = Σ_j c_j t_i^j at distinct rational nodes, recover the c_j.
pub fn polynomial_coefficients(nodes: &[Rat], values: &[Scalar]) -> Vec<Scalar> {
    let m = nodes.len();
    assert_eq!(m, values.len());
    // Gauss-Jordan on the Vandermonde matrix over the rationals, applied
    // to the scalar right-hand side
    let mut a: Vec<Vec<Rat>> = (0..m)
        .map(|i| {
            let mut row = Vec::with_capacity(m);
            let mut p = rat_int(1);
            for _ in 0..m {
                row.push(p.clone());
                p *= nodes[i].clone();
            }
            row
        })
        .collect();
    let mut rhs: Vec<Scalar> = values.to_vec();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&r| !num_traits::Zero::is_zero(&a[r][col]))
            .expect("nodes must be distinct");
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= p.clone();
        }
        rhs[col] = rhs[col].mul(&Scalar::from_rat(rat_int(1) / p));
        for r in 0..m {
            if r != col {
                let f = a[r][col].clone();
                if num_traits::Zero::is_zero(&f) {
                    continue;
                }
                for cidx in 0..m {
                    let v = a[r][cidx].clone() - f.clone() * a[col][cidx].clone();
                    a[r][cidx] = v;
                }
                rhs[r] = rhs[r].sub(&rhs[col].mul(&Scalar::from_rat(f)));
            }
        }
    }
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::connection_variation_chain;
    use crate::cyclic::ArgAlgebra;
    use crate::graded::derivation::delta_for;
    use crate::graded::group::{AffineMap, Group, TorusGen};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tmode(freq: Vec<i64>, wedge: u32) -> Elem {
        Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq, i: 0, j: 0, wedge },
            Scalar::one(),
        )
    }

    /// circle, rotation by 1/4 twisted by the basic line-bundle cocycle
    fn circle_cycle() -> EquivariantCycle {
        let base = Algebra::Torus { d: 1, n: 1, phase_order: 4 };
        let action = TorusAction {
            group: Group::free(1),
            gens: vec![TorusGen {
                map: AffineMap::translation(vec![rat(1, 4)]),
                bundle: Some((tmode(vec![1], 0), tmode(vec![-1], 0))),
            }],
        };
        let a_form = tmode(vec![1], 1)
            .add(&tmode(vec![-1], 1).scale(&Scalar::from_rat(rat(1, 2))));
        EquivariantCycle { base, action, a_form, n: 1 }
    }

    fn circle_pool(cyc: &EquivariantCycle) -> Vec<Elem> {
        let mut pool = Vec::new();
        for g in [-1i64, 0, 1] {
            for k in [-1i64, 0, 1] {
                pool.push(crossed_monomial(&tmode(vec![k], 0), &vec![g]));
            }
        }
        let _ = cyc;
        pool
    }

    /// 2-torus, commuting translation and shear, bundle on the translation
    fn torus2_cycle() -> EquivariantCycle {
        let base = Algebra::Torus { d: 2, n: 1, phase_order: 4 };
        let action = TorusAction {
            group: Group::free(2),
            gens: vec![
                TorusGen {
                    map: AffineMap::translation(vec![rat(1, 4), rat(0, 1)]),
                    bundle: Some((tmode(vec![0, 1], 0), tmode(vec![0, -1], 0))),
                },
                TorusGen {
                    map: AffineMap::linear(vec![vec![1, 1], vec![0, 1]]),
                    bundle: None,
                },
            ],
        };
        let a_form = tmode(vec![1, 0], 0b01)
            .add(&tmode(vec![0, -1], 0b10).scale(&Scalar::from_rat(rat(1, 3))));
        EquivariantCycle { base, action, a_form, n: 2 }
    }

    fn torus2_pool() -> Vec<Elem> {
        let mut pool = Vec::new();
        for g in [vec![0i64, 0], vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]] {
            for k in [vec![0i64, 0], vec![1, 0], vec![0, 1]] {
                pool.push(crossed_monomial(&tmode(k, 0), &g));
            }
        }
        pool
    }

    fn random_monomial_tuple(
        rng: &mut ChaCha8Rng,
        k: usize,
        d: usize,
    ) -> Vec<(Elem, GroupElt)> {
        // group parts sum to the identity so the tuple can pair nontrivially
        let rank = 1;
        let mut gs: Vec<GroupElt> = (0..k)
            .map(|_| (0..rank).map(|_| rng.gen_range(-1..=1)).collect())
            .collect();
        let head: GroupElt =
            (0..rank).map(|i| -gs.iter().map(|g: &GroupElt| g[i]).sum::<i64>()).collect();
        gs.insert(0, head);
        gs.into_iter()
            .map(|g| {
                let freq: Vec<i64> = (0..d).map(|_| rng.gen_range(-1..=1)).collect();
                (tmode(freq, 0), g)
            })
            .collect()
    }

    #[test]
    fn equivariant_circle_structure_direct_and_cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cyc = circle_cycle();
        let chain = cyc.chain(circle_pool(&cyc));
        let worst = chain.verify_structure(&mut rng, 20).unwrap();
        assert!(worst < 1e-9, "structure residual {worst}");
        let ch = chain.character();
        let res = ch.cocycle_residual(&chain.arg, &mut rng, 6).unwrap();
        assert!(res < 1e-9, "cocycle residual {res}");
        let comp = ch.get(1).unwrap();
        for _ in 0..8 {
            let tuple = random_monomial_tuple(&mut rng, 1, 1);
            let lifted: Vec<Elem> =
                tuple.iter().map(|(a, g)| crossed_monomial(a, g)).collect();
            let generic = comp.eval(&chain.arg, &lifted).unwrap();
            let direct = cyc.chi_direct(1, &tuple).unwrap();
            assert!(generic.sub(&direct).is_zero(), "generic and direct evaluators differ");
        }
        // non-identity total group element ⇒ both evaluators vanish
        let tuple = vec![(tmode(vec![1], 0), vec![1]), (tmode(vec![-1], 0), vec![1])];
        assert!(cyc.chi_direct(1, &tuple).unwrap().is_zero());
        let lifted: Vec<Elem> =
            tuple.iter().map(|(a, g)| crossed_monomial(a, g)).collect();
        assert!(comp.eval(&chain.arg, &lifted).unwrap().is_zero());
        // the cochain wrapper of the direct evaluator is itself a cocycle
        let dual = cyc.chi_cochain(1);
        let res = crate::cyclic::MultiCochain::new(vec![dual])
            .cocycle_residual(&chain.arg, &mut rng, 6)
            .unwrap();
        assert!(res < 1e-9, "direct-evaluator cocycle residual {res}");
    }

    #[test]
    fn equivariant_delta_direct_satisfies_cocycle_rule() {
        let cyc = circle_cycle();
        let gens = cyc.delta_gens();
        for g in [vec![2i64], vec![-1], vec![3], vec![-2]] {
            let ext = delta_for(&cyc.base, &cyc.action, &gens, &g);
            let dir = cyc.delta_direct(&g);
            assert!(ext.dist(&dir) < 1e-12, "cocycle extension disagrees at {g:?}");
        }
        let t2 = torus2_cycle();
        let gens = t2.delta_gens();
        for g in [vec![1i64, 1], vec![-1, 2], vec![2, -1]] {
            let ext = delta_for(&t2.base, &t2.action, &gens, &g);
            let dir = t2.delta_direct(&g);
            assert!(ext.dist(&dir) < 1e-12, "cocycle extension disagrees at {g:?}");
        }
    }

    #[test]
    fn equivariant_two_torus_structure_and_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cyc = torus2_cycle();
        let chain = cyc.chain(torus2_pool());
        let worst = chain.verify_structure(&mut rng, 12).unwrap();
        assert!(worst < 1e-9, "structure residual {worst}");
        let ch = chain.character();
        let res = ch.cocycle_residual(&chain.arg, &mut rng, 4).unwrap();
        assert!(res < 1e-9, "cocycle residual {res}");
        for k in [0usize, 2] {
            let comp = ch.get(k).unwrap();
            for _ in 0..4 {
                // two-generator tuples with identity product
                let mut tuple: Vec<(Elem, GroupElt)> = (0..k)
                    .map(|_| {
                        let g = vec![rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
                        let freq = vec![rng.gen_range(-1..=1), rng.gen_range(-1..=1)];
                        (tmode(freq, 0), g)
                    })
                    .collect();
                let head = vec![
                    -tuple.iter().map(|(_, g)| g[0]).sum::<i64>(),
                    -tuple.iter().map(|(_, g)| g[1]).sum::<i64>(),
                ];
                tuple.insert(0, (tmode(vec![0, 1], 0), head));
                let lifted: Vec<Elem> =
                    tuple.iter().map(|(a, g)| crossed_monomial(a, g)).collect();
                let generic = comp.eval(&chain.arg, &lifted).unwrap();
                let direct = cyc.chi_direct(k, &tuple).unwrap();
                assert!(
                    generic.sub(&direct).is_zero(),
                    "generic and direct evaluators differ in degree {k}"
                );
            }
        }
    }

    #[test]
    fn equivariant_connection_change_is_a_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let cyc = circle_cycle();
        let chain = cyc.chain(circle_pool(&cyc));
        let beta = tmode(vec![2], 1).scale(&Scalar::from_rat(rat(1, 2)));
        let mut cyc2 = cyc.clone();
        cyc2.a_form = cyc.a_form.add(&beta);
        let chain2 = cyc2.chain(circle_pool(&cyc2));
        let eta = crossed_monomial(&beta, &cyc.action.group.identity());
        let cwb = connection_variation_chain(&chain, &eta);
        let res = cwb.boundary_identity_residual(&mut rng, 8).unwrap();
        assert!(res < 1e-9, "variation boundary residual {res}");
        // the t = 1 side of the cobordism reproduces the deformed cycle
        let bd = cwb.boundary.character();
        let ch1 = chain.character();
        let ch2 = chain2.character();
        for _ in 0..5 {
            let args: Vec<Elem> = (0..2).map(|_| chain.arg.sample(&mut rng)).collect();
            let lhs = bd.get(1).unwrap().eval(&chain.arg, &args).unwrap();
            let rhs = ch2
                .get(1)
                .unwrap()
                .eval(&chain.arg, &args)
                .unwrap()
                .sub(&ch1.get(1).unwrap().eval(&chain.arg, &args).unwrap());
            assert!(lhs.sub(&rhs).is_zero(), "cobordism sides differ from the two cycles");
        }
    }

    fn circle_flow() -> ModularFlow {
        let base = Algebra::Torus { d: 1, n: 1, phase_order: 12 };
        let action = TorusAction {
            group: Group::free(1),
            gens: vec![TorusGen {
                map: AffineMap::translation(vec![rat(1, 3)]),
                bundle: None,
            }],
        };
        let potential = tmode(vec![1], 0)
            .add(&tmode(vec![-1], 0).scale(&Scalar::from_rat(rat(1, 2))));
        ModularFlow { base, action, potential, n: 1 }
    }

    fn flow_pool(d: usize, rank: usize) -> Vec<Elem> {
        let mut pool = Vec::new();
        let mut gs = vec![vec![0i64; rank]];
        for i in 0..rank {
            let mut g = vec![0i64; rank];
            g[i] = 1;
            gs.push(g.clone());
            g[i] = -1;
            gs.push(g);
        }
        for g in gs {
            for k in 0..d {
                let mut f = vec![0i64; d];
                pool.push(crossed_monomial(&tmode(f.clone(), 0), &g));
                f[k] = 1;
                pool.push(crossed_monomial(&tmode(f.clone(), 0), &g));
                f[k] = -1;
                pool.push(crossed_monomial(&tmode(f, 0), &g));
            }
        }
        pool
    }

    #[test]
    fn modular_flow_character_is_polynomial_with_direct_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let fl = circle_flow();
        let pool = flow_pool(1, 1);
        let n = fl.n;
        let nodes: Vec<Rat> = (0..=(n + 2) as i64).map(rat_int).collect();
        let chains: Vec<_> =
            nodes.iter().map(|t| fl.flowed_chain(pool.clone(), t)).collect();
        let arg = &chains[0].arg;
        for _ in 0..5 {
            let args: Vec<Elem> = (0..=n).map(|_| arg.sample(&mut rng)).collect();
            let values: Vec<Scalar> = chains
                .iter()
                .map(|c| c.character().get(n).unwrap().eval(arg, &args).unwrap())
                .collect();
            let coeffs = polynomial_coefficients(&nodes, &values);
            // degree is at most n
            for c in coeffs.iter().skip(n + 1) {
                assert!(c.is_zero(), "flowed character exceeds degree {n}");
            }
            // coefficients match the direct formula
            for (j, c) in coeffs.iter().take(n + 1).enumerate() {
                let direct = fl.p_direct(j).eval(arg, &args).unwrap();
                assert!(
                    c.sub(&direct).is_zero(),
                    "direct t^{j} coefficient disagrees with interpolation"
                );
            }
        }
    }

    #[test]
    fn modular_flow_transgression_relations_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let fl = circle_flow();
        let pool = flow_pool(1, 1);
        let arg = ElemAlgebra { alg: fl.crossed(), pool };
        let n = fl.n;
        let mut witnessed = false;
        for j in 1..=n + 1 {
            let q = fl.q_direct(j);
            let bq = q.boundary_b();
            let capq = q.boundary_cap();
            for _ in 0..4 {
                let bargs: Vec<Elem> = (0..=n + 2).map(|_| arg.sample(&mut rng)).collect();
                assert!(
                    bq.eval(&arg, &bargs).unwrap().is_zero(),
                    "simplicial boundary of the transgression cochain is nonzero, j={j}"
                );
                let cargs: Vec<Elem> = (0..=n).map(|_| arg.sample(&mut rng)).collect();
                let lhs = capq.eval(&arg, &cargs).unwrap();
                witnessed = witnessed || !lhs.is_zero();
                let rhs = if j <= n {
                    fl.p_direct(j).eval(&arg, &cargs).unwrap()
                } else {
                    Scalar::zero()
                };
                assert!(
                    lhs.sub(&rhs).is_zero(),
                    "cyclic boundary of the transgression cochain is wrong, j={j}"
                );
            }
        }
        assert!(witnessed, "every transgression sample vanished");
    }

    #[test]
    fn modular_flow_endpoint_matches_invariant_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let fl = circle_flow();
        let pool = flow_pool(1, 1);
        let n = fl.n;
        let flowed = fl.flowed_chain(pool.clone(), &rat_int(1));
        let cyc = fl.invariant_cycle_chain(pool);
        let chf = flowed.character();
        let chc = cyc.character();
        for _ in 0..5 {
            let args: Vec<Elem> = (0..=n).map(|_| flowed.arg.sample(&mut rng)).collect();
            let a = chf.get(n).unwrap().eval(&flowed.arg, &args).unwrap();
            let b = chc.get(n).unwrap().eval(&cyc.arg, &args).unwrap();
            assert!(a.sub(&b).is_zero(), "time-one flow differs from the invariant cycle");
        }
        // the invariant cycle is a genuine chain and its character a cocycle
        let worst = cyc.verify_structure(&mut rng, 10).unwrap();
        assert!(worst < 1e-9, "invariant cycle structure residual {worst}");
        let res = chc.cocycle_residual(&cyc.arg, &mut rng, 5).unwrap();
        assert!(res < 1e-9, "invariant cycle cocycle residual {res}");
    }

    fn torus2_flow() -> ModularFlow {
        let base = Algebra::Torus { d: 2, n: 1, phase_order: 12 };
        let action = TorusAction {
            group: Group::free(2),
            gens: vec![
                TorusGen {
                    map: AffineMap::translation(vec![rat(1, 3), rat(0, 1)]),
                    bundle: None,
                },
                TorusGen {
                    map: AffineMap::linear(vec![vec![1, 1], vec![0, 1]]),
                    bundle: None,
                },
            ],
        };
        let potential = tmode(vec![1, 0], 0)
            .add(&tmode(vec![0, 1], 0).scale(&Scalar::from_rat(rat(1, 2))));
        ModularFlow { base, action, potential, n: 2 }
    }

    #[test]
    fn modular_flow_two_torus_polynomial_and_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let fl = torus2_flow();
        let pool = flow_pool(2, 2);
        let n = fl.n;
        let arg = ElemAlgebra { alg: fl.crossed(), pool: pool.clone() };
        let nodes: Vec<Rat> = (0..=(n + 1) as i64).map(rat_int).collect();
        let chains: Vec<_> =
            nodes.iter().map(|t| fl.flowed_chain(pool.clone(), t)).collect();
        for _ in 0..2 {
            let args: Vec<Elem> = (0..=n).map(|_| arg.sample(&mut rng)).collect();
            let values: Vec<Scalar> = chains
                .iter()
                .map(|c| c.character().get(n).unwrap().eval(&arg, &args).unwrap())
                .collect();
            let coeffs = polynomial_coefficients(&nodes, &values);
            for (j, c) in coeffs.iter().enumerate() {
                let direct = fl.p_direct(j).eval(&arg, &args).unwrap();
                assert!(
                    c.sub(&direct).is_zero(),
                    "direct t^{j} coefficient disagrees with interpolation"
                );
            }
        }
        let mut witnessed = false;
        for j in 1..=n + 1 {
            let q = fl.q_direct(j);
            let bq = q.boundary_b();
            let capq = q.boundary_cap();
            for _ in 0..2 {
                let bargs: Vec<Elem> = (0..=n + 2).map(|_| arg.sample(&mut rng)).collect();
                assert!(
                    bq.eval(&arg, &bargs).unwrap().is_zero(),
                    "simplicial boundary of the transgression cochain is nonzero, j={j}"
                );
                let cargs: Vec<Elem> = (0..=n).map(|_| arg.sample(&mut rng)).collect();
                let lhs = capq.eval(&arg, &cargs).unwrap();
                witnessed = witnessed || !lhs.is_zero();
                let rhs = if j <= n {
                    fl.p_direct(j).eval(&arg, &cargs).unwrap()
                } else {
                    Scalar::zero()
                };
                assert!(
                    lhs.sub(&rhs).is_zero(),
                    "cyclic boundary of the transgression cochain is wrong, j={j}"
                );
            }
        }
        assert!(witnessed, "every transgression sample vanished");
    }
}
