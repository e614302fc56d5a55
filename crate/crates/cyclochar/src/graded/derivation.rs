//! Degree-one derivations of the graded backends.

use super::group::GroupElt;
use super::{op_component, op_elem, Algebra, Elem, Key};
use crate::matrix::Mat;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub enum Derivation {
    Zero,
    /// exterior derivative on a torus backend (2πi·k factors, tracked
    /// exponents differentiate into the coefficient ring)
    DeRham,
    /// graded commutator with a fixed element of the same backend
    Ad(Elem),
    /// operator backend: ξ ↦ Fξ − (−1)^{|ξ|} ξF
    AdOperator(Mat),
    Sum(Vec<Derivation>),
    /// crossed product: ∇(α U_g) = (∇α + (−1)^{|α|} α·δ(g)) U_g, with δ
    /// given on generators and extended by δ(gh) = δ(g) + δ(h)^g
    Crossed { base: Box<Derivation>, delta_gens: Vec<Elem> },
    /// interval extension: d/dt ∧ dt plus Σ_p t^p ∇_p acting fibrewise
    Interval { parts: Vec<(usize, Derivation)> },
    Tensor { left: Box<Derivation>, right: Box<Derivation> },
    DirectSum(Box<Derivation>, Box<Derivation>),
    /// connection family on the twisted 2×2 backend at parameter `t`
    XFamily { base: Box<Derivation>, t: Scalar },
    /// unitized backend: acts on the base, kills adjoined powers
    Unitized(Box<Derivation>),
}

impl Derivation {
    pub fn apply(&self, alg: &Algebra, x: &Elem) -> Elem {
        match self {
            Derivation::Zero => Elem::zero(),
            Derivation::DeRham => de_rham(alg, x),
            Derivation::Ad(eta) => alg.graded_commutator(eta, x),
            Derivation::AdOperator(f) => {
                let mut out = Elem::zero();
                for deg in x.degrees(alg) {
                    let m = op_component(alg, &x.component(alg, deg), deg as u16);
                    let sign = if deg % 2 == 0 { 1 } else { -1 };
                    let d = f.mul(&m).sub(&m.mul(f).scale(&Scalar::int(sign)));
                    out = out.add(&op_elem(&d, deg as u16 + 1));
                }
                out
            }
            Derivation::Sum(parts) => {
                let mut out = Elem::zero();
                for p in parts {
                    out = out.add(&p.apply(alg, x));
                }
                out
            }
            Derivation::Crossed { base, delta_gens } => {
                let Algebra::Crossed { base: balg, action } = alg else {
                    panic!("crossed derivation on a non-crossed backend")
                };
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::Crossed { base: kb, g } = k else {
                        panic!("foreign key in crossed backend")
                    };
                    let fibre = Elem::single((**kb).clone(), c.clone());
                    // ∇α part
                    for (nk, nc) in base.apply(balg, &fibre).terms {
                        out.insert(Key::Crossed { base: Box::new(nk), g: g.clone() }, nc);
                    }
                    // (−1)^{|α|} α δ(g) part
                    let delta = delta_for(balg, action, delta_gens, g);
                    if !delta.is_zero() {
                        let sign = if balg.degree(kb) % 2 == 0 { 1 } else { -1 };
                        let tw = balg.mul(&fibre, &delta).scale(&Scalar::int(sign));
                        for (nk, nc) in tw.terms {
                            out.insert(Key::Crossed { base: Box::new(nk), g: g.clone() }, nc);
                        }
                    }
                }
                out
            }
            Derivation::Interval { parts } => {
                let Algebra::Interval { base: balg } = alg else {
                    panic!("interval derivation on a non-interval backend")
                };
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::Interval { tpow, dt, base: kb } = k else {
                        panic!("foreign key in interval backend")
                    };
                    // d/dt ∧ dt
                    if !dt && *tpow > 0 {
                        out.insert(
                            Key::Interval { tpow: tpow - 1, dt: true, base: kb.clone() },
                            c.mul(&Scalar::int(*tpow as i64)),
                        );
                    }
                    // fibrewise t-polynomial derivation, crossing dt if present
                    let sign = if *dt { -1 } else { 1 };
                    let fibre = Elem::single((**kb).clone(), c.mul(&Scalar::int(sign)));
                    for (p, der) in parts {
                        for (nk, nc) in der.apply(balg, &fibre).terms {
                            out.insert(
                                Key::Interval {
                                    tpow: tpow + *p as u16,
                                    dt: *dt,
                                    base: Box::new(nk),
                                },
                                nc,
                            );
                        }
                    }
                }
                out
            }
            Derivation::Tensor { left, right } => {
                let Algebra::Tensor { left: lalg, right: ralg } = alg else {
                    panic!("tensor derivation on a non-tensor backend")
                };
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::Tensor { left: kl, right: kr } = k else {
                        panic!("foreign key in tensor backend")
                    };
                    let efl = Elem::single((**kl).clone(), c.clone());
                    for (nk, nc) in left.apply(lalg, &efl).terms {
                        out.insert(
                            Key::Tensor { left: Box::new(nk), right: kr.clone() },
                            nc,
                        );
                    }
                    let sign = if lalg.degree(kl) % 2 == 0 { 1 } else { -1 };
                    let efr = Elem::single((**kr).clone(), c.mul(&Scalar::int(sign)));
                    for (nk, nc) in right.apply(ralg, &efr).terms {
                        out.insert(
                            Key::Tensor { left: kl.clone(), right: Box::new(nk) },
                            nc,
                        );
                    }
                }
                out
            }
            Derivation::DirectSum(d0, d1) => {
                let Algebra::DirectSum { base: balg } = alg else {
                    panic!("direct-sum derivation on a non-sum backend")
                };
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::DirectSum { side, base: kb } = k else {
                        panic!("foreign key in direct-sum backend")
                    };
                    let der = if *side == 0 { d0 } else { d1 };
                    let fibre = Elem::single((**kb).clone(), c.clone());
                    for (nk, nc) in der.apply(balg, &fibre).terms {
                        out.insert(Key::DirectSum { side: *side, base: Box::new(nk) }, nc);
                    }
                }
                out
            }
            Derivation::XFamily { base, t } => {
                let Algebra::X { base: balg, .. } = alg else {
                    panic!("twisted 2x2 derivation on the wrong backend")
                };
                // blockwise base derivation, second row negated
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::X { pos, base: kb } = k else {
                        panic!("foreign key in twisted 2x2 backend")
                    };
                    let sign = if *pos >= 2 { -1 } else { 1 };
                    let fibre = Elem::single((**kb).clone(), c.mul(&Scalar::int(sign)));
                    for (nk, nc) in base.apply(balg, &fibre).terms {
                        out.insert(Key::X { pos: *pos, base: Box::new(nk) }, nc);
                    }
                }
                if !t.is_zero() {
                    let xi = x_gen(balg);
                    out = out.add(&alg.graded_commutator(&xi, x).scale(t));
                }
                out
            }
            Derivation::Unitized(base) => {
                let Algebra::Unitized { base: balg, .. } = alg else {
                    panic!("unitized derivation on the wrong backend")
                };
                let mut out = Elem::zero();
                for (k, c) in &x.terms {
                    if matches!(k, Key::UnitPow { .. }) {
                        continue;
                    }
                    let fibre = Elem::single(k.clone(), c.clone());
                    out = out.add(&base.apply(balg, &fibre));
                }
                out
            }
        }
    }
}

/// The odd generator [[0,−1],[1,0]] of the twisted 2×2 backend.
pub fn x_gen(base: &Algebra) -> Elem {
    let unit = base.unit();
    let mut xi = Elem::zero();
    for (k, c) in &unit.terms {
        xi.insert(Key::X { pos: 1, base: Box::new(k.clone()) }, c.neg());
        xi.insert(Key::X { pos: 2, base: Box::new(k.clone()) }, c.clone());
    }
    xi
}

/// δ(g) from generator values via the cocycle rule δ(gh) = δ(g) + δ(h)^g.
pub fn delta_for(
    base: &Algebra,
    action: &super::group::TorusAction,
    delta_gens: &[Elem],
    g: &GroupElt,
) -> Elem {
    let mut acc = Elem::zero();
    let mut sofar = action.group.identity();
    for (idx, &n) in g.iter().enumerate() {
        let step: GroupElt =
            (0..g.len()).map(|j| if j == idx { n.signum() } else { 0 }).collect();
        let delta_step = if n >= 0 {
            delta_gens[idx].clone()
        } else {
            // δ(s⁻¹) = −δ(s)^{s⁻¹}
            action.apply(base, &step, &delta_gens[idx]).neg()
        };
        for _ in 0..n.abs() {
            acc = acc.add(&action.apply(base, &sofar, &delta_step));
            sofar = action.group.compose(&sofar, &step);
        }
    }
    acc
}

fn de_rham(alg: &Algebra, x: &Elem) -> Elem {
    let Algebra::Torus { d, .. } = alg else {
        panic!("de Rham derivative requires a torus backend")
    };
    let mut out = Elem::zero();
    for (k, c) in &x.terms {
        let Key::Torus { expo, freq, i, j, wedge } = k else {
            panic!("foreign key in torus backend")
        };
        for dir in 0..*d {
            // 2πi k_dir dx_dir ∧ (...)
            if freq[dir] != 0 {
                if let Some((w, s)) = super::wedge_mul(1 << dir, *wedge) {
                    let coef = c
                        .mul(&Scalar::two_pi_i(1))
                        .mul(&Scalar::int(freq[dir] * s));
                    out.insert(
                        Key::Torus { expo: expo.clone(), freq: freq.clone(), i: *i, j: *j, wedge: w },
                        coef,
                    );
                }
            }
            // exponent differentiation: e^q dq part shifts the frequency
            for (f, ec) in &expo.terms {
                if f[dir] == 0 {
                    continue;
                }
                if let Some((w, s)) = super::wedge_mul(1 << dir, *wedge) {
                    let nf: Vec<i64> = freq.iter().zip(f.iter()).map(|(a, b)| a + b).collect();
                    let coef = c
                        .mul(&Scalar::Exact(crate::scalar::ExactValue::from_cyclo(ec.clone())))
                        .mul(&Scalar::two_pi_i(1))
                        .mul(&Scalar::int(f[dir] * s));
                    out.insert(
                        Key::Torus { expo: expo.clone(), freq: nf, i: *i, j: *j, wedge: w },
                        coef,
                    );
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::ExpoPoly;

    fn circle() -> Algebra {
        Algebra::Torus { d: 1, n: 1, phase_order: 4 }
    }

    fn mode(k: i64) -> Elem {
        Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![k], i: 0, j: 0, wedge: 0 },
            Scalar::one(),
        )
    }

    #[test]
    fn de_rham_mode_derivative() {
        let alg = circle();
        let dz = Derivation::DeRham.apply(&alg, &mode(3));
        let want = Elem::single(
            Key::Torus { expo: ExpoPoly::zero(), freq: vec![3], i: 0, j: 0, wedge: 1 },
            Scalar::two_pi_i(1).mul(&Scalar::int(3)),
        );
        assert!(dz.eq_within(&want, 0.0));
        // d² = 0
        assert!(Derivation::DeRham.apply(&alg, &dz).is_zero());
    }

    #[test]
    fn de_rham_leibniz() {
        let alg = circle();
        let a = mode(2);
        let b = mode(-5).add(&mode(1).scale(&Scalar::ratio(1, 3)));
        let lhs = Derivation::DeRham.apply(&alg, &alg.mul(&a, &b));
        let rhs = alg
            .mul(&Derivation::DeRham.apply(&alg, &a), &b)
            .add(&alg.mul(&a, &Derivation::DeRham.apply(&alg, &b)));
        assert!(lhs.eq_within(&rhs, 0.0));
    }
}
