//! Closed graded traces on the graded backends.

use super::{Algebra, CharError, Elem, Key, Result};
use crate::matrix::Mat;
use crate::scalar::{rat, Scalar};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub enum Trace {
    /// matrix-valued forms: matrix trace against weights on wedge masks,
    /// all weighted masks carrying the same form degree `n`
    MatForm { n: u32, weights: BTreeMap<u32, Scalar> },
    /// torus backend: integrate the top wedge, keeping only the constant
    /// frequency; nonzero tracked exponents are not integrable here
    Torus,
    /// operator backend: weight · Tr(γ ξ) on the component of degree `n`
    Op { n: u16, weight: Scalar, grading: Option<Mat> },
    /// crossed product: base trace of the identity-group coefficient
    Crossed(Box<Trace>),
    /// interval extension of a dimension-`n` base trace
    Interval { n: usize, base: Box<Trace> },
    DirectSum { first: Box<Trace>, second: Box<Trace>, second_sign: i64 },
    Tensor { left: Box<Trace>, right: Box<Trace> },
    /// twisted 2×2 backend over a dimension-`n` base trace
    X { n: usize, base: Box<Trace> },
    Unitized(Box<Trace>),
    Trivial,
}

impl Trace {
    pub fn eval(&self, alg: &Algebra, x: &Elem) -> Result<Scalar> {
        let mut out = Scalar::zero();
        match self {
            Trace::MatForm { n, weights } => {
                for (k, c) in &x.terms {
                    let Key::MatForm { i, j, wedge } = k else {
                        panic!("foreign key in matrix-form backend")
                    };
                    if i != j || wedge.count_ones() != *n {
                        continue;
                    }
                    if let Some(w) = weights.get(wedge) {
                        out = out.add(&c.mul(w));
                    }
                }
            }
            Trace::Torus => {
                let Algebra::Torus { d, .. } = alg else {
                    panic!("torus trace on the wrong backend")
                };
                let full = (1u32 << d) - 1;
                for (k, c) in &x.terms {
                    let Key::Torus { expo, freq, i, j, wedge } = k else {
                        panic!("foreign key in torus backend")
                    };
                    if i != j || *wedge != full || freq.iter().any(|&f| f != 0) {
                        continue;
                    }
                    if !expo.is_zero() {
                        return Err(CharError::ExponentResidue(
                            "nonzero tracked exponent in torus trace".into(),
                        ));
                    }
                    out = out.add(c);
                }
            }
            Trace::Op { n, weight, grading } => {
                let m = super::op_component(alg, &x.component(alg, *n as i64), *n);
                let tr = match grading {
                    Some(g) => g.mul(&m).trace(),
                    None => m.trace(),
                };
                out = weight.mul(&tr);
            }
            Trace::Crossed(base) => {
                let Algebra::Crossed { base: balg, .. } = alg else {
                    panic!("crossed trace on the wrong backend")
                };
                let mut fibre = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::Crossed { base: kb, g } = k else {
                        panic!("foreign key in crossed backend")
                    };
                    if g.iter().all(|&v| v == 0) {
                        fibre.insert((**kb).clone(), c.clone());
                    }
                }
                out = base.eval(balg, &fibre)?;
            }
            Trace::Interval { n, base } => {
                let Algebra::Interval { base: balg } = alg else {
                    panic!("interval trace on the wrong backend")
                };
                for (k, c) in &x.terms {
                    let Key::Interval { tpow, dt, base: kb } = k else {
                        panic!("foreign key in interval backend")
                    };
                    if !dt || balg.degree(kb) != *n as i64 {
                        continue;
                    }
                    let fibre = Elem::single((**kb).clone(), c.clone());
                    let v = base.eval(balg, &fibre)?;
                    let w = Scalar::from_rat(rat(1, *tpow as i64 + 1));
                    out = out.add(&v.mul(&w));
                }
            }
            Trace::DirectSum { first, second, second_sign } => {
                let Algebra::DirectSum { base: balg } = alg else {
                    panic!("direct-sum trace on the wrong backend")
                };
                let mut f0 = Elem::zero();
                let mut f1 = Elem::zero();
                for (k, c) in &x.terms {
                    let Key::DirectSum { side, base: kb } = k else {
                        panic!("foreign key in direct-sum backend")
                    };
                    if *side == 0 {
                        f0.insert((**kb).clone(), c.clone());
                    } else {
                        f1.insert((**kb).clone(), c.clone());
                    }
                }
                out = first
                    .eval(balg, &f0)?
                    .add(&second.eval(balg, &f1)?.mul(&Scalar::int(*second_sign)));
            }
            Trace::Tensor { left, right } => {
                let Algebra::Tensor { left: lalg, right: ralg } = alg else {
                    panic!("tensor trace on the wrong backend")
                };
                // group by left factor, trace out the right factor
                let mut by_left: BTreeMap<Key, Elem> = BTreeMap::new();
                for (k, c) in &x.terms {
                    let Key::Tensor { left: kl, right: kr } = k else {
                        panic!("foreign key in tensor backend")
                    };
                    by_left
                        .entry((**kl).clone())
                        .or_insert_with(Elem::zero)
                        .insert((**kr).clone(), c.clone());
                }
                for (kl, fibre) in by_left {
                    let rv = right.eval(ralg, &fibre)?;
                    if rv.is_zero() {
                        continue;
                    }
                    let lv = left.eval(lalg, &Elem::single(kl, Scalar::one()))?;
                    out = out.add(&lv.mul(&rv));
                }
            }
            Trace::X { n, base } => {
                let Algebra::X { base: balg, theta } = alg else {
                    panic!("twisted 2x2 trace on the wrong backend")
                };
                let sign = if n % 2 == 0 { -1 } else { 1 };
                for (k, c) in &x.terms {
                    let Key::X { pos, base: kb } = k else {
                        panic!("foreign key in twisted 2x2 backend")
                    };
                    let fibre = Elem::single((**kb).clone(), c.clone());
                    match pos {
                        0 => out = out.add(&base.eval(balg, &fibre)?),
                        3 => {
                            let tw = balg.mul(&fibre, theta);
                            out = out
                                .add(&base.eval(balg, &tw)?.mul(&Scalar::int(sign)));
                        }
                        _ => {}
                    }
                }
            }
            Trace::Unitized(base) => {
                let Algebra::Unitized { base: balg, .. } = alg else {
                    panic!("unitized trace on the wrong backend")
                };
                let mut fibre = Elem::zero();
                for (k, c) in &x.terms {
                    if matches!(k, Key::UnitPow { .. }) {
                        continue;
                    }
                    fibre.insert(k.clone(), c.clone());
                }
                out = base.eval(balg, &fibre)?;
            }
            Trace::Trivial => {
                for (k, c) in &x.terms {
                    if matches!(k, Key::One) {
                        out = out.add(c);
                    }
                }
            }
        }
        Ok(out)
    }
}
