//! Greene's and McCarthy's hypergeometric functions over `F_q`.
//!
//! Characters enter as indices `k` of `chi_k`. Each function takes the
//! [`CharSums`] of its field and works for either backend.

use crate::chars::MultChar;
use crate::cyclo::Scalar;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::sums::CharSums;

/// Parameters `A_0, ..., A_n; B_1, ..., B_n | x` of an `n+1 F n` function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergeomSpec {
    pub numer: Vec<MultChar>,
    pub denom: Vec<MultChar>,
    pub x: FieldElement,
}

impl HypergeomSpec {
    pub fn new(numer: Vec<MultChar>, denom: Vec<MultChar>, x: FieldElement) -> Result<Self> {
        if denom.is_empty() || numer.len() != denom.len() + 1 {
            return Err(Error::Arity(format!(
                "expected n + 1 upper and n lower characters with n >= 1, got {} and {}",
                numer.len(),
                denom.len()
            )));
        }
        let q = x.field_order();
        for chi in numer.iter().chain(&denom) {
            if chi.field_order() != q {
                return Err(Error::ContextMismatch {
                    left: q,
                    right: chi.field_order(),
                });
            }
        }
        Ok(HypergeomSpec { numer, denom, x })
    }

    fn indices(&self) -> (Vec<u32>, Vec<u32>) {
        (
            self.numer.iter().map(|c| c.index()).collect(),
            self.denom.iter().map(|c| c.index()).collect(),
        )
    }
}

/// Special cases of `2F1*` with closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpecialCase {
    /// `A_0 = eps`, `A_1 != B_1`, `x != 0`.
    Rel1,
    /// `A_0 != eps`, `A_1 = B_1 != eps`, `x != 0`.
    Rel2,
    /// `2F1*(A, B; A | x)` with `A != eps`, `A != B`, `x != 1`.
    Rel5,
}

fn check_field<V: Scalar>(s: &CharSums<V>, x: FieldElement) -> Result<()> {
    s.field().check(x)
}

/// Greene's `2F1(A, B; C | x) = eps(x) BC(-1)/q sum_y B(y) B-bar C(1-y) A-bar(1-xy)`.
pub fn greene_2f1_fieldsum<V: Scalar>(s: &CharSums<V>, a: u32, b: u32, c: u32, x: FieldElement) -> V {
    let ctx = s.field();
    let m = s.m();
    if x.is_zero() {
        return s.zero();
    }
    let a_bar = s.idx(-(a as i64));
    let bc = s.idx(c as i64 - b as i64);
    let mut counts = vec![0i64; m as usize];
    for y in ctx.units() {
        let Some(e1) = ctx.char_exponent(bc, ctx.one_minus(y)) else {
            continue;
        };
        let Some(e2) = ctx.char_exponent(a_bar, ctx.one_minus(ctx.mul(x, y))) else {
            continue;
        };
        let e = ctx.char_exponent(b, y).unwrap() + e1 + e2;
        counts[(e % m as i64) as usize] += 1;
    }
    V::from_counts(m, &counts).scale(s.sign(b + c), s.q())
}

/// Greene's `n+1 F n` as `q/(q-1) sum_chi (A_0 chi | chi) prod (A_i chi | B_i chi) chi(x)`.
pub fn greene_nfn_binomsum_idx<V: Scalar>(s: &CharSums<V>, numer: &[u32], denom: &[u32], x: FieldElement) -> V {
    let ctx = s.field();
    let mut acc = s.zero();
    let Some(lx) = ctx.dlog_opt(x) else { return acc };
    for k in 0..s.n() {
        let kk = k as i64;
        let mut term = s.binom(s.idx(numer[0] as i64 + kk), k).clone();
        for (&ai, &bi) in numer[1..].iter().zip(denom) {
            term = term.mul(s.binom(s.idx(ai as i64 + kk), s.idx(bi as i64 + kk)));
        }
        acc.add_rotated(s.m(), &term, char_exp(s, k, lx));
    }
    acc.scale(s.q(), s.n() as i64)
}

pub fn greene_nfn_binomsum<V: Scalar>(s: &CharSums<V>, spec: &HypergeomSpec) -> Result<V> {
    check_field(s, spec.x)?;
    let (a, b) = spec.indices();
    Ok(greene_nfn_binomsum_idx(s, &a, &b, spec.x))
}

#[inline]
fn char_exp<V: Scalar>(s: &CharSums<V>, k: u32, log: u32) -> i64 {
    s.field().characteristic() as i64 * ((k as u64 * log as u64) % s.n() as u64) as i64
}

/// Coefficients `c_chi` of McCarthy's function, `F*(x) = sum_chi c_chi chi(x)`,
/// normalization `1/(q-1)` included.
pub fn mccarthy_kernel<V: Scalar>(s: &CharSums<V>, numer: &[u32], denom: &[u32]) -> Vec<V> {
    let n = denom.len();
    let mut norm = s.one();
    for &a in numer {
        norm = norm.mul(s.g_inv(a));
    }
    let denom_bar: Vec<u32> = denom.iter().map(|&b| s.idx(-(b as i64))).collect();
    for &b in &denom_bar {
        norm = norm.mul(s.g_inv(b));
    }
    norm = norm.scale(1, s.n() as i64);
    (0..s.n())
        .map(|k| {
            let kk = k as i64;
            let k_bar = s.idx(-kk);
            let mut term = s.gauss_pair(s.idx(numer[0] as i64 + kk), k_bar).into_owned();
            for &a in &numer[1..] {
                term = term.mul(s.g(s.idx(a as i64 + kk)));
            }
            for &b in &denom_bar {
                term = term.mul(s.g(s.idx(b as i64 - kk)));
            }
            let sign = if (n + 1) % 2 == 1 { s.sign(k) } else { 1 };
            term.mul(&norm).scale(sign, 1)
        })
        .collect()
}

/// `sum_chi kernel[chi] chi(x)`.
pub fn eval_kernel<V: Scalar>(s: &CharSums<V>, kernel: &[V], x: FieldElement) -> V {
    let mut acc = s.zero();
    let Some(lx) = s.field().dlog_opt(x) else { return acc };
    for (k, c) in kernel.iter().enumerate() {
        acc.add_rotated(s.m(), c, char_exp(s, k as u32, lx));
    }
    acc
}

pub fn mccarthy_star_idx<V: Scalar>(s: &CharSums<V>, numer: &[u32], denom: &[u32], x: FieldElement) -> V {
    if x.is_zero() {
        return s.zero();
    }
    eval_kernel(s, &mccarthy_kernel(s, numer, denom), x)
}

/// McCarthy's `n+1 F n (A; B | x)*`.
pub fn mccarthy_star<V: Scalar>(s: &CharSums<V>, spec: &HypergeomSpec) -> Result<V> {
    check_field(s, spec.x)?;
    let (a, b) = spec.indices();
    Ok(mccarthy_star_idx(s, &a, &b, spec.x))
}

/// Closed form of `2F1*(A, B; C | 1)`.
pub fn f21_star_at_one<V: Scalar>(s: &CharSums<V>, a: u32, b: u32, c: u32) -> V {
    let c_bar = s.idx(-(c as i64));
    let abc = s.idx(a as i64 + b as i64 - c as i64);
    let mut out = s
        .gauss_pair(s.idx(a as i64 - c as i64), s.idx(b as i64 - c as i64))
        .mul(&s.g_inv(c_bar).mul(s.g_inv(abc)));
    if abc == 0 {
        let q = s.q();
        let extra = s
            .g_inv(a)
            .mul(s.g_inv(b))
            .mul(s.g_inv(c_bar))
            .scale(q * (q - 1) * s.sign(a + b), 1);
        out.add_assign(&extra);
    }
    out
}

/// Closed-form right-hand sides of the special `2F1*` cases. `chars` holds
/// `(A_0, A_1, B_1)` for rel1 and rel2 and `(A, B)` for rel5.
pub fn f21_star_special<V: Scalar>(s: &CharSums<V>, case: SpecialCase, chars: &[u32], x: FieldElement) -> Result<V> {
    check_field(s, x)?;
    let ctx = s.field();
    let want = if case == SpecialCase::Rel5 { 2 } else { 3 };
    if chars.len() != want {
        return Err(Error::Arity(format!(
            "{case:?} takes {want} characters, got {}",
            chars.len()
        )));
    }
    let hyp = |ok: bool, what: &str| {
        if ok {
            Ok(())
        } else {
            Err(Error::Hypothesis(what.to_string()))
        }
    };
    let neg = |k: u32| s.idx(-(k as i64));
    let one_minus_x = ctx.one_minus(x);
    match case {
        SpecialCase::Rel1 => {
            let (a0, a1, b1) = (chars[0], chars[1], chars[2]);
            hyp(a0 == 0, "A0 = eps")?;
            hyp(a1 != b1, "A1 != B1")?;
            hyp(!x.is_zero(), "x != 0")?;
            // 1 - B1-bar(x) (A1 | B1)^{-1} A1-bar B1(1 - x)
            let mut out = s.one();
            let prod = s
                .chi(neg(b1), x)
                .mul(s.binom_inv(a1, b1))
                .mul(&s.chi(s.idx(b1 as i64 - a1 as i64), one_minus_x));
            out.sub_assign(&prod);
            Ok(out)
        }
        SpecialCase::Rel2 => {
            let (a0, a1, b1) = (chars[0], chars[1], chars[2]);
            hyp(a0 != 0, "A0 != eps")?;
            hyp(a1 == b1 && a1 != 0, "A1 = B1 != eps")?;
            hyp(!x.is_zero(), "x != 0")?;
            // -A1-bar(x) (A0 A1-bar | A1-bar) + A0-bar(1 - x)
            let mut out = s.chi(neg(a0), one_minus_x);
            let prod = s.chi(neg(a1), x).mul(s.binom(s.idx(a0 as i64 - a1 as i64), neg(a1)));
            out.sub_assign(&prod);
            Ok(out)
        }
        SpecialCase::Rel5 => {
            let (a, b) = (chars[0], chars[1]);
            hyp(a != 0, "A != eps")?;
            hyp(a != b, "A != B")?;
            hyp(x != ctx.one(), "x != 1")?;
            // eps(x) B-bar(1 - x) - (1/q) (B | A)^{-1} A-bar(-x)
            let mut out = if x.is_zero() {
                s.zero()
            } else {
                s.chi(neg(b), one_minus_x)
            };
            let prod = s.binom_inv(b, a).mul(&s.chi(neg(a), ctx.neg(x))).scale(1, s.q());
            out.sub_assign(&prod);
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::CycloNumber;
    use crate::field::FieldContext;
    use crate::sums::ExactSums;
    use std::sync::Arc;

    fn sums(p: u32, r: u32) -> ExactSums {
        ExactSums::new(Arc::new(FieldContext::new(p, r).unwrap()))
    }

    #[test]
    fn zero_argument_annihilates() {
        let s = sums(5, 1);
        let zero = s.field().zero();
        for a in 0..4 {
            assert!(greene_2f1_fieldsum(&s, a, 1, 2, zero).is_zero());
            assert!(greene_nfn_binomsum_idx(&s, &[a, 3, 1], &[2, 2], zero).is_zero());
            assert!(mccarthy_star_idx(&s, &[a, 1], &[3], zero).is_zero());
        }
    }

    #[test]
    fn greene_routes_agree_q5() {
        let s = sums(5, 1);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for x in s.field().elements() {
                        assert_eq!(
                            greene_2f1_fieldsum(&s, a, b, c, x),
                            greene_nfn_binomsum_idx(&s, &[a, b], &[c], x)
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn greene_quadratic_example() {
        let s = sums(5, 1);
        let x = s.field().from_int(4);
        let v = greene_2f1_fieldsum(&s, 2, 2, 2, x);
        assert_eq!(v, greene_nfn_binomsum_idx(&s, &[2, 2], &[2], x));
        // n = 2 at x = 1 is a finite exact value.
        let w = greene_nfn_binomsum_idx(&s, &[2, 2, 2], &[2, 2], s.field().one());
        assert!(w.as_rational().is_some());
    }

    #[test]
    fn mccarthy_at_one_matches_closed_form() {
        for (p, r) in [(3, 1), (5, 1), (7, 1)] {
            let s = sums(p, r);
            let one = s.field().one();
            for a in 0..s.n() {
                for b in 0..s.n() {
                    for c in 0..s.n() {
                        assert_eq!(mccarthy_star_idx(&s, &[a, b], &[c], one), f21_star_at_one(&s, a, b, c));
                    }
                }
            }
        }
    }

    #[test]
    fn mccarthy_parameter_swap() {
        let s = sums(5, 1);
        for x in s.field().elements() {
            for (a1, a2) in [(1, 2), (3, 0), (2, 3)] {
                let u = mccarthy_star_idx(&s, &[1, a1, a2], &[2, 3], x);
                let v = mccarthy_star_idx(&s, &[1, a2, a1], &[2, 3], x);
                assert_eq!(u, v);
                let w = mccarthy_star_idx(&s, &[1, a1, a2], &[3, 2], x);
                assert_eq!(u, w);
            }
        }
    }

    #[test]
    fn special_cases_match_definition() {
        let s5 = sums(5, 1);
        let f = s5.field();
        let x = f.from_int(3);
        let rel1 = f21_star_special(&s5, SpecialCase::Rel1, &[0, 1, 2], x).unwrap();
        assert_eq!(rel1, mccarthy_star_idx(&s5, &[0, 1], &[2], x));
        let x = f.from_int(2);
        let rel2 = f21_star_special(&s5, SpecialCase::Rel2, &[2, 1, 1], x).unwrap();
        assert_eq!(rel2, mccarthy_star_idx(&s5, &[2, 1], &[1], x));
        let s7 = sums(7, 1);
        let x = s7.field().from_int(4);
        let rel5 = f21_star_special(&s7, SpecialCase::Rel5, &[1, 3], x).unwrap();
        assert_eq!(rel5, mccarthy_star_idx(&s7, &[1, 3], &[1], x));
    }

    #[test]
    fn special_case_hypotheses() {
        let s = sums(5, 1);
        let f = s.field();
        assert!(matches!(
            f21_star_special(&s, SpecialCase::Rel1, &[1, 1, 2], f.one()),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            f21_star_special(&s, SpecialCase::Rel5, &[1, 3], f.one()),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            f21_star_special(&s, SpecialCase::Rel2, &[1, 1], f.one()),
            Err(Error::Arity(_))
        ));
    }

    #[test]
    fn spec_validation() {
        let f = FieldContext::new(5, 1).unwrap();
        let g = FieldContext::new(7, 1).unwrap();
        assert!(HypergeomSpec::new(vec![f.character(1)], vec![], f.one()).is_err());
        assert!(HypergeomSpec::new(vec![f.character(1), g.character(1)], vec![f.character(2)], f.one()).is_err());
        let spec = HypergeomSpec::new(vec![f.character(1), f.character(2)], vec![f.character(3)], f.one()).unwrap();
        let s = sums(5, 1);
        let v: CycloNumber = mccarthy_star(&s, &spec).unwrap();
        assert_eq!(v, f21_star_at_one(&s, 1, 2, 3));
    }
}
