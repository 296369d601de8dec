//! Multiplicative characters of `F_q^x`, the additive character and the two
//! delta functions.
//!
//! Characters are labelled against the fixed generator: `chi_k(g^j) =
//! zeta_{q-1}^{kj}`, extended by `chi_k(0) = 0` for every `k` (the trivial
//! character included). All values live in `Q(zeta_m)` with `m = p(q - 1)`,
//! where `zeta_{q-1} = zeta_m^p` and `zeta_p = zeta_m^{q-1}`.

use std::fmt;
use std::ops::Mul;

use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};

/// The character `chi_k` of `F_q^x`, `k` taken mod `q - 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultChar {
    k: u32,
    q: u32,
}

impl MultChar {
    pub fn index(self) -> u32 {
        self.k
    }

    pub fn field_order(self) -> u32 {
        self.q
    }

    fn group_order(self) -> u32 {
        self.q - 1
    }

    fn check(self, other: MultChar) -> Result<()> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.q,
                right: other.q,
            })
        }
    }

    pub fn product(self, other: MultChar) -> Result<MultChar> {
        self.check(other)?;
        Ok(MultChar {
            k: (self.k + other.k) % self.group_order(),
            q: self.q,
        })
    }

    /// The conjugate character `chi_{-k}`.
    pub fn inverse(self) -> MultChar {
        let n = self.group_order();
        MultChar {
            k: (n - self.k) % n,
            q: self.q,
        }
    }

    pub fn is_trivial(self) -> bool {
        self.k == 0
    }

    /// `chi(-1) = (-1)^k`, since `-1 = g^{(q-1)/2}`.
    pub fn at_minus_one(self) -> i64 {
        if self.k.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    pub fn label(self) -> String {
        format!("chi_{}", self.k)
    }
}

impl Mul for MultChar {
    type Output = MultChar;

    /// Panics when the characters belong to different fields; use
    /// [`MultChar::product`] for the checked form.
    fn mul(self, rhs: MultChar) -> MultChar {
        self.product(rhs).expect("characters of different fields")
    }
}

impl fmt::Debug for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}", self.k)
    }
}

impl fmt::Display for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi_{}", self.k)
    }
}

/// Indicator of the trivial character.
pub fn delta_char(chi: MultChar) -> i64 {
    chi.is_trivial() as i64
}

/// Indicator of `0` in `F_q`.
pub fn delta_elem(x: FieldElement) -> i64 {
    x.is_zero() as i64
}

impl FieldContext {
    /// Order `m = p(q - 1)` of the roots of unity that carry every value.
    pub fn root_order(&self) -> u32 {
        self.characteristic() * self.group_order()
    }

    pub fn character(&self, k: i64) -> MultChar {
        let n = self.group_order() as i64;
        MultChar {
            k: k.rem_euclid(n) as u32,
            q: self.order(),
        }
    }

    pub fn trivial_character(&self) -> MultChar {
        self.character(0)
    }

    /// The quadratic character `chi_{(q-1)/2}`.
    pub fn quadratic_character(&self) -> MultChar {
        self.character(self.group_order() as i64 / 2)
    }

    /// All characters `chi_0, ..., chi_{q-2}` in index order.
    pub fn characters(&self) -> impl Iterator<Item = MultChar> + '_ {
        (0..self.group_order() as i64).map(|k| self.character(k))
    }

    pub fn check_char(&self, chi: MultChar) -> Result<()> {
        if chi.q == self.order() {
            Ok(())
        } else {
            Err(Error::ContextMismatch {
                left: self.order(),
                right: chi.q,
            })
        }
    }

    /// Accepts `chi_k` or a bare integer `k`.
    pub fn parse_character(&self, s: &str) -> Result<MultChar> {
        let s = s.trim();
        let k = s
            .strip_prefix("chi_")
            .unwrap_or(s)
            .parse::<i64>()
            .map_err(|_| Error::ParseCharacter(s.to_string()))?;
        Ok(self.character(k))
    }

    /// Exponent `e` with `chi_k(x) = zeta_m^e`, or `None` when `x = 0`.
    #[inline]
    pub fn char_exponent(&self, k: u32, x: FieldElement) -> Option<i64> {
        let n = self.group_order() as u64;
        self.dlog_opt(x)
            .map(|j| (self.characteristic() as u64 * ((k as u64 * j as u64) % n)) as i64)
    }

    /// Exponent `e` with `theta(x) = zeta_m^e`.
    #[inline]
    pub fn add_exponent(&self, x: FieldElement) -> i64 {
        self.group_order() as i64 * self.trace(x) as i64
    }

    /// `chi(x)` as an exact cyclotomic number.
    pub fn eval_mult(&self, chi: MultChar, x: FieldElement) -> Result<CycloNumber> {
        self.check_char(chi)?;
        self.check(x)?;
        let m = self.root_order();
        Ok(match self.char_exponent(chi.k, x) {
            None => CycloNumber::zero(m),
            Some(e) => CycloNumber::root_of_unity(m, e),
        })
    }

    /// The additive character `theta(x) = zeta_p^{tr(x)}`.
    pub fn eval_add(&self, x: FieldElement) -> Result<CycloNumber> {
        self.check(x)?;
        Ok(CycloNumber::root_of_unity(self.root_order(), self.add_exponent(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u32, r: u32) -> FieldContext {
        FieldContext::new(p, r).unwrap()
    }

    #[test]
    fn trivial_character_values() {
        let f5 = f(5, 1);
        let eps = f5.trivial_character();
        assert!(f5.eval_mult(eps, f5.zero()).unwrap().is_zero());
        for x in f5.units() {
            assert_eq!(f5.eval_mult(eps, x).unwrap(), CycloNumber::one(20));
        }
    }

    #[test]
    fn quadratic_character_of_two_mod_five() {
        let f5 = f(5, 1);
        let phi = f5.character(2);
        assert_eq!(phi, f5.quadratic_character());
        assert_eq!(
            f5.eval_mult(phi, f5.from_int(2)).unwrap(),
            CycloNumber::from_int(20, -1)
        );
    }

    #[test]
    fn additive_character_values() {
        let f5 = f(5, 1);
        assert_eq!(f5.eval_add(f5.zero()).unwrap(), CycloNumber::one(20));
        // zeta_5^2 = zeta_20^8
        assert_eq!(f5.eval_add(f5.from_int(2)).unwrap(), CycloNumber::root_of_unity(20, 8));
        let f9 = f(3, 2);
        let t = f9.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(f9.eval_add(t).unwrap(), CycloNumber::one(24));
    }

    #[test]
    fn character_group_operations() {
        let f5 = f(5, 1);
        let eps = f5.trivial_character();
        assert_eq!(eps.inverse(), eps);
        assert_eq!(f5.character(1).product(f5.character(3)).unwrap(), eps);
        assert_eq!(f5.character(2).inverse(), f5.character(2));
        assert!(eps.is_trivial());
        let f7 = f(7, 1);
        assert_eq!(
            f5.character(1).product(f7.character(1)).unwrap_err(),
            Error::ContextMismatch { left: 5, right: 7 }
        );
        assert!(f7.eval_mult(f5.character(1), f7.one()).is_err());
    }

    #[test]
    fn deltas() {
        let f5 = f(5, 1);
        assert_eq!(delta_char(f5.trivial_character()), 1);
        assert_eq!(delta_char(f5.character(1)), 0);
        assert_eq!(delta_elem(f5.zero()), 1);
        assert_eq!(delta_elem(f5.one()), 0);
    }

    #[test]
    fn labels_parse() {
        let f7 = f(7, 1);
        assert_eq!(f7.parse_character("chi_4").unwrap(), f7.character(4));
        assert_eq!(f7.parse_character("-1").unwrap(), f7.character(5));
        assert!(f7.parse_character("psi").is_err());
        assert_eq!(f7.character(3).label(), "chi_3");
    }

    #[test]
    fn orthogonality_over_elements() {
        for (p, r) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 4)] {
            let ctx = f(p, r);
            let m = ctx.root_order();
            for x in ctx.elements() {
                let mut sum = CycloNumber::zero(m);
                for chi in ctx.characters() {
                    sum = sum.add(&ctx.eval_mult(chi, x).unwrap());
                }
                let expected = if x == ctx.one() { ctx.group_order() as i64 } else { 0 };
                assert_eq!(sum, CycloNumber::from_int(m, expected));
            }
        }
    }

    #[test]
    fn multiplicativity() {
        for (p, r) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (13, 1)] {
            let ctx = f(p, r);
            for chi in ctx.characters() {
                for x in ctx.units() {
                    for y in ctx.units() {
                        let lhs = ctx.eval_mult(chi, ctx.mul(x, y)).unwrap();
                        let rhs = ctx.eval_mult(chi, x).unwrap().mul(&ctx.eval_mult(chi, y).unwrap());
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn additive_character_is_unitary() {
        for (p, r) in [(3, 2), (5, 1), (7, 1), (3, 3)] {
            let ctx = f(p, r);
            for x in ctx.elements() {
                let prod = ctx.eval_add(x).unwrap().mul(&ctx.eval_add(ctx.neg(x)).unwrap());
                assert_eq!(prod, CycloNumber::one(ctx.root_order()));
            }
        }
    }

    #[test]
    fn chi_one_generates_the_character_group() {
        for (p, r) in [(3, 1), (5, 1), (7, 1), (3, 2), (13, 1)] {
            let ctx = f(p, r);
            let chi1 = ctx.character(1);
            let mut acc = chi1;
            let mut order = 1;
            while !acc.is_trivial() {
                acc = acc * chi1;
                order += 1;
            }
            assert_eq!(order, ctx.group_order());
        }
    }
}
